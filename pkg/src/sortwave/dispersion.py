"""Dispersion relation of trait-structured invasion fronts.

The exponential edge ansatz ``n ~ exp(lambda*(x - c*t)) * Q(theta)`` with
spatial decay ``lambda < 0`` reduces the linearized front dynamics to a
Neumann eigenproblem on the trait interval [0, Theta]:

    alpha * Q'' + (theta*lambda**2 + r) * Q = mu0 * Q,
    Q'(0) = Q'(Theta) = 0,  Q > 0,  integral(Q) = 1,

where ``mu0`` is the principal eigenvalue of the operator on the left.  The
admissible wave speed at decay ``lambda`` is ``c(lambda) = mu0 / |lambda|``,
and the minimal speed ``c*`` is the interior minimum of ``c`` over
``lambda < 0``.  The positive eigenvector ``Q`` is the trait distribution of
the individuals at the edge of the front; its first moment exceeds Theta/2,
i.e. the edge over-represents fast dispersers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid1D, TridiagonalSystem, banded_solve, trapezoid, trapezoid_weights
from .errors import BracketError, ConvergenceError, InvalidModeError

__all__ = [
    "ModelParams",
    "DispersionMode",
    "MinimalSpeedResult",
    "EdgeDiagnostics",
    "DEFAULT_N_THETA",
    "theta_grid",
    "assemble_operator",
    "principal_mode",
    "wave_speed",
    "dispersion_mode",
    "minimal_speed",
    "edge_diagnostics",
]

DEFAULT_N_THETA = 2001

# Inverse-power iteration controls.
_EIG_TOL = 1e-12
_MAX_ITER = 10_000


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: growth rate ``r``, trait diffusivity ``alpha``,
    and the trait-space upper bound ``theta_max``."""

    r: float
    alpha: float
    theta_max: float

    def __post_init__(self) -> None:
        for name in ("r", "alpha", "theta_max"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"ModelParams.{name} must be finite and > 0, got {value}")


def theta_grid(params: ModelParams, n: int = DEFAULT_N_THETA) -> Grid1D:
    """Default trait grid: n nodes on [0, theta_max]."""
    return Grid1D(0.0, params.theta_max, n)


@dataclass
class DispersionMode:
    """One point of the dispersion relation: decay, speed, and edge distribution.

    ``q`` is the discrete positive eigenvector normalized so its trapezoid
    integral is 1; ``mean_theta_edge`` is its first moment and
    ``fisher_term`` the log-derivative integral
    ``alpha/(theta_max*lam**2) * integral((Q'/Q)**2)`` that measures how far
    the edge distribution deviates from uniform.
    """

    lam: float
    speed: float
    q: np.ndarray
    grid: Grid1D
    mean_theta_edge: float
    fisher_term: float

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=float)
        if self.q.shape != (self.grid.n,):
            raise InvalidModeError("invalid mode: q shape does not match grid")
        if np.any(self.q < 0) or not np.all(np.isfinite(self.q)):
            raise InvalidModeError("invalid mode: q must be finite and nonnegative")
        if abs(trapezoid(self.q, self.grid.h) - 1.0) > 1e-10:
            raise InvalidModeError("invalid mode: q is not normalized")


@dataclass
class MinimalSpeedResult:
    """Minimizer of the dispersion relation c(lambda).

    ``bracket_low = sqrt(2*r*theta_max)`` and ``bracket_high =
    2*sqrt(r*theta_max)`` are the a-priori bounds on ``c_star`` coming from
    the Rayleigh quotient with a uniform trial vector and from the potential
    maximum respectively; ``deriv_at_min`` is a centered-difference estimate
    of ``c'(lambda_star)``.
    """

    c_star: float
    lambda_star: float
    mode_star: DispersionMode
    bracket_low: float
    bracket_high: float
    deriv_at_min: float


@dataclass
class EdgeDiagnostics:
    """Integral identities of the edge distribution.

    ``eq_mean_residual`` checks ``<theta> = Theta/2 + fisher_term``;
    ``speed_relation_residual`` and ``kpp_gap`` are filled only at the
    minimizer, where ``c* = -2*lam* * int(theta*Q**2)/int(Q**2)`` holds and
    ``(c*)**2`` strictly exceeds the KPP value ``4*r*<theta>``.
    """

    mean_theta_edge: float
    fisher_term: float
    eq_mean_residual: float
    speed_relation_residual: float | None = None
    cstar_formula_residual: float | None = None
    kpp_gap: float | None = None


def assemble_operator(params: ModelParams, lam: float, grid: Grid1D) -> TridiagonalSystem:
    """Discrete trait operator ``A = alpha*D2_Neumann + diag(theta*lam**2 + r)``.

    ``D2_Neumann`` is the standard three-point Laplacian with reflected ghost
    nodes, i.e. the mass-lumped finite-element form: rows 0 and n-1 read
    ``2*(q[1]-q[0])/h**2`` and ``2*(q[n-2]-q[n-1])/h**2``.  Row sums of the
    diffusion part vanish exactly, so ``A @ ones = theta*lam**2 + r``.  The
    operator is self-adjoint under the trapezoid inner product (half weights
    at the endpoints), which is the symmetrization used by the eigensolver.
    The ``lam*c`` shift is deliberately excluded: it is recovered from the
    principal eigenvalue.
    """
    if not lam < 0:
        raise ValueError(f"spatial decay must satisfy lambda < 0, got {lam}")
    n = grid.n
    h = grid.h
    off = params.alpha / h**2
    sub = np.full(n - 1, off)
    sup = np.full(n - 1, off)
    sub[-1] = 2.0 * off
    sup[0] = 2.0 * off
    diag = -2.0 * off + grid.nodes() * lam**2 + params.r
    return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=np.zeros(n))


def principal_mode(
    params: ModelParams,
    lam: float,
    grid: Grid1D | None = None,
    *,
    eig_tol: float = _EIG_TOL,
    max_iter: int = _MAX_ITER,
) -> tuple[float, np.ndarray]:
    """Principal eigenpair ``(mu0, q)`` of the trait operator at decay ``lam``.

    Inverse power iteration on ``sigma*I - A`` with ``sigma = r +
    theta_max*lam**2 + 1``: the shift dominates the potential maximum, so the
    shifted matrix is a positive-definite M-matrix, each solve preserves
    positivity, and the Perron vector is the dominant mode of the inverse.
    Iterates until the Rayleigh quotient moves by less than ``eig_tol`` *and*
    the eigen-residual reaches its rounding floor (or 1e-10*|mu0| if that is
    larger), then polishes with two extra solves.  ``q`` is returned positive
    with trapezoid integral 1.
    """
    if grid is None:
        grid = theta_grid(params)
    system = assemble_operator(params, lam, grid)
    sigma = params.r + params.theta_max * lam**2 + 1.0
    n = grid.n
    h = grid.h
    w = trapezoid_weights(n, h)

    shift_sub = -system.sub
    shift_sup = -system.sup
    shift_diag = sigma - system.diag

    # Cancellation floor of the computed residual: the second difference of
    # an O(1) vector carries ~4 ulp absolute error amplified by alpha/h^2.
    eps = np.finfo(float).eps
    norm_a = float(np.max(np.abs(system.diag)) + 2.0 * params.alpha / h**2)

    q = np.full(n, 1.0 / params.theta_max)
    mu_prev = math.inf
    mu = math.nan
    best_residual = math.inf
    stagnant = 0
    converged = False
    for iteration in range(1, max_iter + 1):
        v = banded_solve(shift_sub, shift_diag, shift_sup, q)
        v = v / trapezoid(v, h)
        av = system.matvec(v)
        wv = w * v
        mu = float(wv @ av) / float(wv @ v)
        residual = float(np.max(np.abs(av - mu * v)))
        res_floor = 8.0 * eps * norm_a * float(np.max(np.abs(v)))
        q = v
        res_ok = residual <= max(1e-10 * abs(mu), res_floor)
        if res_ok and abs(mu - mu_prev) <= eig_tol:
            converged = True
            break
        # Near the rounding floor the Rayleigh quotient can enter a short
        # limit cycle whose amplitude exceeds eig_tol; once the residual has
        # stopped improving for several sweeps the iteration has reached its
        # floating-point fixed set and further sweeps change nothing.
        if residual < 0.9 * best_residual:
            best_residual = residual
            stagnant = 0
        else:
            stagnant += 1
        if res_ok and stagnant >= 5:
            converged = True
            break
        mu_prev = mu
    if not converged:
        raise ConvergenceError(
            f"principal eigenpair did not converge after {max_iter} iterations "
            f"(lambda={lam}, last residual={residual:.3e})",
            iterations=max_iter,
        )
    # Two polish sweeps push the eigenvector error to the backward-error floor.
    for _ in range(2):
        v = banded_solve(shift_sub, shift_diag, shift_sup, q)
        q = v / trapezoid(v, h)
    av = system.matvec(q)
    wq = w * q
    mu = float(wq @ av) / float(wq @ q)
    if np.any(q <= 0):
        # M-matrix solves preserve strict positivity; only catastrophic
        # underflow could get here.
        raise ConvergenceError(
            f"principal eigenvector lost positivity (lambda={lam})", iterations=iteration
        )
    return mu, q


def wave_speed(
    params: ModelParams,
    lam: float,
    grid: Grid1D | None = None,
) -> float:
    """Wave speed ``c(lambda) = mu0(lambda)/|lambda|`` at decay ``lambda < 0``."""
    mu0, _ = principal_mode(params, lam, grid)
    return mu0 / (-lam)


def _log_derivative_sq_integral(q: np.ndarray, h: float) -> float:
    """Trapezoid integral of (d(log q)/dtheta)^2; centered differences inside,
    one-sided at the two endpoints (q > 0 guaranteed by Perron positivity)."""
    grad = np.gradient(np.log(q), h, edge_order=1)
    return trapezoid(grad**2, h)


def dispersion_mode(
    params: ModelParams,
    lam: float,
    grid: Grid1D | None = None,
) -> DispersionMode:
    """Solve the spectral problem at ``lam`` and package mode diagnostics."""
    if grid is None:
        grid = theta_grid(params)
    mu0, q = principal_mode(params, lam, grid)
    theta = grid.nodes()
    mean_theta = trapezoid(theta * q, grid.h)
    fisher = (
        params.alpha
        / (params.theta_max * lam**2)
        * _log_derivative_sq_integral(q, grid.h)
    )
    return DispersionMode(
        lam=lam,
        speed=mu0 / (-lam),
        q=q,
        grid=grid,
        mean_theta_edge=mean_theta,
        fisher_term=fisher,
    )


def _golden_min(
    fn, a: float, b: float, *, rel_tol: float, cache: dict[float, float]
) -> float:
    """Golden-section minimum of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def value(x: float) -> float:
        if x not in cache:
            cache[x] = fn(x)
        return cache[x]

    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1 = value(x1)
    f2 = value(x2)
    while (b - a) > rel_tol * max(abs(a), abs(b)):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = value(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = value(x2)
    return 0.5 * (a + b)


def _first_order_gap(params: ModelParams, lam: float, grid: Grid1D) -> float:
    """``g(lambda) = lambda*mu0'(lambda) - mu0(lambda)``, whose root is lambda*.

    ``mu0' = 2*lambda*int(theta*q**2)/int(q**2)`` holds exactly for the
    discrete operator (Hellmann-Feynman in the trapezoid inner product), so
    ``g`` is smooth in ``lambda`` at the eigensolver's full accuracy: no
    difference quotient, hence no noise amplification near the minimum.
    ``g = 0`` is equivalent to ``c'(lambda) = 0``.
    """
    mu0, q = principal_mode(params, lam, grid)
    h = grid.h
    theta = grid.nodes()
    dmu = 2.0 * lam * trapezoid(theta * q * q, h) / trapezoid(q * q, h)
    return lam * dmu - mu0


def minimal_speed(
    params: ModelParams,
    grid: Grid1D | None = None,
    *,
    lam_rel_tol: float = 1e-8,
    max_expansions: int = 5,
) -> MinimalSpeedResult:
    """Minimal wave speed ``c*`` and critical decay ``lambda*``.

    Golden-section search on ``c(lambda)`` starting from the bracket
    ``[-8*sqrt(r/Theta), -sqrt(r/Theta)/8]``; if the minimizer lands on an
    endpoint the bracket is expanded by a factor 4 on that side, up to
    ``max_expansions`` times.  Because eigensolver rounding limits how well a
    pure function minimizer can localize a flat minimum, the golden-section
    result is polished by a secant solve of the first-order condition
    ``lambda*mu0' = mu0``.
    """
    if grid is None:
        grid = theta_grid(params)
    lam_scale = math.sqrt(params.r / params.theta_max)
    a = -8.0 * lam_scale
    b = -lam_scale / 8.0
    cache: dict[float, float] = {}

    def c_of(lam: float) -> float:
        return wave_speed(params, lam, grid)

    lam_star = math.nan
    for _ in range(max_expansions + 1):
        lam_star = _golden_min(c_of, a, b, rel_tol=lam_rel_tol, cache=cache)
        width = b - a
        if lam_star - a < 0.02 * width:
            a *= 4.0
        elif b - lam_star < 0.02 * width:
            b /= 4.0
        else:
            break
    else:
        raise BracketError(
            f"minimum still on bracket endpoint after {max_expansions} expansions, "
            f"bracket [{a}, {b}]"
        )

    # Secant polish of the first-order condition.
    la = lam_star * (1.0 + 2e-5)
    lb = lam_star * (1.0 - 2e-5)
    ga = _first_order_gap(params, la, grid)
    gb = _first_order_gap(params, lb, grid)
    for _ in range(30):
        if gb == ga:
            break
        ln = lb - gb * (lb - la) / (gb - ga)
        if not (a <= ln <= b):
            break
        la, ga = lb, gb
        lb, gb = ln, _first_order_gap(params, ln, grid)
        if abs(lb - la) <= 1e-13 * abs(lb):
            break
    lam_star = lb

    mode_star = dispersion_mode(params, lam_star, grid)
    c_star = mode_star.speed
    dlam = 1e-4 * abs(lam_star)
    deriv = (c_of(lam_star + dlam) - c_of(lam_star - dlam)) / (2.0 * dlam)
    return MinimalSpeedResult(
        c_star=c_star,
        lambda_star=lam_star,
        mode_star=mode_star,
        bracket_low=math.sqrt(2.0 * params.r * params.theta_max),
        bracket_high=2.0 * math.sqrt(params.r * params.theta_max),
        deriv_at_min=deriv,
    )


def edge_diagnostics(
    mode: DispersionMode,
    params: ModelParams,
    *,
    at_minimum: bool = False,
) -> EdgeDiagnostics:
    """Integral identities satisfied by a converged mode.

    Always reports the first moment, the Fisher-type term, and the residual
    of ``<theta>_edge = Theta/2 + fisher_term``.  With ``at_minimum=True``
    the mode is taken to be the minimizer (lam, speed) = (lambda*, c*):
    the self-adjointness relation ``c* + 2*lam* <theta Q*>/<Q*> = 0`` with
    ``<f> = integral(f*Q*)`` is evaluated, together with the closed-form
    expression for ``(c*)**2``, and the strict bound
    ``(c*)**2 > 4*r*<theta>_edge`` is asserted.
    """
    if np.any(mode.q <= 0):
        raise InvalidModeError("invalid mode: Q has non-positive entries")
    h = mode.grid.h
    theta = mode.grid.nodes()
    q = mode.q
    mean_theta = trapezoid(theta * q, h)
    fisher = (
        params.alpha
        / (params.theta_max * mode.lam**2)
        * _log_derivative_sq_integral(q, h)
    )
    eq_mean_residual = abs(mean_theta - 0.5 * params.theta_max - fisher)

    speed_rel = None
    cstar_formula = None
    kpp_gap = None
    if at_minimum:
        c_star = mode.speed
        lam_star = mode.lam
        bra_q = trapezoid(q * q, h)
        bra_theta_q = trapezoid(theta * q * q, h)
        speed_rel = abs(c_star + 2.0 * lam_star * bra_theta_q / bra_q)
        s = mean_theta * bra_q / bra_theta_q
        cstar_sq = 4.0 * params.r * mean_theta / (1.0 - (1.0 - s) ** 2)
        cstar_formula = abs(c_star**2 - cstar_sq)
        kpp_gap = c_star**2 - 4.0 * params.r * mean_theta
        if not kpp_gap > 0:
            raise InvalidModeError(
                f"invalid mode: (c*)^2 = {c_star**2} does not exceed the KPP value "
                f"{4.0 * params.r * mean_theta}"
            )
    return EdgeDiagnostics(
        mean_theta_edge=mean_theta,
        fisher_term=fisher,
        eq_mean_residual=eq_mean_residual,
        speed_relation_residual=speed_rel,
        cstar_formula_residual=cstar_formula,
        kpp_gap=kpp_gap,
    )
