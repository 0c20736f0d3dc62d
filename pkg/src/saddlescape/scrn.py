"""Stochastic cubic-regularized Newton with an exact subproblem solver.

Each iteration builds gradient/Hessian estimates, minimizes the cubic model

    m(h) = g'h + 0.5 h'Hh + (M/6) ||h||^3

exactly, and steps to ``x + h*``.  The global minimizer is characterized by

    g + H h* + (M/2) ||h*|| h* = 0        (stationarity)
    H + (M/2) ||h*|| I  is PSD            (second-order condition)

so after a symmetric eigendecomposition ``H = Q diag(w) Q'`` the problem
reduces to one scalar root find: with ``b = Q'g`` and step radius ``s``,

    psi(s) = || b / (w + (M/2) s) ||

is strictly decreasing in ``s``, and the radius solves ``psi(s) = s`` on
``s >= s_min = max(0, -2 w_min / M)``.  When ``g`` has no component on the
minimum eigenspace and ``psi(s_min) < s_min`` (the hard case), the step is
completed with an explicit minimum-eigenvector component of the norm that
lands ``||h*||`` exactly on ``s_min``.

Solving exactly (rather than with an iterative subsolver) is the right
trade at desk scale: the eigendecomposition is cheap for the dimensions we
run, and exactness is what makes the optimality conditions testable
invariants.  Every solve validates all three conditions before returning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .diagnostics import RunTrace, TraceRow, certify
from .errors import ConfigurationError, NumericalError, ScheduleError
from .estimators import (
    NU_FLOOR,
    ZoConfig,
    fo_gradient,
    so_hessian,
    zo_gradient,
    zo_hessian,
)
from .problems import ProblemMetadata, StochasticProblem, as_point, clamp_to_box
from .seeds import SeedStream

HIGHER_ORDER = "higher_order"
ZEROTH_ORDER = "zeroth_order"

_STATIONARITY_TOL = 1e-8
_PSD_TOL = 1e-8
_DECREASE_TOL = 1e-8


@dataclass(frozen=True)
class CubicModel:
    """(g, H, M) triple defining the local cubic model."""

    g: np.ndarray
    H: np.ndarray
    M: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        H = np.asarray(self.H, dtype=np.float64)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", H)
        if g.ndim != 1 or H.shape != (g.size, g.size):
            raise ConfigurationError(
                f"model shapes incompatible: g {g.shape}, H {H.shape}"
            )
        if not self.M > 0:
            raise ConfigurationError(f"cubic penalty M must be positive, got {self.M}")
        scale = max(1.0, float(np.abs(H).max()) if H.size else 1.0)
        if np.all(np.isfinite(H)) and float(np.abs(H - H.T).max()) > 1e-10 * scale:
            raise ConfigurationError("model Hessian must be symmetric")

    def value(self, h: np.ndarray) -> float:
        """Model decrease m(x + h) - m(x) at displacement h."""
        h = np.asarray(h, dtype=np.float64)
        return float(
            self.g @ h + 0.5 * h @ self.H @ h + (self.M / 6.0) * np.linalg.norm(h) ** 3
        )


@dataclass(frozen=True)
class CubicSolution:
    h_star: np.ndarray
    model_decrease: float
    radius: float
    multiplier: float
    hard_case: bool


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip so the first nonzero coordinate is positive (reproducible ties)."""
    for entry in v:
        if entry != 0.0:
            return v if entry > 0 else -v
    return v


def solve_cubic(model: CubicModel, tol: float = 1e-10) -> CubicSolution:
    """Global minimizer of the cubic model.

    Eigendecomposition plus a bracketed (Brent) root find on the secular
    equation ``psi(s) = s``; the secular function is monotone on the bracket
    so the root find always terminates.  The hard case is detected from the
    gradient's component on the minimum eigenspace and resolved by adding a
    null-direction component of the prescribed norm, with a deterministic
    sign convention.

    Raises ``NumericalError`` for non-finite model entries or if the
    optimality conditions fail to hold at the computed step.
    """
    if not 0.0 < tol <= 1e-4:
        raise ConfigurationError(f"tol must be in (0, 1e-4], got {tol}")
    g, H, M = model.g, model.H, model.M
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(H))):
        raise NumericalError("cubic model has non-finite entries")

    w, Q = np.linalg.eigh(H)
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigendecomposition produced non-finite eigenvalues")
    b = Q.T @ g
    w_min = float(w[0])
    g_norm = float(np.linalg.norm(g))
    eig_scale = max(1.0, float(np.abs(w).max()))
    # eigenvalues below eigh's resolution are zero curvature, not an escape
    # direction: without this, exactly-singular PSD Hessians trigger
    # ulp-sized hard-case steps
    psd_at_tol = w_min >= -1e-13 * eig_scale
    s_min = 0.0 if psd_at_tol else -2.0 * w_min / M
    active = w <= w_min + 1e-12 * eig_scale
    b_active = float(np.linalg.norm(b[active]))
    hard_candidate = b_active <= 1e-11 * max(1.0, g_norm)

    def psi(s: float, mask=None) -> float:
        den = w + 0.5 * M * s
        num = b if mask is None else np.where(mask, 0.0, b)
        with np.errstate(divide="ignore", over="ignore"):
            ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.inf)
            ratio = np.where(num == 0.0, 0.0, ratio)
        if np.any(np.isinf(ratio)):
            return math.inf
        return float(np.linalg.norm(ratio))

    hard_case = False
    if g_norm == 0.0 and psd_at_tol:
        h = np.zeros_like(g)
        radius = 0.0
    elif hard_candidate and not psd_at_tol and psi(s_min, mask=active) < s_min:
        # Hard case: no pole at s_min and the interior solution is too short;
        # pad with a minimum-eigenvector component to land exactly on s_min.
        hard_case = True
        den = w + 0.5 * M * s_min
        coeff = np.where(active, 0.0, b / np.where(active, 1.0, den))
        interior = float(np.linalg.norm(coeff))
        alpha = math.sqrt(max(s_min * s_min - interior * interior, 0.0))
        h = -Q @ coeff + alpha * _canonical_sign(Q[:, 0])
        radius = s_min
    else:
        mask = active if hard_candidate else None

        def secular(s: float) -> float:
            return psi(s, mask=mask) - s

        lo = s_min
        val_lo = secular(lo)
        if val_lo == math.inf:
            # pole at s_min: approach it until the secular value is positive finite
            delta = max(s_min, 1.0)
            while True:
                val_lo = secular(s_min + delta)
                if 0.0 < val_lo < math.inf:
                    break
                delta /= 16.0
                if delta < 1e-300:
                    raise NumericalError("could not bracket the secular root near its pole")
            lo = s_min + delta
        if val_lo < 0.0:
            raise NumericalError("secular equation has no root above s_min")
        if val_lo == 0.0:
            radius = lo
        else:
            hi = max(2.0 * lo, 1.0)
            while secular(hi) > 0.0:
                hi *= 2.0
                if hi > 1e300:
                    raise NumericalError("secular root bracketing diverged")
            radius = float(
                brentq(
                    secular,
                    lo,
                    hi,
                    xtol=max(tol * 1e-6, 1e-15),
                    rtol=4 * np.finfo(float).eps,
                    maxiter=200,
                )
            )
        den = w + 0.5 * M * radius
        safe = np.where(den > 0.0, den, np.inf)
        coeff = b / safe
        if mask is not None:
            coeff = np.where(mask, 0.0, coeff)
        h = -Q @ coeff
        radius = float(np.linalg.norm(h))

    decrease = model.value(h)
    sol = CubicSolution(
        h_star=h,
        model_decrease=decrease,
        radius=float(np.linalg.norm(h)),
        multiplier=0.5 * M * float(np.linalg.norm(h)),
        hard_case=hard_case,
    )
    _validate_solution(model, sol, g_norm, w_min)
    return sol


def _validate_solution(model: CubicModel, sol: CubicSolution, g_norm: float, w_min: float) -> None:
    # fixed tolerances at moderate model scales; for very large-magnitude
    # models the floating-point floor (~eps times the terms combined) takes
    # over, since no float64 step can do better
    h = sol.h_star
    eps = np.finfo(float).eps
    h_scale = float(np.linalg.norm(model.H, 2)) * sol.radius
    resid = float(np.linalg.norm(model.g + model.H @ h + sol.multiplier * h))
    resid_tol = max(
        _STATIONARITY_TOL * max(1.0, g_norm),
        64.0 * eps * (g_norm + h_scale + sol.multiplier * sol.radius),
    )
    if resid > resid_tol:
        raise NumericalError(
            f"cubic step stationarity residual {resid:.3e} exceeds tolerance"
        )
    psd_tol = max(_PSD_TOL, 64.0 * eps * (abs(w_min) + sol.multiplier))
    if w_min + sol.multiplier < -psd_tol:
        raise NumericalError(
            f"cubic step violates the second-order condition by {w_min + sol.multiplier:.3e}"
        )
    bound = -(model.M / 12.0) * sol.radius**3
    decrease_tol = max(_DECREASE_TOL, 64.0 * eps * (abs(sol.model_decrease) + abs(bound) + h_scale * sol.radius))
    if sol.model_decrease > bound + decrease_tol:
        raise NumericalError(
            f"cubic model decrease {sol.model_decrease:.3e} misses the M/12 bound {bound:.3e}"
        )


@dataclass(frozen=True)
class ScrnConfig:
    """Cubic penalty, batch sizes, and budget for a cubic-Newton run."""

    M: float
    n1: int
    n2: int
    T: int
    box_radius: float
    epsilon: float
    mode: str = HIGHER_ORDER
    zo: Optional[ZoConfig] = None
    solver_tol: float = 1e-10

    def __post_init__(self):
        if self.M <= 0:
            raise ConfigurationError(f"M must be positive, got {self.M}")
        if self.n1 < 1 or self.n2 < 1 or self.T < 1:
            raise ConfigurationError("need n1, n2, T >= 1")
        if self.box_radius <= 0 or self.epsilon <= 0:
            raise ConfigurationError("box_radius and epsilon must be positive")
        if self.mode not in (HIGHER_ORDER, ZEROTH_ORDER):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if (self.zo is not None) != (self.mode == ZEROTH_ORDER):
            raise ConfigurationError("zo config must be present iff mode is zeroth_order")
        if self.zo is not None and (self.zo.n1, self.zo.n2) != (self.n1, self.n2):
            raise ConfigurationError("zo batch sizes must match the configured n1, n2")

    @property
    def calls_per_step(self) -> int:
        if self.mode == ZEROTH_ORDER:
            return 2 * self.n1 + 3 * self.n2
        return self.n1 + self.n2

    def echo(self) -> str:
        parts = [
            "algorithm = scrn",
            f"mode = {self.mode}",
            f"M = {self.M!r}",
            f"n1 = {self.n1}",
            f"n2 = {self.n2}",
            f"T = {self.T}",
            f"box_radius = {self.box_radius!r}",
            f"epsilon = {self.epsilon!r}",
        ]
        if self.zo is not None:
            parts.append(f"nu = {self.zo.nu!r}")
        return "\n".join(parts)


def _estimate_step(p: StochasticProblem, x: np.ndarray, cfg: ScrnConfig, stream: SeedStream):
    if cfg.mode == ZEROTH_ORDER:
        grad = zo_gradient(p, x, cfg.zo, stream)
        hess = zo_hessian(p, x, cfg.zo, stream)
    else:
        grad = fo_gradient(p, x, cfg.n1, stream)
        hess = so_hessian(p, x, cfg.n2, stream)
    sol = solve_cubic(CubicModel(g=grad.g, H=hess.H, M=cfg.M), tol=cfg.solver_tol)
    x_new = clamp_to_box(x + sol.h_star, cfg.box_radius)
    if not np.all(np.isfinite(x_new)):
        raise NumericalError("cubic step produced non-finite entries")
    return x_new, grad.oracle_calls + hess.oracle_calls, sol


def scrn_step(p: StochasticProblem, x, cfg: ScrnConfig, stream: SeedStream):
    """One cubic-Newton step; returns (new point, oracle calls)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NumericalError("iterate has non-finite entries")
    x_new, calls, _ = _estimate_step(p, x, cfg, stream)
    return x_new, calls


def run_scrn(
    p: StochasticProblem,
    x1,
    cfg: ScrnConfig,
    certify_every: int = 1,
    seed: int = 0,
) -> RunTrace:
    """Run T cubic-Newton steps with certification checkpoints.

    Besides the per-checkpoint diagnostics (which also record the step norm
    and model decrease), the trace reports the uniformly drawn iterate
    ``R ~ U{1..T}`` with its certificate and the budget consumed through it:
    that random iterate is the object of the method's in-expectation
    guarantee.
    """
    if certify_every < 1:
        raise ConfigurationError(f"certify_every must be >= 1, got {certify_every}")
    x = as_point(x1, p.meta.dim)
    stream = SeedStream(seed, "scrn")
    trace = RunTrace(seed=seed, algorithm="scrn", config_echo=cfg.echo())
    r_index = int(stream.child("random_iterate").rng().integers(1, cfg.T + 1))

    def record(t: int, calls: int, sol: Optional[CubicSolution]) -> None:
        cert = certify(p, x, cfg.epsilon)
        trace.append(
            TraceRow(
                t=t,
                f=p.exact_value(x),
                grad_norm=cert.grad_norm,
                lambda_min=cert.lambda_min,
                oracle_calls=calls,
                certified=cert.certified,
                h_norm=None if sol is None else sol.radius,
                model_decrease=None if sol is None else sol.model_decrease,
            )
        )

    calls = 0
    record(0, calls, None)
    x_at_r = None
    calls_at_r = None
    for t in range(1, cfg.T + 1):
        try:
            x, step_calls, sol = _estimate_step(p, x, cfg, stream.child("step", t))
        except NumericalError as err:
            err.iterate = t
            err.trace = trace
            raise
        calls += step_calls
        if t == r_index:
            x_at_r = x.copy()
            calls_at_r = calls
        if t % certify_every == 0 or t == cfg.T:
            record(t, calls, sol)
    trace.total_oracle_calls = calls
    trace.r_index = r_index
    trace.r_oracle_calls = calls_at_r
    trace.r_certificate = certify(p, x_at_r, cfg.epsilon)
    return trace


def schedule_scrn(
    epsilon: float,
    meta: ProblemMetadata,
    f0_gap: float,
    mode: str = HIGHER_ORDER,
    mu: tuple = (1.0,) * 5,
) -> ScrnConfig:
    """Theorem schedule for cubic Newton.

    Higher-order mode: ``T = 144 gap / (M eps^1.5)``, gradient batch
    ``mu0 (rho-1)/eps`` (floored at 1, so the deterministic arm needs no
    averaging), Hessian batch ``1/eps``, and the literal max-of-four cubic
    penalty ``M = max(L_H, 1/4, (0.004 L_G + sigma2) eps^0.25, 40 sigma2)``.
    The penalty is evaluated per epsilon as written; for small epsilon the
    max is typically attained at ``L_H`` or ``40 sigma2``, making it
    effectively constant.

    Zeroth-order mode replaces the penalty by the constant ``mu4`` and uses
    the dimension-dependent batch sizes and smoothing radius of the
    derivative-free analysis.
    """
    if not 0.0 < epsilon < 1.0:
        raise ScheduleError(f"schedule undefined for epsilon={epsilon}; need (0, 1)")
    if f0_gap <= 0:
        raise ScheduleError(f"initial gap must be positive, got {f0_gap}")
    if len(mu) != 5 or any(m <= 0 for m in mu):
        raise ScheduleError("mu must hold 5 positive constants")
    d = meta.dim
    if mode == HIGHER_ORDER:
        if meta.rho_true is None:
            raise ScheduleError(
                "higher-order schedule needs meta.rho_true; estimate it first or "
                "construct the problem with a known rho"
            )
        M = max(
            meta.L_H,
            0.25,
            (0.004 * meta.L_G + meta.sigma2) * epsilon**0.25,
            40.0 * meta.sigma2,
        )
        T = max(1, math.ceil(144.0 * f0_gap / (M * epsilon**1.5)))
        n1 = max(1, math.ceil(mu[0] * (meta.rho_true - 1.0) / epsilon))
        n2 = max(1, math.ceil(1.0 / epsilon))
        return ScrnConfig(
            M=M, n1=n1, n2=n2, T=T,
            box_radius=meta.box_radius, epsilon=epsilon, mode=HIGHER_ORDER,
        )
    if mode == ZEROTH_ORDER:
        M = mu[4]
        T = max(1, math.ceil(mu[0] * f0_gap / (M * epsilon**1.5)))
        n1 = max(1, math.ceil(mu[1] * (d + 5) / epsilon))
        n2 = max(1, math.ceil(mu[2] * (1.0 + 2.0 * math.log(2 * d)) * (d + 16) ** 4 / epsilon))
        nu = max(mu[3] * epsilon / (d + 16) ** 2.5, NU_FLOOR)
        return ScrnConfig(
            M=M, n1=n1, n2=n2, T=T,
            box_radius=meta.box_radius, epsilon=epsilon, mode=ZEROTH_ORDER,
            zo=ZoConfig(nu=nu, n1=n1, n2=n2),
        )
    raise ConfigurationError(f"unknown mode {mode!r}")
