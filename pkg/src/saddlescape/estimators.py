"""Minibatch first-order and Gaussian-smoothing zeroth-order estimators.

The zeroth-order gradient estimator averages forward differences along
standard-normal directions ``u_i``:

    g = (1/n1) sum_i  (F(x + nu u_i, xi_i) - F(x, xi_i)) / nu * u_i

and the zeroth-order Hessian estimator averages central second differences

    H = (1/n2) sum_i  h_i (u_i u_i' - I),
    h_i = (F(x + nu u_i, xi_i) + F(x - nu u_i, xi_i) - 2 F(x, xi_i)) / (2 nu^2)

with the same noise sample ``xi_i`` shared by the queries of one direction.
Oracle-call accounting is literal query counting: one value query is one
call, so a zeroth-order gradient costs 2 per direction and a zeroth-order
Hessian 3 per direction.

Noise seeds and direction vectors come from independently split seed
streams, so first-order and zeroth-order runs with the same master seed see
the same noise-seed sequence (paired comparisons across oracle modes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ConfigurationError
from .problems import StochasticProblem
from .seeds import SeedStream, fold_int_states, fold_label_states, seed_blocks

NU_FLOOR = 1e-12  # below this, forward differences are cancellation noise


@dataclass(frozen=True)
class ZoConfig:
    """Smoothing radius and batch sizes for zeroth-order estimation."""

    nu: float
    n1: int = 1
    n2: int = 1

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigurationError(f"smoothing radius nu must be positive, got {self.nu}")
        if self.nu < NU_FLOOR:
            raise ConfigurationError(
                f"nu={self.nu} is below the cancellation floor {NU_FLOOR}; "
                "differences this small lose all precision"
            )
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigurationError("batch sizes n1, n2 must be >= 1")


@dataclass(frozen=True)
class GradEstimate:
    g: np.ndarray
    oracle_calls: int


@dataclass(frozen=True)
class HessEstimate:
    H: np.ndarray
    oracle_calls: int


def fo_gradient(p: StochasticProblem, x: np.ndarray, n1: int, stream: SeedStream) -> GradEstimate:
    """Average of n1 sampled gradients; costs n1 oracle calls."""
    if not p.has_grad_oracle:
        raise CapabilityError(f"problem {p.name!r} exposes no gradient oracle")
    if n1 < 1:
        raise ConfigurationError(f"n1 must be >= 1, got {n1}")
    seeds = stream.child("xi").seeds(n1)
    grads = p.sample_grad_batch(np.asarray(x, dtype=np.float64), seeds)
    return GradEstimate(g=grads.mean(axis=0), oracle_calls=n1)


def zo_gradient(p: StochasticProblem, x: np.ndarray, cfg: ZoConfig, stream: SeedStream) -> GradEstimate:
    """Gaussian-smoothing forward-difference gradient; 2 calls per direction."""
    x = np.asarray(x, dtype=np.float64)
    d = p.meta.dim
    seeds = stream.child("xi").seeds(cfg.n1)
    u = stream.child("u").rng().standard_normal((cfg.n1, d))
    f_plus = p.sample_value_batch(x[None, :] + cfg.nu * u, seeds)
    f_base = p.sample_value_batch(x, seeds)
    coeff = (f_plus - f_base) / cfg.nu
    return GradEstimate(g=(coeff[:, None] * u).mean(axis=0), oracle_calls=2 * cfg.n1)


def so_hessian(p: StochasticProblem, x: np.ndarray, n2: int, stream: SeedStream) -> HessEstimate:
    """Average of n2 sampled Hessians, symmetrized; costs n2 calls."""
    if not p.has_hess_oracle:
        raise CapabilityError(f"problem {p.name!r} exposes no Hessian oracle")
    if n2 < 1:
        raise ConfigurationError(f"n2 must be >= 1, got {n2}")
    seeds = stream.child("xih").seeds(n2)
    h = p.sample_hess_batch(np.asarray(x, dtype=np.float64), seeds).mean(axis=0)
    return HessEstimate(H=0.5 * (h + h.T), oracle_calls=n2)


def zo_hessian(p: StochasticProblem, x: np.ndarray, cfg: ZoConfig, stream: SeedStream) -> HessEstimate:
    """Central-second-difference Hessian estimate; 3 calls per direction.

    The averaged ``h_i (u_i u_i' - I)`` is symmetric in exact arithmetic; we
    symmetrize explicitly because floating-point accumulation is not.
    """
    x = np.asarray(x, dtype=np.float64)
    d = p.meta.dim
    seeds = stream.child("xih").seeds(cfg.n2)
    u = stream.child("uh").rng().standard_normal((cfg.n2, d))
    f_plus = p.sample_value_batch(x[None, :] + cfg.nu * u, seeds)
    f_minus = p.sample_value_batch(x[None, :] - cfg.nu * u, seeds)
    f_base = p.sample_value_batch(x, seeds)
    curv = (f_plus + f_minus - 2.0 * f_base) / (2.0 * cfg.nu * cfg.nu)
    outer = np.einsum("n,ni,nj->ij", curv, u, u) / cfg.n2
    h = outer - curv.mean() * np.eye(d)
    return HessEstimate(H=0.5 * (h + h.T), oracle_calls=3 * cfg.n2)


@dataclass(frozen=True)
class RhoEstimate:
    """Empirical strong-growth ratio with its Monte-Carlo standard error."""

    rho_hat: float
    stderr: float


def estimate_sgc_rho(
    p: StochasticProblem,
    points,
    trials: int,
    stream: SeedStream,
) -> RhoEstimate:
    """max over points of  mean ||grad F(x, xi)||^2 / ||grad f(x)||^2.

    Requires every point to have a nonvanishing true gradient (the ratio is
    undefined otherwise) and enough trials for a meaningful mean.
    """
    if trials < 1_000:
        raise ConfigurationError(f"need trials >= 1000, got {trials}")
    if not p.has_grad_oracle:
        raise CapabilityError(f"problem {p.name!r} exposes no gradient oracle")
    best = RhoEstimate(-np.inf, 0.0)
    for k, x in enumerate(points):
        x = np.asarray(x, dtype=np.float64)
        eg = p.exact_grad(x)
        # same reduction as the per-sample norms so the deterministic arm
        # yields a ratio of exactly 1
        denom = float(np.einsum("d,d->", eg, eg))
        if denom <= 1e-16:  # ||grad f|| <= 1e-8
            raise ConfigurationError(
                f"point {k} has vanishing true gradient; growth ratio undefined"
            )
        seeds = stream.child("rho_point", k).seeds(trials)
        grads = p.sample_grad_batch(x, seeds)
        sq = np.einsum("nd,nd->n", grads, grads) / denom
        ratio = float(sq.mean())
        se = float(sq.std(ddof=1) / np.sqrt(trials))
        if ratio > best.rho_hat:
            best = RhoEstimate(ratio, se)
    return best


def grad_minibatch_trials(
    p: StochasticProblem,
    x: np.ndarray,
    n1: int,
    trials: int,
    stream: SeedStream,
) -> np.ndarray:
    """(trials, d) minibatch gradient means for Monte-Carlo moment checks.

    Trial ``k`` equals ``fo_gradient(p, x, n1, stream.child("trial", k)).g``
    but all trials share one vectorized oracle call.
    """
    if not p.has_grad_oracle:
        raise CapabilityError(f"problem {p.name!r} exposes no gradient oracle")
    x = np.asarray(x, dtype=np.float64)
    trial_states = fold_label_states(
        fold_int_states(stream.child("trial").state, np.arange(trials)), "xi"
    )
    seeds = seed_blocks(trial_states, n1).reshape(-1)
    grads = p.sample_grad_batch(x, seeds)
    return grads.reshape(trials, n1, -1).mean(axis=1)


def hess_minibatch_trials(
    p: StochasticProblem,
    x: np.ndarray,
    n2: int,
    trials: int,
    stream: SeedStream,
) -> np.ndarray:
    """(trials, d, d) minibatch Hessian means; vectorized counterpart of
    repeated ``so_hessian`` calls (same seed layout)."""
    if not p.has_hess_oracle:
        raise CapabilityError(f"problem {p.name!r} exposes no Hessian oracle")
    x = np.asarray(x, dtype=np.float64)
    d = p.meta.dim
    out = np.empty((trials, d, d))
    for k in range(trials):
        seeds = stream.child("trial", k, "xih").seeds(n2)
        h = p.sample_hess_batch(x, seeds).mean(axis=0)
        out[k] = 0.5 * (h + h.T)
    return out
