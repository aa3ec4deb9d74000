"""Loss terms and self-balancing loss weights.

Four mean-squared terms enter the total: near-source residual (r0), far
residual (r1), initial condition (ic, absent for steady problems), boundary
condition (bc). In "uncertainty" mode each term i carries a trainable weight
w_i through

    total = sum_i [ L_i / (2 (eps^2 + w_i^2)) + log(eps^2 + w_i^2) ]

whose per-term optimum is sigma_i^2 = eps^2 + w_i^2 = max(eps^2, L_i / 2):
the floor eps bounds the effective weight 1/(2 sigma^2) from above so small
residual terms cannot blow up. "fixed" mode is a plain weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import Var
from .errors import ConfigError

__all__ = [
    "TERM_ORDER",
    "LossTerms",
    "WeightingConfig",
    "compute_terms",
    "uncertainty_total",
    "fixed_total",
    "init_weights",
    "sigma_values",
]

TERM_ORDER = ("r0", "r1", "ic", "bc")

WEIGHTING_MODES = ("fixed", "uncertainty")


@dataclass(frozen=True)
class WeightingConfig:
    """How loss terms combine: trainable uncertainty weights or fixed lambdas.

    fixed_lambdas=None in fixed mode means all ones (plain sum).
    """

    mode: str = "uncertainty"
    epsilon: float = 0.01
    fixed_lambdas: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in WEIGHTING_MODES:
            raise ConfigError(
                f"weighting mode must be one of {WEIGHTING_MODES}, got {self.mode!r}"
            )
        if self.epsilon < 0:
            raise ConfigError(f"weighting epsilon must be >= 0, got {self.epsilon}")
        if self.fixed_lambdas is not None:
            object.__setattr__(
                self, "fixed_lambdas", tuple(float(l) for l in self.fixed_lambdas)
            )


@dataclass
class LossTerms:
    r0: Var
    r1: Var
    ic: Var | None
    bc: Var

    def active(self) -> list[tuple[str, Var]]:
        """Present terms in canonical order."""
        out = []
        for name in TERM_ORDER:
            term = getattr(self, name)
            if term is not None:
                out.append((name, term))
        return out

    def values(self) -> dict[str, float]:
        return {name: float(term.data) for name, term in self.active()}


def _mean_sum_of_squares(residuals: list) -> Var:
    total = engine.square(residuals[0])
    for r in residuals[1:]:
        total = total + engine.square(r)
    return engine.mean(total)


def compute_terms(net, problem, batch, alpha: float, param_vars=None) -> LossTerms:
    """Mean squared residuals of one sampled batch.

    Residuals across a problem's equations are summed per point before the
    batch mean; boundary faces are pooled into a single mean over all
    boundary points.
    """
    b0 = net.derivatives(batch.interior0, order=problem.residual_order, param_vars=param_vars)
    r0 = _mean_sum_of_squares(problem.residuals(b0, batch.interior0, alpha))
    b1 = net.derivatives(batch.interior1, order=problem.residual_order, param_vars=param_vars)
    r1 = _mean_sum_of_squares(problem.residuals(b1, batch.interior1, alpha))

    bc_sum = None
    n_bc = 0
    for face, pts in batch.boundary:
        if pts.shape[0] == 0:
            continue
        bundle = net.derivatives(pts, order=problem.bc_order, param_vars=param_vars)
        res = problem.bc_residuals(face, bundle, pts)
        ssq = engine.square(res[0])
        for r in res[1:]:
            ssq = ssq + engine.square(r)
        face_sum = engine.sum_(ssq)
        bc_sum = face_sum if bc_sum is None else bc_sum + face_sum
        n_bc += pts.shape[0]
    bc = bc_sum * (1.0 / n_bc)

    ic = None
    if batch.initial is not None:
        bundle = net.derivatives(batch.initial, order=0, param_vars=param_vars)
        ic = _mean_sum_of_squares(problem.ic_residuals(bundle, batch.initial))
    return LossTerms(r0=r0, r1=r1, ic=ic, bc=bc)


def init_weights(num_terms: int) -> np.ndarray:
    """Trainable weights start at one."""
    return np.ones(num_terms)


def sigma_values(weights: np.ndarray, eps: float) -> np.ndarray:
    """Effective per-term sigma_i = sqrt(eps^2 + w_i^2), for logging."""
    return np.sqrt(eps * eps + np.asarray(weights) ** 2)


def uncertainty_total(terms: LossTerms, weights: Var, eps: float) -> Var:
    """Self-balancing total; gradients flow to both params and weights."""
    active = terms.active()
    if weights.data.size != len(active):
        raise ValueError(
            f"{weights.data.size} weights for {len(active)} active loss terms"
        )
    eps2 = eps * eps
    total = None
    for idx, (_, term) in enumerate(active):
        wi = engine.take(weights, (idx,))
        s2 = engine.square(wi) + eps2
        contrib = term / (2.0 * s2) + engine.log(s2)
        total = contrib if total is None else total + contrib
    return total


def fixed_total(terms: LossTerms, lambdas) -> Var:
    """Plain weighted sum; with unit weights this is the unweighted total."""
    active = terms.active()
    lams = list(lambdas)
    if len(lams) != len(active):
        raise ValueError(f"{len(lams)} lambdas for {len(active)} active loss terms")
    total = None
    for lam, (_, term) in zip(lams, active):
        contrib = term * float(lam)
        total = contrib if total is None else total + contrib
    return total
