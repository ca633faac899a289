"""Closed-form error bounds for weighted voting, plus Monte Carlo checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .validation import check_positive, check_probability, check_threshold


class Verdict(enum.Enum):
    """Sentinels returned when a bound does not apply."""

    NOT_APPLICABLE = "not-applicable"
    INFEASIBLE = "infeasible"
    EMPTY = "empty"

    def __repr__(self):
        return f"Verdict.{self.name}"


NOT_APPLICABLE = Verdict.NOT_APPLICABLE
INFEASIBLE = Verdict.INFEASIBLE
EMPTY = Verdict.EMPTY

_RANGE_RTOL = 1e-12


@dataclass(frozen=True)
class VoteModel:
    m: int
    p: float
    t: float
    lam: float
    epsilon: float = 0.05
    q: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("m must be a positive integer")
        check_probability(self.p, "p")
        check_probability(self.q, "q", upper_open=True)
        check_threshold(self.t)
        check_positive(self.lam, "lam")
        check_probability(self.epsilon, "epsilon", lower_open=True, upper_open=True)
        if self.q >= self.p and self.q > 0:
            raise ValueError("need p > q")


@dataclass(frozen=True)
class ErrorBudget:
    """Edge counts and margins entering the union bounds."""

    n_fn: float
    n_fp: float
    delta_p: float = float("nan")
    delta_q: float = float("nan")
    C: float = float("nan")

    @classmethod
    def from_graph(cls, n: int, n_true: float, **kw) -> "ErrorBudget":
        return cls(n_true, n * (n - 1) / 2 - n_true, **kw)


@dataclass(frozen=True)
class BoundTerms:
    fn_term: float
    fp_term: float
    residual: float

    @property
    def total(self) -> float:
        return self.fn_term + self.fp_term + self.residual

    def to_dict(self) -> dict:
        return {"fn_term": self.fn_term, "fp_term": self.fp_term,
                "residual": self.residual, "total": self.total}


def effective_threshold(t: float, lam: float, m: float) -> float:
    """``t / (1 - exp(-lam m))``: the raw vote fraction an edge must reach."""
    return t / -math.expm1(-lam * m)


def sufficient_condition_lhs(m: float, p: float, t: float, lam: float) -> float:
    return m * p / 2 * (1 - effective_threshold(t, lam, m) / p) ** 2


def check_sufficient_condition(model: VoteModel):
    """Chernoff-based condition for ``P(score >= t) >= 1 - epsilon``.

    Returns ``(holds, slack)`` with ``slack = LHS - log(1/epsilon)``, or
    ``NOT_APPLICABLE`` when the effective threshold is at least ``p``.
    """
    r = effective_threshold(model.t, model.lam, model.m)
    if r >= model.p:
        return NOT_APPLICABLE
    slack = sufficient_condition_lhs(model.m, model.p, model.t, model.lam) - math.log(1 / model.epsilon)
    return slack >= 0, slack


def min_votes_bound(p: float, t: float, lam: float, epsilon: float) -> Union[int, Verdict]:
    """Explicit lower bound on the vote count, or ``INFEASIBLE``."""
    if not p > t:
        raise ValueError("min_votes_bound needs p > t")
    check_positive(lam, "lam")
    check_probability(epsilon, "epsilon", lower_open=True, upper_open=True)
    theta = t / p
    gamma = 1 - theta
    K = gamma * gamma - 2 * theta * gamma * math.exp(-lam)
    if K <= 0:
        return INFEASIBLE
    return math.ceil(2 * math.log(1 / epsilon) / (p * K))


def lambda_range(m: float, t: float, epsilon: float):
    """``(lam_min, lam_max]`` keeping the effective threshold below 1 and ``e^{-lam m} >= epsilon``."""
    check_threshold(t)
    check_probability(epsilon, "epsilon", lower_open=True, upper_open=True)
    if m < 1:
        raise ValueError("m must be at least 1")
    lo = -math.log1p(-t) / m
    hi = -math.log(epsilon) / m
    # relative slack so that epsilon = 1 - t collapses despite rounding
    if lo >= hi * (1 - _RANGE_RTOL):
        return EMPTY
    return lo, hi


def _edge_term(m: float, margin: float) -> float:
    return math.exp(-2 * m * margin * margin) if margin > 0 else 1.0


def structure_error_bound(true_ms: Iterable[float], false_ms: Iterable[float], p: float,
                          q: float, t: float, lam: float, naive: bool = False) -> float:
    """Hoeffding union bound over true edges and false pairs.

    With ``naive`` the raw fraction is compared to ``t`` directly. A term
    whose margin is not positive is vacuous and contributes 1.
    """
    def r(m):
        return t if naive else effective_threshold(t, lam, m)

    fn = sum(_edge_term(m, p - r(m)) for m in true_ms)
    fp = sum(_edge_term(m, r(m) - q) for m in false_ms)
    return fn + fp


def worst_case_bound(n: int, h: float, m_min: float, p: float, q: float, t: float,
                     lam: float) -> float:
    """Union bound with every pair at ``m_min`` votes and ``n h / 2`` true edges."""
    budget = ErrorBudget.from_graph(n, n * h / 2)
    r = effective_threshold(t, lam, m_min)
    fn = budget.n_fn * _edge_term(m_min, p - r) if budget.n_fn else 0.0
    fp = budget.n_fp * _edge_term(m_min, r - q) if budget.n_fp else 0.0
    return fn + fp


def _check_margins(delta_p, delta_q):
    for name, d in (("delta_p", delta_p), ("delta_q", delta_q)):
        if not 0 < d < 1:
            raise ValueError(f"{name} must lie in (0, 1), got {d}")


def consistency_constant(delta_p: float, delta_q: float) -> float:
    """``2 / min(delta_p^2, delta_q^2)``; ``m = C log n`` votes per pair suffice above it."""
    _check_margins(delta_p, delta_q)
    return 2 / min(delta_p ** 2, delta_q ** 2)


def consistency_constant_proof(delta_p: float, delta_q: float) -> float:
    """``max(1 / (2 delta_p^2), 1 / delta_q^2)``, the requirement the union-bound argument uses."""
    _check_margins(delta_p, delta_q)
    return max(1 / (2 * delta_p ** 2), 1 / delta_q ** 2)


def monte_carlo_accept_rate(model: VoteModel, trials: int, seed: int) -> float:
    """Fraction of ``A ~ Binomial(m, p)`` draws whose weighted score reaches ``t``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    A = rng.binomial(model.m, model.p, size=trials)
    score = -math.expm1(-model.lam * model.m) * A / model.m
    return float(np.mean(score >= model.t))


def er_sf_bound(family: str, n: int, h: float, p: float, q: float, t: float, lam: float,
                alpha_tail: float = 2.5, c_alpha: float = 1.0, delta_p: float = None,
                delta_q: float = None) -> BoundTerms:
    """Random-graph error bound with margins taken at two votes per pair.

    ER: ``(nh/2) e^{-4 dp^2} + ((n(n-1) - nh)/2) e^{-4 dq^2}``, residual
    ``theta^2 = (h/(n-1))^2`` (its constant is unknown). SF adds
    ``(n(n-1)/2) c_alpha n^{-(alpha-2)}`` as the residual.
    """
    family = family.upper()
    if family not in ("ER", "SF"):
        raise ValueError("family must be 'ER' or 'SF'")
    r2 = effective_threshold(t, lam, 2)
    dp = p - r2 if delta_p is None else delta_p
    dq = r2 - q if delta_q is None else delta_q
    fn = n * h / 2 * math.exp(-4 * dp * dp)
    fp = (n * (n - 1) - n * h) / 2 * math.exp(-4 * dq * dq)
    if family == "ER":
        residual = (h / (n - 1)) ** 2
    else:
        if not 2 < alpha_tail < 3:
            raise ValueError("alpha_tail must lie in (2, 3)")
        residual = n * (n - 1) / 2 * c_alpha * n ** (-(alpha_tail - 2))
    return BoundTerms(fn, fp, residual)


def simulate_global_error(n: int, m: int, p: float, q: float, t: float, lam: float,
                          seed: int, h: float = 3.0) -> float:
    """Empirical pair misclassification rate under independent binomial votes.

    A random ER-``h`` DAG fixes the true pairs; every pair receives ``m``
    votes, true ones with support ``p`` and false ones with ``q``.
    """
    from .synth import gen_er_dag

    rng = np.random.default_rng(seed)
    g = gen_er_dag(n, min(h, n - 1), int(rng.integers(2**31)))
    iu, ju = np.triu_indices(n, 1)
    true = np.zeros((n, n), bool)
    for u, v in g.edges:
        true[u, v] = true[v, u] = True
    is_true = true[iu, ju]
    support = np.where(is_true, p, q)
    A = rng.binomial(m, support)
    accepted = -math.expm1(-lam * m) * A / m >= t
    return float(np.mean(accepted != is_true))
