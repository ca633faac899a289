"""Structural accuracy of an estimated graph against the ground truth.

Reversed edges count as false discoveries and contribute 1 to SHD.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .graph import Digraph


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp_extra: int
    fp_reverse: int
    fn: int

    @property
    def n_est(self) -> int:
        return self.tp + self.fp_extra + self.fp_reverse

    @property
    def n_true(self) -> int:
        return self.tp + self.fn + self.fp_reverse


def confusion(est: Digraph, truth: Digraph) -> Confusion:
    if est.n != truth.n:
        raise ValueError(f"node count mismatch: {est.n} vs {truth.n}")
    tp = fp_extra = fp_reverse = 0
    for u, v in est.edges:
        if (u, v) in truth.edges:
            tp += 1
        elif (v, u) in truth.edges:
            fp_reverse += 1
        else:
            fp_extra += 1
    fn = sum(1 for u, v in truth.edges if (u, v) not in est.edges and (v, u) not in est.edges)
    return Confusion(tp, fp_extra, fp_reverse, fn)


def fdr(c: Confusion) -> float:
    return (c.fp_extra + c.fp_reverse) / max(1, c.n_est)


def precision(c: Confusion) -> float:
    return c.tp / max(1, c.n_est)


def tpr(c: Confusion) -> float:
    return c.tp / max(1, c.n_true)


recall = tpr


def f1(c: Confusion) -> float:
    P, R = precision(c), recall(c)
    return 0.0 if P + R == 0 else 2 * P * R / (P + R)


def shd(c: Confusion) -> int:
    return c.fp_extra + c.fn + c.fp_reverse


def evaluate(est: Digraph, truth: Digraph) -> dict:
    """Metric report with the raw confusion counts."""
    c = confusion(est, truth)
    return {"fdr": fdr(c), "tpr": tpr(c), "shd": shd(c), "f1": f1(c),
            "precision": precision(c), "recall": recall(c), **asdict(c)}
