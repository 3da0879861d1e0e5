"""Negative log-likelihood, gradient, and Hessian for the comparison model.

Both the edge form (one Bernoulli outcome per observed pair) and the
aggregated individual form (per-pair counts and win fractions) reduce to the
same weighted-pair representation, so a single set of routines serves both.
``grad`` and ``hessian`` differentiate the full perturbed objective
nll + (gamma/2)||theta||^2 + w.theta; ``nll`` is the likelihood term alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EdgeDataset, IndividualDataset, pair_count
from .links import LinkFunction

HESSIAN_DENSE_LIMIT = 2000


@dataclass(frozen=True)
class AggregatedCounts:
    """Per-pair comparison counts M and win fractions ybar, pairs with M > 0 only."""

    n: int
    i: np.ndarray
    j: np.ndarray
    M: np.ndarray
    ybar: np.ndarray

    def __post_init__(self):
        if not (len(self.i) == len(self.j) == len(self.M) == len(self.ybar)):
            raise ValueError("pair arrays must have equal length")
        if np.any(self.M <= 0):
            raise ValueError("pairs with zero count must be dropped")
        wins = self.M * self.ybar
        if not np.allclose(wins, np.round(wins), atol=1e-9):
            raise ValueError("M * ybar must be an integer win count")

    @property
    def total(self) -> float:
        return float(self.M.sum())


def aggregate(data: IndividualDataset) -> AggregatedCounts:
    """Collapse raw records to per-pair counts and win fractions."""
    key = data.i.astype(np.int64) * data.n + data.j
    uniq, inv = np.unique(key, return_inverse=True)
    M = np.bincount(inv, minlength=len(uniq)).astype(float)
    wins = np.bincount(inv, weights=data.y.astype(float), minlength=len(uniq))
    return AggregatedCounts(
        n=data.n,
        i=(uniq // data.n).astype(np.int64),
        j=(uniq % data.n).astype(np.int64),
        M=M,
        ybar=wins / M,
    )


@dataclass(frozen=True)
class ObjectiveSpec:
    """A perturbed ridge likelihood: data pairs, link, gamma, and noise vector w."""

    n: int
    i: np.ndarray
    j: np.ndarray
    M: np.ndarray
    ybar: np.ndarray
    link: LinkFunction
    gamma: float = 0.0
    w: np.ndarray | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.w is not None and self.w.shape != (self.n,):
            raise ValueError("w must have length n")

    @classmethod
    def from_edge(cls, data: EdgeDataset, link: LinkFunction,
                  gamma: float = 0.0, w: np.ndarray | None = None) -> "ObjectiveSpec":
        return cls(n=data.n, i=data.graph.i, j=data.graph.j,
                   M=np.ones(data.graph.n_edges), ybar=data.y.astype(float),
                   link=link, gamma=gamma, w=w)

    @classmethod
    def from_counts(cls, counts: AggregatedCounts, link: LinkFunction,
                    gamma: float = 0.0, w: np.ndarray | None = None) -> "ObjectiveSpec":
        return cls(n=counts.n, i=counts.i, j=counts.j, M=counts.M,
                   ybar=counts.ybar, link=link, gamma=gamma, w=w)

    @classmethod
    def from_individual(cls, data: IndividualDataset, link: LinkFunction,
                        gamma: float = 0.0, w: np.ndarray | None = None) -> "ObjectiveSpec":
        return cls.from_counts(aggregate(data), link, gamma=gamma, w=w)


def nll(theta: np.ndarray, spec: ObjectiveSpec) -> float:
    """Likelihood term only; ridge and perturbation excluded."""
    theta = np.asarray(theta, dtype=float)
    t = theta[spec.i] - theta[spec.j]
    # log(1 - F(t)) = log F(-t) by symmetry (A0); stable at large |t|
    terms = -spec.ybar * spec.link.log_eval(t) - (1.0 - spec.ybar) * spec.link.log_eval(-t)
    return float(np.dot(spec.M, terms))


def objective(theta: np.ndarray, spec: ObjectiveSpec) -> float:
    """nll + (gamma/2)||theta||^2 + w.theta."""
    theta = np.asarray(theta, dtype=float)
    val = nll(theta, spec) + 0.5 * spec.gamma * float(theta @ theta)
    if spec.w is not None:
        val += float(spec.w @ theta)
    return val


def grad(theta: np.ndarray, spec: ObjectiveSpec) -> np.ndarray:
    """Gradient of the full objective (ridge and perturbation included)."""
    theta = np.asarray(theta, dtype=float)
    t = theta[spec.i] - theta[spec.j]
    f = spec.link.eval(t)
    fm = spec.link.eval(-t)  # 1 - F(t) by (A0), stable at large t
    coef = spec.M * (f - spec.ybar) * spec.link.deriv(t) / (f * fm)
    g = np.bincount(spec.i, weights=coef, minlength=spec.n)
    g -= np.bincount(spec.j, weights=coef, minlength=spec.n)
    g += spec.gamma * theta
    if spec.w is not None:
        g += spec.w
    return g


def hessian(theta: np.ndarray, spec: ObjectiveSpec) -> np.ndarray:
    """Dense Hessian of the full objective; materialized only for small n."""
    if spec.n > HESSIAN_DENSE_LIMIT:
        raise ValueError(f"dense Hessian limited to n <= {HESSIAN_DENSE_LIMIT}")
    theta = np.asarray(theta, dtype=float)
    t = theta[spec.i] - theta[spec.j]
    # outcome-weighted curvature: ybar pulls in d^2(-log F)(t), the complement
    # in d^2(-log(1-F))(t) = d^2(-log F)(-t)
    c = spec.M * (spec.ybar * spec.link.neg_log_second(t)
                  + (1.0 - spec.ybar) * spec.link.neg_log_second(-t))
    H = np.zeros((spec.n, spec.n))
    np.add.at(H, (spec.i, spec.i), c)
    np.add.at(H, (spec.j, spec.j), c)
    np.subtract.at(H, (spec.i, spec.j), c)
    np.subtract.at(H, (spec.j, spec.i), c)
    H += spec.gamma * np.eye(spec.n)
    return H
