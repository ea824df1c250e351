"""Row-selection rules and the residual-weighted sampling law.

Under ``Weighted(p)`` row ``i`` is drawn with probability
``|r_i|^p / sum_j |r_j|^p`` where ``r = A x - b``. Powers are taken of
``|r_i| / ||r||_inf`` so that very large ``p`` neither overflows nor loses
the maximal entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import RuleNotStochastic, SolutionReached

SOLVED_THRESHOLD = 1e-14


@dataclass(frozen=True)
class Cyclic:
    label = "cyclic"


@dataclass(frozen=True)
class Uniform:
    label = "uniform"


@dataclass(frozen=True)
class NormWeighted:
    """Probability proportional to ``||a_i||^2``; uniform once rows are unit norm."""

    label = "norm"


@dataclass(frozen=True)
class Weighted:
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not (math.isfinite(p) and p > 0):
            raise ValueError(f"Weighted rule needs 0 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def label(self) -> str:
        return f"p:{self.p:g}"


@dataclass(frozen=True)
class MaxCorrection:
    label = "max"


SelectionRule = Union[Cyclic, Uniform, NormWeighted, Weighted, MaxCorrection]

_NAMED = {"cyclic": Cyclic, "uniform": Uniform, "norm": NormWeighted, "max": MaxCorrection}


def parse_rule(token: str) -> SelectionRule:
    """Parse ``uniform``, ``cyclic``, ``norm``, ``max`` or ``p:<value>``."""
    token = token.strip().lower()
    if token in _NAMED:
        return _NAMED[token]()
    if token.startswith("p:"):
        try:
            return Weighted(float(token[2:]))
        except ValueError as exc:
            raise ValueError(f"bad weighted rule {token!r}: {exc}") from None
    raise ValueError(f"unknown selection rule {token!r}")


@dataclass(frozen=True)
class WeightProfile:
    """Selection probabilities ``q`` and their running sums ``c``."""

    q: np.ndarray
    c: np.ndarray

    @classmethod
    def from_probabilities(cls, q) -> "WeightProfile":
        q = np.asarray(q, dtype=np.float64)
        return cls(q, np.cumsum(q))


def _scaled_powers(r: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(r)
    return (a / a.max()) ** p


def weights(r, rule: SelectionRule) -> WeightProfile:
    """Selection probabilities for residual ``r`` under ``rule``.

    Raises
    ------
    SolutionReached
        ``||r||_inf <= 1e-14`` under ``Weighted`` or ``MaxCorrection``.
    RuleNotStochastic
        For ``Cyclic``, which is driven by the solver's cursor.
    """
    r = np.asarray(r, dtype=np.float64)
    m = r.size
    if isinstance(rule, (Uniform, NormWeighted)):
        return WeightProfile.from_probabilities(np.full(m, 1.0 / m))
    if isinstance(rule, Cyclic):
        raise RuleNotStochastic("the cyclic rule has no sampling law")
    if not isinstance(rule, (Weighted, MaxCorrection)):
        raise TypeError(f"not a selection rule: {rule!r}")
    rmax = np.max(np.abs(r))
    if rmax <= SOLVED_THRESHOLD:
        raise SolutionReached(f"||r||_inf = {rmax:.3g}")
    if isinstance(rule, MaxCorrection):
        q = np.zeros(m)
        q[int(np.argmax(np.abs(r)))] = 1.0
        return WeightProfile.from_probabilities(q)
    w = _scaled_powers(r, rule.p)
    return WeightProfile.from_probabilities(w / w.sum())


def sample_index(profile: WeightProfile, u):
    """Inverse-CDF draw: the smallest ``i`` with ``c[i] > u``.

    ``u`` may be a scalar or an array of uniforms on ``[0, 1)``. When rounding
    leaves ``c[-1]`` slightly below ``u`` the last row with positive mass is
    returned.
    """
    c = profile.c
    idx = np.searchsorted(c, u, side="right")
    last = int(np.flatnonzero(profile.q > 0)[-1])
    idx = np.minimum(idx, last)
    return int(idx) if np.ndim(idx) == 0 else idx


def effective_argmax_mass(r, p: float) -> float:
    """Probability that ``Weighted(p)`` picks a row attaining ``||r||_inf``."""
    r = np.asarray(r, dtype=np.float64)
    a = np.abs(r)
    if not a.max() > 0:
        raise ValueError("residual must be nonzero")
    w = _scaled_powers(r, p)
    return float(w[a == a.max()].sum() / w.sum())


def power_ratio(y, p: float) -> float:
    """``||y||_{p+2}^{p+2} / ||y||_p^p`` evaluated without overflow.

    Equals ``sum_i q_i y_i^2`` with ``q`` the ``Weighted(p)`` law of ``y``.
    """
    a = np.abs(np.asarray(y, dtype=np.float64))
    s = a.max()
    if not s > 0:
        raise ValueError("vector must be nonzero")
    t = a / s
    tp = t ** p
    return float(s * s * np.dot(tp, t * t) / tp.sum())
