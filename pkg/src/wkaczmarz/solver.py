"""Kaczmarz iteration engine with a Gram-cached residual."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import AtSolution, SelfCheckFailed, SolutionReached
from .linsys import NormalizedSystem, gram, residual
from .sampling import (
    SOLVED_THRESHOLD,
    Cyclic,
    SelectionRule,
    Uniform,
    Weighted,
    power_ratio,
    sample_index,
    weights,
)


class ResidualStrategy(enum.Enum):
    GRAM = "gram"
    DIRECT = "direct"


@dataclass
class SolverState:
    x: np.ndarray
    r: np.ndarray  # cached A x - b
    k: int = 0
    cyclic_cursor: int = 0
    # ||r||_inf at the last exact evaluation of A x - b
    anchor: float = np.inf


@dataclass(frozen=True)
class SolveConfig:
    rule: SelectionRule = field(default_factory=Uniform)
    max_iters: int = 1000
    stop_tol: float = 0.0
    trace_every: int = 1
    residual_strategy: ResidualStrategy = ResidualStrategy.GRAM
    refresh_every: int = 1000
    refresh_ratio: float = 1e-3

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.trace_every < 1 or self.refresh_every < 1:
            raise ValueError("trace_every and refresh_every must be >= 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be >= 0")
        if not 0 <= self.refresh_ratio < 1:
            raise ValueError("refresh_ratio must lie in [0, 1)")
        object.__setattr__(self, "residual_strategy", ResidualStrategy(self.residual_strategy))


@dataclass(frozen=True)
class TraceRecord:
    k: int
    linf_residual: float
    l2_error: float | None = None
    sv_alignment: float | None = None
    chosen_row: int | None = None


def init_state(system: NormalizedSystem, x0) -> SolverState:
    x0 = np.array(x0, dtype=np.float64)
    r = residual(system, x0)
    return SolverState(x=x0, r=r, k=0, cyclic_cursor=0, anchor=float(np.max(np.abs(r))))


def step(state: SolverState, i: int, system: NormalizedSystem, Q=None,
         config: SolveConfig | None = None) -> SolverState:
    """Project ``state.x`` onto the hyperplane of equation ``i``.

    Under GRAM the residual is advanced with row ``i`` of ``Q`` and recomputed
    exactly every ``refresh_every`` steps, or sooner once ``||r||_inf`` has
    fallen below ``refresh_ratio`` times its value at the last exact
    evaluation. The update's rounding error is absolute, so without the second
    trigger it would swamp residuals approaching machine precision. Under
    DIRECT the residual is recomputed every step. The input state is left
    untouched.
    """
    config = config or SolveConfig()
    a_i = system.A[i]
    lam = system.b[i] - a_i @ state.x
    x = state.x + lam * a_i
    k = state.k + 1
    anchor = state.anchor
    if config.residual_strategy is ResidualStrategy.DIRECT:
        r = residual(system, x)
    else:
        if Q is None:
            raise ValueError("GRAM residual strategy requires the Gram matrix")
        r = None
        if k % config.refresh_every:
            r = state.r + lam * Q[i]
            if np.max(np.abs(r)) < config.refresh_ratio * anchor:
                r = None
        if r is None:
            r = residual(system, x)
            anchor = float(np.max(np.abs(r)))
    return SolverState(x=x, r=r, k=k, cyclic_cursor=(i + 1) % system.m, anchor=anchor)


def _record(system, state, chosen, v_min):
    r = residual(system, state.x)
    l2 = align = None
    if system.solution is not None:
        e = state.x - system.solution
        l2 = float(np.linalg.norm(e))
        if v_min is not None:
            align = float(abs(e @ v_min) / l2) if l2 > 0 else 0.0
    return TraceRecord(k=state.k, linf_residual=float(np.max(np.abs(r))),
                       l2_error=l2, sv_alignment=align, chosen_row=chosen)


def iterate(system: NormalizedSystem, x0, config: SolveConfig, rng_seed: int = 0, Q=None):
    """Yield ``(state, row)`` after every step until the run terminates.

    The run ends after ``max_iters`` steps, once the cached residual satisfies
    ``||r||_inf <= stop_tol``, or when a residual-driven rule finds nothing
    left to correct. The initial state is not yielded.
    """
    if config.residual_strategy is ResidualStrategy.GRAM and Q is None:
        Q = gram(system)
    rng = np.random.default_rng(rng_seed)
    state = init_state(system, x0)
    rule = config.rule
    while state.k < config.max_iters:
        if np.max(np.abs(state.r)) <= config.stop_tol:
            return
        if isinstance(rule, Cyclic):
            i = state.cyclic_cursor
        else:
            try:
                profile = weights(state.r, rule)
            except SolutionReached:
                return
            i = sample_index(profile, rng.random())
        state = step(state, i, system, Q, config)
        yield state, i


def solve(system: NormalizedSystem, x0, config: SolveConfig, rng_seed: int = 0,
          v_min=None, Q=None) -> list[TraceRecord]:
    """Run the iteration and return its trace.

    A record is taken at ``k = 0``, whenever ``k`` is a multiple of
    ``trace_every`` and at termination. ``Q`` may be passed to share one
    Gram matrix across runs.
    """
    state = init_state(system, x0)
    trace = [_record(system, state, None, v_min)]
    chosen = None
    for state, chosen in iterate(system, x0, config, rng_seed, Q):
        if state.k % config.trace_every == 0:
            trace.append(_record(system, state, chosen, v_min))
    if trace[-1].k != state.k:
        trace.append(_record(system, state, chosen, v_min))
    return trace


def expected_next_error_sq(system: NormalizedSystem, x, p: float) -> float:
    """Exact ``E ||x_{k+1} - x*||^2`` for one ``Weighted(p)`` step from ``x``.

    Evaluated as the average over all ``m`` outcomes and cross-checked against
    ``||e||^2 - ||Ae||_{p+2}^{p+2} / ||Ae||_p^p``.
    """
    if system.solution is None:
        raise ValueError("system has no stored solution")
    e = np.asarray(x, dtype=np.float64) - system.solution
    y = system.A @ e
    if np.max(np.abs(y)) <= SOLVED_THRESHOLD:
        raise AtSolution("x is (numerically) the solution")
    q = weights(y, Weighted(p)).q
    e2 = float(e @ e)
    gain = float(q @ (y * y))
    ratio = power_ratio(y, p)
    if abs(gain - ratio) > 1e-10 * ratio:
        raise SelfCheckFailed(f"outcome average {gain!r} != norm ratio {ratio!r}")
    return e2 - gain


__all__ = [
    "ResidualStrategy", "SolverState", "SolveConfig", "TraceRecord", "init_state",
    "step", "iterate", "solve", "expected_next_error_sq",
]
