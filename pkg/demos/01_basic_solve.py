"""
Solving a small system with weighted row sampling
==================================================

Build a consistent system, run the uniform and residual-weighted rules from the
same start, and watch the error shrink.
"""

import numpy as np

from wkaczmarz import SolveConfig, Uniform, Weighted, gen_gaussian, solve

# 300 equations, 100 unknowns; b = A x* with a random x*
x_star = np.random.default_rng(1).standard_normal(100)
system = gen_gaussian(300, 100, seed=0, solution=x_star)
x0 = np.zeros(100)

###############################################################################
# Uniform sampling ignores the residual. Weighted(p) favours rows whose
# equation is most violated; larger p is greedier.

for rule in (Uniform(), Weighted(1), Weighted(2), Weighted(20)):
    trace = solve(system, x0, SolveConfig(rule=rule, max_iters=3000, trace_every=1000), rng_seed=4)
    errs = "  ".join(f"{rec.l2_error:9.2e}" for rec in trace)
    print(f"{rule.label:>8}: {errs}")

###############################################################################
# The iterate itself is plain numpy.

from wkaczmarz import iterate

for state, row in iterate(system, x0, SolveConfig(rule=Weighted(2), max_iters=5), rng_seed=0):
    print(f"k={state.k} row={row} max|r|={np.abs(state.r).max():.3e}")
