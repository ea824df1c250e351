import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import random_system
from oracles import outcome_average_error_sq, residual_law
from wkaczmarz.errors import AtSolution
from wkaczmarz.linsys import gen_gaussian, gen_gaussian_shifted, gram, normalize_system, residual
from wkaczmarz.sampling import Cyclic, MaxCorrection, NormWeighted, Uniform, Weighted
from wkaczmarz.solver import (
    ResidualStrategy,
    SolveConfig,
    expected_next_error_sq,
    init_state,
    iterate,
    solve,
    step,
)

GRAM = SolveConfig(residual_strategy="gram", refresh_every=10**9, refresh_ratio=0.0)
DIRECT = SolveConfig(residual_strategy="direct")


class TestInitState:
    def test_identity(self, identity2):
        s = init_state(identity2, [1, 1])
        np.testing.assert_array_equal(s.r, [1, 1])
        assert s.k == 0 and s.cyclic_cursor == 0

    def test_solved_start(self):
        s = gen_gaussian(8, 3, 0, solution=[1.0, -2.0, 0.5])
        assert np.max(np.abs(init_state(s, s.solution).r)) <= 1e-10

    def test_ones_start_on_shifted(self):
        s = gen_gaussian_shifted(10, 100.0, 1)
        st = init_state(s, np.ones(10))
        np.testing.assert_array_equal(st.x, 1.0)
        np.testing.assert_allclose(st.r, s.A.sum(axis=1), rtol=1e-15)

    def test_copies_start(self, identity2):
        x0 = np.array([1.0, 1.0])
        s = init_state(identity2, x0)
        x0[0] = 9
        assert s.x[0] == 1.0


class TestStep:
    def test_coordinate_projection(self, identity2):
        Q = gram(identity2)
        s = step(init_state(identity2, [1, 1]), 0, identity2, Q, GRAM)
        np.testing.assert_array_equal(s.x, [0, 1])
        np.testing.assert_array_equal(s.r, [0, 1])
        assert s.k == 1 and s.cyclic_cursor == 1

    @pytest.mark.parametrize("config", [GRAM, DIRECT], ids=["gram", "direct"])
    def test_three_row_projection(self, three_row, config):
        # lambda = 0 - <(1,1)/sqrt2, (1,1)> = -sqrt2
        s = step(init_state(three_row, [1, 1]), 2, three_row, gram(three_row), config)
        np.testing.assert_allclose(s.x, [0, 0], atol=1e-15)
        np.testing.assert_allclose(s.r, [0, 0, 0], atol=1e-15)

    def test_fixed_point(self, identity2):
        s0 = init_state(identity2, [0.0, 1.0])
        s1 = step(s0, 0, identity2, gram(identity2), GRAM)
        assert np.array_equal(s1.x, s0.x)

    def test_does_not_mutate(self, three_row):
        s0 = init_state(three_row, [1.0, 2.0])
        x, r = s0.x.copy(), s0.r.copy()
        step(s0, 1, three_row, gram(three_row), GRAM)
        assert np.array_equal(s0.x, x) and np.array_equal(s0.r, r) and s0.k == 0

    def test_gram_requires_q(self, identity2):
        with pytest.raises(ValueError):
            step(init_state(identity2, [1, 1]), 0, identity2, None, GRAM)

    def test_refresh_recomputes(self, three_row):
        cfg = SolveConfig(refresh_every=2)
        Q = gram(three_row)
        s = init_state(three_row, [1.0, 2.0])
        s = step(s, 0, three_row, Q, cfg)
        s = replace(s, r=s.r + 1.0)  # corrupt the cache
        s = step(s, 1, three_row, Q, cfg)
        np.testing.assert_allclose(s.r, residual(three_row, s.x), atol=1e-15)

    def test_ratio_refresh(self, identity2):
        cfg = SolveConfig(refresh_every=10**9, refresh_ratio=0.5)
        Q = gram(identity2)
        s = init_state(identity2, [1.0, 0.4])
        assert s.anchor == 1.0
        s = step(s, 0, identity2, Q, cfg)
        assert s.anchor == 0.4
        s = replace(s, r=s.r + 1e-3)
        s = step(s, 1, identity2, Q, cfg)  # 0.001 < 0.5 * 0.4 triggers a recompute
        np.testing.assert_array_equal(s.r, [0.0, 0.0])

    def test_projection_and_monotone_error(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            sys_ = random_system(rng)
            Q = gram(sys_)
            st = init_state(sys_, rng.standard_normal(sys_.n))
            for _ in range(10):
                i = int(rng.integers(sys_.m))
                new = step(st, i, sys_, Q, GRAM)
                assert abs(sys_.A[i] @ new.x - sys_.b[i]) <= 1e-12
                e_old = np.linalg.norm(st.x - sys_.solution)
                e_new = np.linalg.norm(new.x - sys_.solution)
                assert e_new <= e_old + 1e-12
                st = new


class TestSolve:
    def test_cyclic_identity_one_sweep(self):
        n = 6
        sys_ = normalize_system(np.eye(n), np.zeros(n), solution=np.zeros(n))
        trace = solve(sys_, np.ones(n), SolveConfig(rule=Cyclic(), max_iters=n), 0)
        assert [rec.chosen_row for rec in trace[1:]] == list(range(n))
        assert trace[-1].l2_error == 0.0
        # each step zeroes exactly one coordinate
        np.testing.assert_allclose([rec.l2_error for rec in trace], np.sqrt(np.arange(n, -1, -1)))

    def test_cyclic_wraps(self):
        sys_ = gen_gaussian(3, 2, 5)
        trace = solve(sys_, [1.0, 2.0], SolveConfig(rule=Cyclic(), max_iters=7), 0)
        assert [rec.chosen_row for rec in trace[1:]] == [0, 1, 2, 0, 1, 2, 0]

    def test_symmetric_two_outcome_average(self, identity2):
        p_vals = (0.5, 1, 2, 20)
        for p in p_vals:
            avg = outcome_average_error_sq(identity2.A, identity2.b, np.ones(2), np.zeros(2),
                                           residual_law([1.0, 1.0], p))
            assert avg == 1.0
            assert expected_next_error_sq(identity2, [1, 1], p) == 1.0

    def test_gaussian_weighted_converges_same_under_both_strategies(self):
        sys_ = gen_gaussian(10, 5, 3)
        x0 = np.ones(5)
        runs = {}
        for strat in ("gram", "direct"):
            cfg = SolveConfig(rule=Weighted(2), max_iters=500, residual_strategy=strat)
            runs[strat] = list(iterate(sys_, x0, cfg, rng_seed=17))
        assert [i for _, i in runs["gram"]] == [i for _, i in runs["direct"]]
        for (a, _), (b, _) in zip(runs["gram"], runs["direct"]):
            assert np.max(np.abs(a.x - b.x)) <= 1e-10
        final = runs["gram"][-1][0]
        assert np.max(np.abs(residual(sys_, final.x))) <= 1e-6

    def test_exact_hit_stops_at_zero_tol(self, three_row):
        # rows 0 then 1 land exactly on the solution; ||r||_inf <= 0 ends the run
        trace = solve(three_row, [1.0, 2.0], SolveConfig(rule=Cyclic(), max_iters=7), 0)
        assert [rec.k for rec in trace] == [0, 1, 2] and trace[-1].l2_error == 0.0

    def test_trace_schedule(self):
        sys_ = gen_gaussian(6, 3, 5)
        trace = solve(sys_, [1.0, 2.0, 3.0], SolveConfig(rule=Uniform(), max_iters=23, trace_every=5), 1)
        assert [rec.k for rec in trace] == [0, 5, 10, 15, 20, 23]
        assert trace[0].chosen_row is None and all(rec.chosen_row is not None for rec in trace[1:])

    def test_zero_iterations(self, three_row):
        trace = solve(three_row, [1.0, 2.0], SolveConfig(max_iters=0), 0)
        assert len(trace) == 1
        assert trace[0].l2_error == pytest.approx(math.sqrt(5))

    def test_stop_tol(self):
        sys_ = gen_gaussian(30, 10, 2)
        trace = solve(sys_, np.ones(10), SolveConfig(rule=Weighted(2), max_iters=10**5, stop_tol=1e-6,
                                                    trace_every=10**6), 0)
        assert trace[-1].k < 10**5
        assert trace[-1].linf_residual <= 1e-6 + 1e-9

    @pytest.mark.parametrize("rule", [Weighted(1), MaxCorrection()])
    def test_solution_reached_ends_cleanly(self, rule):
        sys_ = normalize_system(np.eye(3), np.zeros(3), solution=np.zeros(3))
        trace = solve(sys_, np.ones(3), SolveConfig(rule=rule, max_iters=100), 0)
        assert trace[-1].k == 3 and trace[-1].linf_residual == 0.0

    def test_no_solution_known(self):
        sys_ = normalize_system(np.eye(2), [1.0, 1.0])
        trace = solve(sys_, np.zeros(2), SolveConfig(max_iters=3), 0, v_min=np.array([1.0, 0.0]))
        assert all(rec.l2_error is None and rec.sv_alignment is None for rec in trace)

    def test_alignment_bounds(self):
        sys_ = gen_gaussian(40, 20, 1)
        v = np.linalg.svd(sys_.A)[2][-1]
        trace = solve(sys_, np.ones(20), SolveConfig(max_iters=300, trace_every=7), 2, v_min=v)
        assert all(0 <= rec.sv_alignment <= 1 + 1e-12 for rec in trace)

    def test_norm_weighted_is_uniform(self):
        sys_ = gen_gaussian(20, 5, 4)
        a = solve(sys_, np.ones(5), SolveConfig(rule=Uniform(), max_iters=200), 9)
        b = solve(sys_, np.ones(5), SolveConfig(rule=NormWeighted(), max_iters=200), 9)
        assert a == b

    def test_seed_determinism(self):
        sys_ = gen_gaussian(20, 5, 4)
        cfg = SolveConfig(rule=Weighted(2), max_iters=100)
        assert solve(sys_, np.ones(5), cfg, 3) == solve(sys_, np.ones(5), cfg, 3)
        assert solve(sys_, np.ones(5), cfg, 3) != solve(sys_, np.ones(5), cfg, 4)

    def test_cache_coherence_drift(self):
        sys_ = gen_gaussian(100, 50, 8)
        Q = gram(sys_)
        cfg = SolveConfig(rule=Uniform(), refresh_every=10**4, refresh_ratio=0.0)
        st = init_state(sys_, np.ones(50))
        rng = np.random.default_rng(0)
        for _ in range(10**4 - 1):
            st = step(st, int(rng.integers(100)), sys_, Q, cfg)
        assert np.max(np.abs(st.r - residual(sys_, st.x))) <= 1e-8


class TestSolveConfig:
    @pytest.mark.parametrize("kw", [dict(max_iters=-1), dict(trace_every=0), dict(refresh_every=0),
                                    dict(stop_tol=-1.0), dict(residual_strategy="sparse")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolveConfig(**kw)

    def test_strategy_from_string(self):
        assert SolveConfig(residual_strategy="direct").residual_strategy is ResidualStrategy.DIRECT


class TestExpectedNextError:
    def test_identity(self, identity2):
        assert expected_next_error_sq(identity2, [1, 1], 3.7) == 1.0

    def test_three_row(self, three_row):
        x = np.array([1.0, -1.0]) / math.sqrt(2)
        assert expected_next_error_sq(three_row, x, 2) == pytest.approx(0.5, abs=1e-15)

    def test_matches_outcome_enumeration(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            sys_ = random_system(rng)
            x = rng.standard_normal(sys_.n)
            p = float(rng.choice([0.5, 1, 2, 7, 20]))
            y = sys_.A @ (x - sys_.solution)
            brute = outcome_average_error_sq(sys_.A, sys_.b, x, sys_.solution, residual_law(y, p))
            got = expected_next_error_sq(sys_, x, p)
            assert got == pytest.approx(brute, rel=1e-11, abs=1e-14)

    def test_at_solution(self, three_row):
        with pytest.raises(AtSolution):
            expected_next_error_sq(three_row, [0.0, 0.0], 2)

    def test_needs_solution(self):
        with pytest.raises(ValueError):
            expected_next_error_sq(normalize_system(np.eye(2), [1, 1]), [0, 0], 2)
