import numpy as np
import pytest

from bistro.environments import Environment, FixedTableCosts
from bistro.erm import BoxRelaxedOracle, ErmOracle, ExactErmOracle, RegularizedErmOracle
from bistro.erm import PairwiseDisagreement, exact_erm_value
from bistro.policies import PolicyClass, SparseCostVector
from bistro.runner import run_episode
from bistro.strategies import (
    BistroConfig,
    BistroState,
    BistroStrategy,
    PlayoutDraw,
    assemble_query_matrix,
)
from bistro.waterfill import minimax_value, waterfill


class RecordingOracle(ErmOracle):
    """Pass-through wrapper keeping copies of every query."""

    def __init__(self, inner):
        super().__init__()
        self.inner = inner
        self.policy_class = getattr(inner, "policy_class", None)
        self.queries = []

    def _value(self, contexts, Y):
        value = self.inner(contexts, Y)
        self.queries.append((np.array(contexts, copy=True), Y.copy(), value))
        return value


def make_strategy(pc, gamma=0.25, n=4, oracle=None, **cfg_kwargs):
    cfg = BistroConfig(horizon=n, gamma=gamma, **cfg_kwargs)
    return BistroStrategy(pc, oracle or ExactErmOracle(pc), cfg)


class TestAssembleQueryMatrix:
    def test_first_round_with_future(self):
        state = BistroState(d=2, horizon=2)
        draw = PlayoutDraw(np.array([0]), np.array([[1.0], [-1.0]]))
        Y = assemble_query_matrix(state, 0, draw, 0, BistroConfig(horizon=2, gamma=0.25))
        np.testing.assert_array_equal(Y, [[1.0, 2.0], [0.0, -2.0]])

    def test_last_round_no_future(self):
        state = BistroState(d=2, horizon=2)
        state.append(0, SparseCostVector(2, 0, 4.0), gamma=0.25)
        draw = PlayoutDraw(np.array([], dtype=int), np.empty((2, 0)))
        Y = assemble_query_matrix(state, 1, draw, 1, BistroConfig(horizon=2, gamma=0.25))
        np.testing.assert_array_equal(Y, [[1.0, 0.0], [0.0, 1.0]])

    def test_past_column_is_gamma_scaled(self):
        # cost 1 observed at probability 0.25 -> estimate 4, scaled back to 1
        state = BistroState(d=2, horizon=3)
        state.append(0, SparseCostVector(2, 0, 4.0), gamma=0.25)
        draw = PlayoutDraw(np.array([1]), np.array([[1.0], [1.0]]))
        Y = assemble_query_matrix(state, 1, draw, 0, BistroConfig(horizon=3, gamma=0.25))
        np.testing.assert_array_equal(Y[:, 0], [1.0, 0.0])

    def test_inconsistent_draw_length(self):
        state = BistroState(d=2, horizon=3)
        draw = PlayoutDraw(np.array([0]), np.array([[1.0], [1.0]]))
        with pytest.raises(ValueError):
            assemble_query_matrix(state, 0, draw, 0, BistroConfig(horizon=3, gamma=0.25))


class TestBistroRound:
    def test_two_policy_single_round_uniform(self):
        pc = PolicyClass(np.array([[0], [1]]), 2)
        for gamma in (0.1, 0.25, 0.5):
            strat = make_strategy(pc, gamma=gamma, n=1)
            strat.begin_episode(1, np.random.SeedSequence(0), pool=np.zeros(4, dtype=int))
            np.testing.assert_allclose(strat.choose(0), [0.5, 0.5], atol=1e-12)

    def test_singleton_class_concentrates(self):
        pc = PolicyClass(np.array([[0]]), 2)
        strat = make_strategy(pc, gamma=0.1, n=1)
        strat.begin_episode(1, np.random.SeedSequence(0), pool=np.zeros(4, dtype=int))
        np.testing.assert_allclose(strat.choose(0), [0.9, 0.1], atol=1e-12)

    def test_oracle_call_accounting(self):
        rng = np.random.default_rng(31)
        pc = PolicyClass(rng.integers(0, 3, (5, 4)), 3)
        n = 6
        for playouts in (1, 3):
            strat = make_strategy(pc, gamma=0.2, n=n, playouts_per_round=playouts)
            env = Environment(np.ones(4) / 4, FixedTableCosts(rng.uniform(0, 1, (n, 3))))
            run_episode(strat, env, n, seed=0)
            assert strat.oracle_calls == 3 * playouts * n

    def test_emitted_distributions_valid(self):
        rng = np.random.default_rng(32)
        pc = PolicyClass(rng.integers(0, 2, (6, 4)), 2)
        n, gamma = 12, 0.3
        strat = make_strategy(pc, gamma=gamma, n=n)
        env = Environment(np.ones(4) / 4, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        tr = run_episode(strat, env, n, seed=3)
        assert tr.distributions.min() >= gamma - 1e-12
        np.testing.assert_allclose(tr.distributions.sum(axis=1), 1.0, atol=1e-12)

    def test_determinism(self):
        rng = np.random.default_rng(33)
        pc = PolicyClass(rng.integers(0, 2, (4, 3)), 2)
        n = 8
        env = Environment(np.ones(3) / 3, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        runs = []
        for _ in range(2):
            strat = make_strategy(pc, gamma=0.25, n=n, playouts_per_round=2)
            runs.append(run_episode(strat, env, n, seed=11))
        assert np.array_equal(runs[0].distributions, runs[1].distributions)
        assert np.array_equal(runs[0].actions, runs[1].actions)
        assert np.array_equal(runs[0].observed_costs, runs[1].observed_costs)

    def test_transductive_equals_pool_on_singleton_universe(self):
        rng = np.random.default_rng(34)
        pc = PolicyClass(rng.integers(0, 2, (3, 1)), 2)
        n = 6
        env = Environment(np.ones(1), FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        tr_pool = run_episode(make_strategy(pc, n=n, mode="iid_pool"), env, n, seed=5)
        tr_trans = run_episode(make_strategy(pc, n=n, mode="transductive"), env, n, seed=5)
        assert np.array_equal(tr_pool.distributions, tr_trans.distributions)
        assert np.array_equal(tr_pool.actions, tr_trans.actions)

    def test_transductive_requires_futures(self):
        pc = PolicyClass(np.array([[0]]), 2)
        strat = make_strategy(pc, n=3, mode="transductive")
        with pytest.raises(ValueError):
            strat.begin_episode(3, np.random.SeedSequence(0), pool=np.zeros(3, dtype=int))

    def test_estimate_magnitude_guard(self):
        pc = PolicyClass(np.array([[0]]), 2)
        strat = make_strategy(pc, gamma=0.25, n=1)
        strat.begin_episode(1, np.random.SeedSequence(0), pool=np.zeros(2, dtype=int))
        q = strat.choose(0)
        with pytest.raises(RuntimeError):
            # claim the low-probability action was played with an inflated cost
            strat.update(0, np.array([1 - 1e-9, 1e-9]), 1, 1.0)
        assert q is not None

    def test_playout_average_is_mean_of_waterfills(self):
        rng = np.random.default_rng(35)
        pc = PolicyClass(rng.integers(0, 2, (4, 3)), 2)
        n, m = 3, 4
        strat = make_strategy(pc, gamma=0.25, n=n, playouts_per_round=m,
                              oracle=RecordingOracle(ExactErmOracle(pc)))
        strat.begin_episode(n, np.random.SeedSequence(9), pool=np.arange(3))
        q = strat.choose(1)
        psis = np.array([v for (_, _, v) in strat.oracle.queries]).reshape(m, 2)
        expected = np.mean([waterfill(p) for p in psis], axis=0)
        np.testing.assert_allclose(q, (1 - 0.5) * expected + 0.25, atol=1e-12)


class TestQueryMatrixInvariants:
    def test_past_and_future_column_ranges(self):
        rng = np.random.default_rng(36)
        pc = PolicyClass(rng.integers(0, 2, (5, 4)), 2)
        n = 10
        recorder = RecordingOracle(ExactErmOracle(pc))
        strat = make_strategy(pc, gamma=0.2, n=n, oracle=recorder)
        env = Environment(np.ones(4) / 4, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        run_episode(strat, env, n, seed=7)
        assert len(recorder.queries) == 2 * n
        for call, (_, Y, _) in enumerate(recorder.queries):
            t = call // 2  # d calls per round, one playout
            past, current, future = Y[:, :t], Y[:, t], Y[:, t + 1 :]
            assert past.min(initial=0.0) >= 0.0 and past.max(initial=0.0) <= 1.0
            assert set(np.unique(current)) <= {0.0, 1.0} and current.sum() == 1.0
            if future.size:
                assert set(np.unique(future)) <= {-2.0, 2.0}

    def test_box_values_below_exact_values_per_round(self):
        rng = np.random.default_rng(37)
        pc = PolicyClass(rng.integers(0, 2, (5, 4)), 2)
        n = 8
        recorder = RecordingOracle(BoxRelaxedOracle())
        strat = make_strategy(pc, gamma=0.2, n=n, oracle=recorder)
        env = Environment(np.ones(4) / 4, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        tr = run_episode(strat, env, n, seed=13)
        for ctx, Y, value in recorder.queries:
            assert value <= exact_erm_value(pc, ctx, Y) + 1e-12
        # with the box oracle all action prices coincide, so play is uniform
        np.testing.assert_allclose(tr.distributions, 0.5, atol=1e-12)

    def test_omitting_zero_candidate_changes_nothing(self):
        # Adding the zero column as a pricing candidate never improves the
        # adversary's side: the minimax value over {e_1..e_d} equals the value
        # over {e_1..e_d, 0}, checked by grid search.
        rng = np.random.default_rng(38)
        for _ in range(40):
            d = 2
            n = int(rng.integers(1, 5))
            pc = PolicyClass(rng.integers(0, d, (int(rng.integers(1, 7)), 3)), d)
            t = int(rng.integers(0, n))
            state = BistroState(d=d, horizon=n)
            gamma = 0.25
            for s in range(t):
                state.append(
                    int(rng.integers(0, 3)),
                    SparseCostVector(d, int(rng.integers(0, d)), float(rng.uniform(0, 4))),
                    gamma,
                )
            draw = PlayoutDraw(
                rng.integers(0, 3, n - t - 1),
                (rng.integers(0, 2, (d, n - t - 1)) * 2 - 1).astype(float),
            )
            ctx = np.concatenate([state.contexts, [1], draw.future_contexts]).astype(int)
            cfg = BistroConfig(horizon=n, gamma=gamma)
            psi = np.array([
                exact_erm_value(pc, ctx, assemble_query_matrix(state, 1, draw, j, cfg))
                for j in range(d)
            ])
            Y0 = assemble_query_matrix(state, 1, draw, 0, cfg)
            Y0[:, t] = 0.0
            psi0 = exact_erm_value(pc, ctx, Y0)

            grid = np.linspace(0.0, 1.0, 2001)
            qs = np.stack([grid, 1.0 - grid], axis=1)
            without = (qs - psi[None, :]).max(axis=1)
            with_zero = np.maximum(without, -psi0)
            assert abs(without.min() - with_zero.min()) <= 1e-12
            q_star = waterfill(psi)
            assert max(minimax_value(q_star, psi), -psi0) <= without.min() + 1e-9


class TestRegularizedVariant:
    def test_lambda_zero_matches_plain_bitwise(self):
        rng = np.random.default_rng(39)
        pc = PolicyClass.all_labelings(2, 3)
        n = 6
        env = Environment(np.ones(3) / 3, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        constraint = PairwiseDisagreement("uniform")
        plain = make_strategy(pc, gamma=0.25, n=n)
        reg = make_strategy(pc, gamma=0.25, n=n,
                            oracle=RegularizedErmOracle(pc, constraint, 0.0))
        tr_a = run_episode(plain, env, n, seed=21)
        tr_b = run_episode(reg, env, n, seed=21)
        assert np.array_equal(tr_a.distributions, tr_b.distributions)
        assert np.array_equal(tr_a.actions, tr_b.actions)
        assert np.array_equal(tr_a.observed_costs, tr_b.observed_costs)

    def test_large_lambda_plays_like_constant_labelings(self):
        # with a huge penalty only constant labelings matter, so action prices
        # equal those computed over the two constant policies
        rng = np.random.default_rng(40)
        pc = PolicyClass.all_labelings(2, 2)
        constants = PolicyClass(np.array([[0, 0], [1, 1]]), 2)
        n = 4
        env = Environment(np.ones(2) / 2, FixedTableCosts(rng.uniform(0, 1, (n, 2))))
        reg = make_strategy(pc, gamma=0.25, n=n,
                            oracle=RegularizedErmOracle(pc, PairwiseDisagreement("uniform"), 1e6))
        plain_small = make_strategy(constants, gamma=0.25, n=n)
        tr_a = run_episode(reg, env, n, seed=2)
        tr_b = run_episode(plain_small, env, n, seed=2)
        np.testing.assert_allclose(tr_a.distributions, tr_b.distributions, atol=1e-12)


class TestPartialMixing:
    def test_experimental_flag(self):
        pc = PolicyClass(np.array([[0]]), 2)
        strat = make_strategy(pc, gamma=0.1, n=1, partial_mixing=True)
        strat.begin_episode(1, np.random.SeedSequence(0), pool=np.zeros(2, dtype=int))
        q = strat.choose(0)
        # the concentrated coordinate is only scaled down to renormalize
        np.testing.assert_allclose(q, [0.9, 0.1], atol=1e-12)
        assert q.min() >= 0.1 - 1e-12

    def test_no_change_when_all_coordinates_large(self):
        pc = PolicyClass(np.array([[0], [1]]), 2)
        strat = make_strategy(pc, gamma=0.1, n=1, partial_mixing=True)
        strat.begin_episode(1, np.random.SeedSequence(0), pool=np.zeros(2, dtype=int))
        np.testing.assert_allclose(strat.choose(0), [0.5, 0.5], atol=1e-12)
