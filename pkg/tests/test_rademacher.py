import numpy as np
import pytest

from bistro.erm import ExactErmOracle
from bistro.policies import PolicyClass
from bistro.rademacher import (
    RademacherEstimate,
    categorical_sampler,
    fixed_sampler,
    rademacher_estimate,
    rademacher_samples,
    regret_bound,
    tune_gamma,
)
from bistro.verify import exact_rademacher


class TestEstimator:
    def test_singleton_class_mean_near_zero(self):
        pc = PolicyClass(np.array([[0, 1, 0]]), 2)
        est = rademacher_estimate(
            ExactErmOracle(pc), categorical_sampler(np.ones(3) / 3), 8, samples=2000, seed=0
        )
        assert abs(est.mean) <= 3 * est.std_error

    def test_all_labelings_distinct_contexts(self):
        # With distinct contexts every column is free: value n * E max sign = n/2.
        pc = PolicyClass.all_labelings(2, 10)
        est = rademacher_estimate(
            ExactErmOracle(pc), fixed_sampler(np.arange(10)), 10, samples=3000, seed=1
        )
        assert abs(est.mean - 5.0) <= 3 * est.std_error

    def test_matches_exact_enumeration_small(self):
        pc = PolicyClass(np.array([[0], [1]]), 2)
        exact = exact_rademacher(pc, [0])
        assert exact == pytest.approx(0.5)
        est = rademacher_estimate(
            ExactErmOracle(pc), fixed_sampler(np.zeros(1, dtype=int)), 1, samples=4000, seed=2
        )
        assert abs(est.mean - exact) <= 3 * est.std_error

    def test_per_sample_values_are_negated_erm(self):
        # Recompute each sample's supremum by direct enumeration over policies.
        pc = PolicyClass(np.random.default_rng(3).integers(0, 3, (12, 4)), 3)
        oracle = ExactErmOracle(pc)
        seed, n, R = 7, 5, 40
        values = rademacher_samples(oracle, categorical_sampler(np.ones(4) / 4), n, R, seed)
        for r in range(R):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
            ctxs = rng.choice(np.arange(4), size=n, p=np.ones(4) / 4)
            signs = rng.integers(0, 2, size=(3, n)) * 2 - 1
            sup = max(
                signs[pc.table[i, ctxs], np.arange(n)].sum() for i in range(pc.size)
            )
            assert values[r] == pytest.approx(float(sup), abs=1e-12)

    def test_inclusion_monotone_with_shared_streams(self):
        rng = np.random.default_rng(4)
        big = PolicyClass(rng.integers(0, 2, (8, 3)), 2)
        small = big.subset([0, 1, 2])
        sampler = categorical_sampler(np.ones(3) / 3)
        v_small = rademacher_samples(ExactErmOracle(small), sampler, 6, 200, seed=5)
        v_big = rademacher_samples(ExactErmOracle(big), sampler, 6, 200, seed=5)
        assert (v_small <= v_big + 1e-12).all()

    def test_one_oracle_call_per_sample(self):
        pc = PolicyClass(np.array([[0], [1]]), 2)
        oracle = ExactErmOracle(pc)
        rademacher_estimate(oracle, fixed_sampler(np.zeros(1, dtype=int)), 1, samples=37, seed=0)
        assert oracle.calls == 37

    def test_estimate_validation(self):
        with pytest.raises(ValueError):
            RademacherEstimate(mean=0.0, std_error=-1.0, samples=10)
        with pytest.raises(ValueError):
            RademacherEstimate(mean=0.0, std_error=0.0, samples=0)


class TestTuning:
    def test_clamp_to_uniform(self):
        # rad = n/2 at d=2 tunes to sqrt(1/2), above 1/d: clamp.
        for n in (4, 10, 64):
            assert tune_gamma(n / 2, n, 2) == 0.5

    def test_zero_rad_floor(self):
        assert tune_gamma(0.0, 10, 2) == pytest.approx(1 / 20)
        assert tune_gamma(-0.3, 10, 2) == pytest.approx(1 / 20)
        assert tune_gamma(0.0, 10, 2, floor=0.01) == 0.01

    def test_full_clamp_case(self):
        n, d = 10, 2
        assert tune_gamma(n * d / 2, n, d) == 0.5

    def test_interior_value(self):
        gamma = tune_gamma(1.0, 100, 2)
        assert gamma == pytest.approx(np.sqrt(2 / 200))
        assert 0 < gamma <= 0.5

    def test_always_in_range(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(1, 1000))
            d = int(rng.integers(1, 20))
            g = tune_gamma(float(rng.uniform(-1, 3 * n)), n, d)
            assert 0 < g <= 1 / d

    def test_parameter_errors(self):
        with pytest.raises(ValueError):
            tune_gamma(1.0, 0, 2)
        with pytest.raises(ValueError):
            tune_gamma(1.0, 5, 0)


class TestBound:
    def test_zero(self):
        assert regret_bound(0.0, 100, 4) == 0.0

    def test_plug_in(self):
        assert regret_bound(5.0, 10, 2) == pytest.approx(2 * np.sqrt(200))

    def test_sqrt_scaling(self):
        b1 = regret_bound(3.0, 50, 3)
        b4 = regret_bound(12.0, 50, 3)
        assert b4 == pytest.approx(2 * b1)
