"""Simulation environments: i.i.d. contexts crossed with fixed, stochastic,
or adaptive cost processes.

Cost processes commit the full cost vector for round t before the learner's
action is drawn; adaptive rules see only (x_1..x_t, q_1..q_{t-1},
y_1..y_{t-1}), which is the strongest visibility consistent with costs being
chosen independently of the current action.
"""

from __future__ import annotations

import numpy as np

from .policies import check_cost_vector

DEFAULT_POOL_FACTOR = 10


class CostProcess:
    d: int

    def begin(self, rng: np.random.Generator, n: int) -> None:
        pass

    def commit(self, t, contexts, past_distributions, past_actions) -> np.ndarray:
        raise NotImplementedError


class FixedTableCosts(CostProcess):
    """Cost vectors fixed ahead of time, one row per round."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("cost table must be (n, d)")
        if (values < 0).any() or (values > 1).any():
            raise ValueError("cost entries must lie in [0, 1]")
        self.values = values
        self.d = values.shape[1]

    def begin(self, rng, n):
        if n > self.values.shape[0]:
            raise ValueError("cost table shorter than the horizon")

    def commit(self, t, contexts, past_distributions, past_actions):
        return self.values[t]


class IidBernoulliCosts(CostProcess):
    """Independent Bernoulli costs with per-context per-action means."""

    def __init__(self, means):
        means = np.asarray(means, dtype=float)
        if means.ndim != 2:
            raise ValueError("means must be (|X|, d)")
        if (means < 0).any() or (means > 1).any():
            raise ValueError("means must lie in [0, 1]")
        self.means = means
        self.d = means.shape[1]
        self._rng = None

    def begin(self, rng, n):
        self._rng = rng

    def commit(self, t, contexts, past_distributions, past_actions):
        x = int(contexts[-1])
        return (self._rng.random(self.d) < self.means[x]).astype(float)


def _argmax_punish(contexts, past_distributions, past_actions, d):
    past = np.asarray(past_distributions, dtype=float).reshape(-1, d)
    totals = past.sum(axis=0)
    c = np.zeros(d)
    c[int(np.argmax(totals))] = 1.0
    return c


_ADAPTIVE_RULES = {"argmax_punish": _argmax_punish}


class AdaptiveCosts(CostProcess):
    """Deterministic rule of the visible history, committed pre-action.

    ``sees_current_context`` controls whether the rule receives x_t itself;
    the default is the strongest allowed visibility.
    """

    def __init__(self, d: int, rule="argmax_punish", sees_current_context: bool = True):
        self.d = int(d)
        if isinstance(rule, str):
            if rule not in _ADAPTIVE_RULES:
                raise ValueError(f"unknown adaptive rule {rule!r}")
            self._rule = _ADAPTIVE_RULES[rule]
        else:
            self._rule = rule
        self.sees_current_context = bool(sees_current_context)

    def commit(self, t, contexts, past_distributions, past_actions):
        visible = contexts if self.sees_current_context else contexts[:-1]
        c = np.asarray(
            self._rule(visible, past_distributions, past_actions, self.d), dtype=float
        )
        return check_cost_vector(c)


class Environment:
    """Context distribution plus a cost process.

    The unlabeled pool drawn at episode start (pool_factor * n fresh draws)
    stands in for sampling access to the context distribution.
    """

    def __init__(self, probs, cost_process: CostProcess, features=None,
                 pool_factor: int = DEFAULT_POOL_FACTOR):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("context distribution must be a nonempty vector")
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("context probabilities must be nonnegative and sum to 1")
        if pool_factor < 1:
            raise ValueError("pool_factor must be at least 1")
        if features is not None:
            features = np.asarray(features, dtype=float)
            if features.shape[0] != probs.size:
                raise ValueError("feature table must have one row per context")
        self.probs = probs
        self.features = features
        self.cost_process = cost_process
        self.pool_factor = int(pool_factor)

    @property
    def universe_size(self) -> int:
        return self.probs.size

    @property
    def d(self) -> int:
        return self.cost_process.d

    def sample_contexts(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.universe_size, size=size, p=self.probs)
