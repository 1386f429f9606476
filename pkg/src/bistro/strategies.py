"""Per-round bandit strategies.

BISTRO prices each action by an ERM oracle value on a hybrid cost matrix
(scaled history estimates, a basis-vector column for the candidate action,
and doubled random signs for hypothetical futures), water-fills the
resulting values into a distribution, and mixes toward uniform before
playing. The regularized and superset variants are the same loop with a
penalized or relaxed oracle plugged in. Baselines used as harness anchors
live at the bottom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .erm import ErmOracle
from .policies import SparseCostVector, ips_estimate, mix_with_uniform, uniform_distribution
from .waterfill import waterfill

MODES = ("iid_pool", "transductive")


@dataclass(frozen=True)
class PlayoutDraw:
    """A hypothetical future: contexts and sign vectors for rounds t+1..n."""

    future_contexts: np.ndarray
    future_signs: np.ndarray  # shape (d, n - t)

    def __post_init__(self):
        if self.future_signs.ndim != 2 or self.future_signs.shape[1] != len(self.future_contexts):
            raise ValueError("future signs must be (d, n - t) to match the drawn contexts")


@dataclass(frozen=True)
class BistroConfig:
    horizon: int
    gamma: float
    sign_scale: float = 2.0
    playouts_per_round: int = 1
    mode: str = "iid_pool"
    partial_mixing: bool = False

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.sign_scale <= 0:
            raise ValueError("sign_scale must be positive")
        if self.playouts_per_round < 1:
            raise ValueError("at least one playout per round")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass
class BistroState:
    """History entering the per-round objective: past contexts and estimates."""

    d: int
    horizon: int
    contexts: list[int] = field(default_factory=list)
    estimates: list[SparseCostVector] = field(default_factory=list)
    _scaled: np.ndarray = None

    def __post_init__(self):
        self._scaled = np.zeros((self.d, self.horizon))

    @property
    def t(self) -> int:
        """Current 1-based round index (history length + 1)."""
        return len(self.estimates) + 1

    def scaled_past(self) -> np.ndarray:
        """Columns gamma * c~_s for s < t, shape (d, t-1)."""
        return self._scaled[:, : len(self.estimates)]

    def append(self, x: int, estimate: SparseCostVector, gamma: float) -> None:
        k = len(self.estimates)
        if k >= self.horizon:
            raise ValueError("episode already complete")
        self.contexts.append(int(x))
        self.estimates.append(estimate)
        self._scaled[:, k] = gamma * estimate.dense()


def assemble_query_matrix(
    state: BistroState, x_t: int, draw: PlayoutDraw, j: int, config: BistroConfig
) -> np.ndarray:
    """Cost matrix for one action-pricing query.

    Column s < t is gamma * c~_s, column t is e_j, and column s > t is
    sign_scale * eps_s (the gamma scaling applied to the stored
    sign_scale/gamma future columns cancels).
    """
    d, n = state.d, config.horizon
    k = len(state.estimates)
    if draw.future_signs.shape != (d, n - k - 1):
        raise ValueError("playout draw length inconsistent with the round index")
    if not 0 <= j < d:
        raise ValueError("action index out of range")
    Y = np.empty((d, n))
    Y[:, :k] = state.scaled_past()
    Y[:, k] = 0.0
    Y[j, k] = 1.0
    Y[:, k + 1 :] = config.sign_scale * draw.future_signs
    return Y


def _partial_mix(q_star: np.ndarray, gamma: float) -> np.ndarray:
    """Experimental: raise only coordinates below gamma, renormalizing the rest."""
    q = q_star.copy()
    for _ in range(q.size):
        low = q < gamma
        if not low.any():
            break
        q[low] = gamma
        free = ~low
        target = 1.0 - gamma * low.sum()
        total = q[free].sum()
        if total > 0:
            q[free] *= target / total
    return q


class Strategy:
    """Interface shared by all per-round strategies."""

    transductive = False
    needs_full_costs = False
    oracle_calls = 0

    def begin_episode(self, n: int, seed_seq, pool=None, known_futures=None) -> None:
        raise NotImplementedError

    def choose(self, x: int) -> np.ndarray:
        raise NotImplementedError

    def update(self, x: int, q: np.ndarray, action: int, observed_cost: float) -> None:
        pass

    def observe_full_costs(self, x: int, cost_vector: np.ndarray) -> None:
        pass


class BistroStrategy(Strategy):
    """Random-playout relaxation strategy; d oracle calls per playout per round."""

    def __init__(self, policy_class, oracle: ErmOracle, config: BistroConfig):
        d = policy_class.d
        if not 0.0 < config.gamma <= 1.0 / d:
            raise ValueError(f"gamma must lie in (0, 1/d]; got {config.gamma}")
        self.policy_class = policy_class
        self.oracle = oracle
        self.config = config
        self.state: BistroState | None = None
        self._ctx = None
        self._pool = None
        self._futures = None
        self._ctx_rng = None
        self._sign_rng = None

    @property
    def transductive(self) -> bool:
        return self.config.mode == "transductive"

    @property
    def oracle_calls(self) -> int:
        return self.oracle.calls

    def begin_episode(self, n: int, seed_seq, pool=None, known_futures=None) -> None:
        if n != self.config.horizon:
            raise ValueError("episode length does not match the configured horizon")
        d = self.policy_class.d
        if not isinstance(seed_seq, np.random.SeedSequence):
            seed_seq = np.random.SeedSequence(seed_seq)
        ctx_ss, sign_ss, noise_ss = seed_seq.spawn(3)
        self._ctx_rng = np.random.default_rng(ctx_ss)
        self._sign_rng = np.random.default_rng(sign_ss)
        if hasattr(self.oracle, "reseed"):
            self.oracle.reseed(noise_ss)
        if self.transductive:
            if known_futures is None or len(known_futures) != n:
                raise ValueError("transductive mode requires the full context sequence")
            self._futures = np.asarray(known_futures, dtype=np.int64)
        else:
            if pool is None or len(pool) == 0:
                raise ValueError("iid_pool mode requires a nonempty unlabeled pool")
            self._pool = np.asarray(pool, dtype=np.int64)
        self.state = BistroState(d=d, horizon=n)
        self._ctx = np.zeros(n, dtype=np.int64)

    def _draw_playout(self, t_index: int) -> PlayoutDraw:
        d, n = self.policy_class.d, self.config.horizon
        k = n - t_index - 1
        if self.transductive:
            future = self._futures[t_index + 1 :]
        else:
            future = self._ctx_rng.choice(self._pool, size=k)
        signs = self._sign_rng.integers(0, 2, size=(d, k)) * 2 - 1
        return PlayoutDraw(future_contexts=future, future_signs=signs.astype(float))

    def choose(self, x: int) -> np.ndarray:
        cfg = self.config
        d = self.policy_class.d
        t_index = len(self.state.estimates)
        self._ctx[t_index] = x
        psi = np.empty(d)
        q_sum = np.zeros(d)
        for _ in range(cfg.playouts_per_round):
            draw = self._draw_playout(t_index)
            self._ctx[t_index + 1 :] = draw.future_contexts
            for j in range(d):
                Y = assemble_query_matrix(self.state, x, draw, j, cfg)
                psi[j] = self.oracle(self._ctx, Y)
            q_sum += waterfill(psi)
        q_star = q_sum / cfg.playouts_per_round
        if cfg.partial_mixing:
            return _partial_mix(q_star, cfg.gamma)
        return mix_with_uniform(q_star, cfg.gamma)

    def update(self, x: int, q: np.ndarray, action: int, observed_cost: float) -> None:
        est = ips_estimate(observed_cost, action, q)
        if est.value > 1.0 / self.config.gamma + 1e-9:
            raise RuntimeError("estimate exceeds 1/gamma; mixing invariant violated")
        self.state.append(x, est, self.config.gamma)


class UniformStrategy(Strategy):
    """Plays uniformly at random; the no-learning anchor."""

    def __init__(self, d: int):
        self.d = d

    def begin_episode(self, n, seed_seq, pool=None, known_futures=None):
        pass

    def choose(self, x: int) -> np.ndarray:
        return uniform_distribution(self.d)


class EpsilonGreedyStrategy(Strategy):
    """Follows the policy with smallest reweighted cumulative cost, with an
    epsilon floor of uniform exploration."""

    def __init__(self, policy_class, epsilon: float = 0.1):
        if not 0.0 < epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        self.policy_class = policy_class
        self.epsilon = float(epsilon)
        self._losses = None

    def begin_episode(self, n, seed_seq, pool=None, known_futures=None):
        self._losses = np.zeros(self.policy_class.size)

    def choose(self, x: int) -> np.ndarray:
        d = self.policy_class.d
        best = int(np.argmin(self._losses))
        q = np.full(d, self.epsilon / d)
        q[self.policy_class.table[best, x]] += 1.0 - self.epsilon
        return q

    def update(self, x, q, action, observed_cost):
        est = ips_estimate(observed_cost, action, q)
        hit = self.policy_class.table[:, x] == action
        self._losses[hit] += est.value


class FollowTheLeaderStrategy(Strategy):
    """Plays the exact ERM policy on past true cost vectors. Requires
    full-information feedback the protocol does not grant; diagnostic only."""

    needs_full_costs = True

    def __init__(self, policy_class):
        self.policy_class = policy_class
        self._losses = None

    def begin_episode(self, n, seed_seq, pool=None, known_futures=None):
        self._losses = np.zeros(self.policy_class.size)

    def choose(self, x: int) -> np.ndarray:
        d = self.policy_class.d
        best = int(np.argmin(self._losses))
        q = np.zeros(d)
        q[self.policy_class.table[best, x]] = 1.0
        return q

    def observe_full_costs(self, x, cost_vector):
        self._losses += np.asarray(cost_vector, dtype=float)[self.policy_class.table[:, x]]
