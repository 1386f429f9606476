"""Episode runner, regret accounting, suite aggregation, and serialization.

An episode is strictly sequential: observe x_t, ask the strategy for q_t,
let the cost process commit c_t (seeing only the history it is entitled
to), draw the action, reveal one coordinate. Randomness is split into
independent streams keyed by the episode seed alone, so identical
(config, seed) pairs produce byte-identical outputs regardless of
scheduling.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .adversarial import ExpWeightsRelaxation, ReductionStrategy, reduction_bound, reduction_gamma
from .environments import AdaptiveCosts, Environment, FixedTableCosts, IidBernoulliCosts
from .erm import (
    BoxRelaxedOracle,
    ExactErmOracle,
    RegularizedErmOracle,
    policy_constraint_values,
    approximate_erm,
    exact_erm_value,
    filter_class,
    load_constraint,
)
from .policies import PolicyClass, check_cost_vector
from .rademacher import categorical_sampler, rademacher_estimate, regret_bound, tune_gamma
from .strategies import (
    BistroConfig,
    BistroStrategy,
    EpsilonGreedyStrategy,
    FollowTheLeaderStrategy,
    Strategy,
    UniformStrategy,
)

ALGORITHMS = (
    "bistro",
    "bistro_regularized",
    "bistro_relaxed",
    "adversarial_reduction",
    "uniform",
    "egreedy",
    "ftl",
)


@dataclass(frozen=True)
class InfoTuple:
    """What the learner is allowed to remember about one round."""

    context: int
    distribution: np.ndarray
    action: int
    observed_cost: float


@dataclass
class Transcript:
    """Full episode log, including the simulator-private cost vectors."""

    contexts: np.ndarray        # (n,)
    distributions: np.ndarray   # (n, d)
    actions: np.ndarray         # (n,)
    observed_costs: np.ndarray  # (n,)
    cost_vectors: np.ndarray    # (n, d)

    @property
    def n(self) -> int:
        return self.contexts.size

    @property
    def d(self) -> int:
        return self.distributions.shape[1]

    @property
    def expected_costs(self) -> np.ndarray:
        return (self.distributions * self.cost_vectors).sum(axis=1)

    @property
    def cumulative_expected(self) -> np.ndarray:
        return np.cumsum(self.expected_costs)

    @property
    def expected_total(self) -> float:
        return float(self.expected_costs.sum())

    @property
    def realized_total(self) -> float:
        return float(self.observed_costs.sum())

    def info(self) -> list[InfoTuple]:
        return [
            InfoTuple(int(self.contexts[t]), self.distributions[t], int(self.actions[t]),
                      float(self.observed_costs[t]))
            for t in range(self.n)
        ]

    def validate(self) -> None:
        n = self.n
        if not (len(self.actions) == len(self.observed_costs) == len(self.cost_vectors) == n):
            raise ValueError("transcript field lengths disagree")
        picked = self.cost_vectors[np.arange(n), self.actions] if n else np.empty(0)
        if not np.array_equal(picked, self.observed_costs):
            raise ValueError("observed costs inconsistent with cost vectors")


def run_episode(strategy: Strategy, env: Environment, n: int, seed) -> Transcript:
    """Play one episode of length n; deterministic given (strategy config, env, seed)."""
    d = env.d
    pc = getattr(strategy, "policy_class", None)
    if pc is not None:
        if pc.d != d:
            raise ValueError("strategy and environment disagree on the number of actions")
        if pc.universe_size != env.universe_size:
            raise ValueError("strategy and environment disagree on the context universe")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    ctx_ss, pool_ss, cost_ss, act_ss, strat_ss = ss.spawn(5)
    ctx_rng = np.random.default_rng(ctx_ss)
    xs = env.sample_contexts(ctx_rng, n)
    pool = env.sample_contexts(np.random.default_rng(pool_ss), env.pool_factor * max(n, 1))
    env.cost_process.begin(np.random.default_rng(cost_ss), n)
    strategy.begin_episode(
        n=n,
        seed_seq=strat_ss,
        pool=pool,
        known_futures=xs if strategy.transductive else None,
    )
    act_rng = np.random.default_rng(act_ss)

    distributions = np.zeros((n, d))
    actions = np.zeros(n, dtype=np.int64)
    observed = np.zeros(n)
    costs = np.zeros((n, d))
    for t in range(n):
        x = int(xs[t])
        q = strategy.choose(x)
        c = env.cost_process.commit(t, xs[: t + 1], distributions[:t], actions[:t])
        c = check_cost_vector(c)
        if c.size != d:
            raise ValueError("cost process dimension mismatch")
        a = int(act_rng.choice(d, p=q))
        distributions[t] = q
        actions[t] = a
        observed[t] = c[a]
        costs[t] = c
        strategy.update(x, q, a, float(c[a]))
        if strategy.needs_full_costs:
            strategy.observe_full_costs(x, c)
    return Transcript(
        contexts=xs,
        distributions=distributions,
        actions=actions,
        observed_costs=observed,
        cost_vectors=costs,
    )


def benchmark_value(transcript: Transcript, policy_class: PolicyClass,
                    constraint=None, K: float | None = None) -> float:
    """Best cumulative cost inside the (possibly constraint-filtered) class."""
    if transcript.n == 0:
        return 0.0
    bench = policy_class
    if constraint is not None:
        bench = filter_class(policy_class, transcript.contexts, constraint,
                             np.inf if K is None else K)
        if bench.size == 0:
            raise ValueError("benchmark class is empty after constraint filtering")
    return exact_erm_value(bench, transcript.contexts, transcript.cost_vectors.T)


def expected_regret(transcript: Transcript, policy_class: PolicyClass,
                    constraint=None, K: float | None = None) -> float:
    return transcript.expected_total - benchmark_value(transcript, policy_class, constraint, K)


def realized_regret(transcript: Transcript, policy_class: PolicyClass,
                    constraint=None, K: float | None = None) -> float:
    return transcript.realized_total - benchmark_value(transcript, policy_class, constraint, K)


# -- configuration ----------------------------------------------------------


def load_config(path: str) -> dict:
    with open(path) as f:
        config = json.load(f)
    config.setdefault("_base_dir", os.path.dirname(os.path.abspath(path)))
    return config


def _resolve_path(config: dict, path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(config.get("_base_dir", "."), path)


def build_policy_class(config: dict) -> PolicyClass:
    doc = config["policy_class"]
    if "path" in doc:
        with open(_resolve_path(config, doc["path"])) as f:
            doc = json.load(f)
    features = _context_features(config)
    pc = PolicyClass.from_json(doc, features=features)
    if pc.d != int(config["d"]):
        raise ValueError("policy class action count disagrees with config d")
    return pc


def _context_probs(config: dict, universe_size: int) -> np.ndarray:
    dist = config.get("context_dist", "uniform")
    if dist == "uniform":
        return np.full(universe_size, 1.0 / universe_size)
    if isinstance(dist, dict):
        return np.asarray(dist["probs"], dtype=float)
    return np.asarray(dist, dtype=float)


def _context_features(config: dict):
    dist = config.get("context_dist")
    if isinstance(dist, dict) and "features" in dist:
        return np.asarray(dist["features"], dtype=float)
    return None


def build_cost_process(config: dict):
    doc = config["cost_process"]
    kind = doc["type"]
    if kind == "fixed_table":
        if "path" in doc:
            values = np.loadtxt(_resolve_path(config, doc["path"]), delimiter=",")
        else:
            values = np.asarray(doc["values"], dtype=float)
        return FixedTableCosts(values)
    if kind == "iid_bernoulli":
        return IidBernoulliCosts(np.asarray(doc["means"], dtype=float))
    if kind == "adaptive":
        return AdaptiveCosts(
            d=int(config["d"]),
            rule=doc.get("rule", "argmax_punish"),
            sees_current_context=doc.get("sees_current_context", True),
        )
    raise ValueError(f"unknown cost process {kind!r}")


def build_environment(config: dict, policy_class: PolicyClass) -> Environment:
    probs = _context_probs(config, policy_class.universe_size)
    if probs.size != policy_class.universe_size:
        raise ValueError("context distribution size disagrees with the policy universe")
    return Environment(
        probs,
        build_cost_process(config),
        features=_context_features(config),
        pool_factor=int(config.get("pool_factor", 10)),
    )


def build_constraint(config: dict):
    doc = config.get("constraint")
    return None if doc is None else load_constraint(doc)


def box_rademacher(n: int, d: int) -> float:
    """Exact complexity of the box superset: per column, the best response to
    a sign vector is max(0, max_j eps_j), which is 1 unless all signs are -1."""
    return float(n * (1.0 - 0.5**d))


def regularized_bound_term(policy_class: PolicyClass, probs, n: int, gamma: float,
                           lam: float, K: float, constraint) -> float:
    """E_{x,eps} sup_f { -(1/gamma) sum_t eps_t[f(x_t)] - lam*C(f; x) } + n*d*gamma + lam*K.

    Exact enumeration over sign patterns and context sequences; capacity
    limited to desk scale.
    """
    d = policy_class.d
    probs = np.asarray(probs, dtype=float)
    X = probs.size
    if 2 ** (n * d) > 4096 or X**n > 4096:
        raise ValueError("regularized bound enumeration limited to 2^(nd), |X|^n <= 4096")
    codes = np.arange(2 ** (n * d))
    bits = (codes[:, None] >> np.arange(n * d)) & 1
    eps = (2.0 * bits - 1.0).reshape(-1, d, n)  # (P, d, n)

    xcodes = np.arange(X**n, dtype=np.int64)
    xseqs = (xcodes[:, None] // X ** np.arange(n, dtype=np.int64)) % X  # (S, n)
    weights = probs[xseqs].prod(axis=1)

    total = 0.0
    cols = np.arange(n)
    for xseq, w in zip(xseqs, weights):
        if w == 0.0:
            continue
        A = policy_class.actions_on(xseq)  # (|F|, n)
        picked = eps[:, A, cols]           # (P, |F|, n)
        vals = -picked.sum(axis=2) / gamma
        if lam > 0:
            vals = vals - lam * policy_constraint_values(constraint, policy_class, xseq)
        total += w * vals.max(axis=1).mean()
    return float(total + n * d * gamma + lam * K)


def resolve_strategy_params(config: dict, policy_class: PolicyClass, env: Environment) -> dict:
    """Fix gamma, the complexity estimate, and the theoretical bound."""
    algo = config.get("algorithm", "bistro")
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    n, d = int(config["n"]), int(config["d"])
    gamma_cfg = config.get("gamma", "auto")
    out = {"algorithm": algo, "gamma": None, "rad_estimate": None,
           "rad_stderr": None, "bound": None}

    if algo in ("bistro", "bistro_regularized"):
        est = rademacher_estimate(
            ExactErmOracle(policy_class),
            categorical_sampler(env.probs),
            n,
            samples=int(config.get("tune_samples", 200)),
            seed=config.get("tune_seed", 0),
        )
        out["rad_estimate"], out["rad_stderr"] = est.mean, est.std_error
        gamma = tune_gamma(est.mean, n, d) if gamma_cfg == "auto" else float(gamma_cfg)
        out["gamma"] = gamma
        if algo == "bistro":
            out["bound"] = regret_bound(est.mean, n, d)
        else:
            out["bound"] = regularized_bound_term(
                policy_class, env.probs, n, gamma,
                lam=float(config.get("lambda", 0.0)),
                K=float(config.get("K", 0.0)),
                constraint=build_constraint(config),
            )
    elif algo == "bistro_relaxed":
        rad = box_rademacher(n, d)
        out["rad_estimate"], out["rad_stderr"] = rad, 0.0
        out["gamma"] = tune_gamma(rad, n, d) if gamma_cfg == "auto" else float(gamma_cfg)
        out["bound"] = regret_bound(rad, n, d)
        # superset vs original class widths, reported side by side (no ratio asserted)
        est = rademacher_estimate(
            ExactErmOracle(policy_class),
            categorical_sampler(env.probs),
            n,
            samples=int(config.get("tune_samples", 200)),
            seed=config.get("tune_seed", 0),
        )
        out["class_rad_estimate"], out["class_rad_stderr"] = est.mean, est.std_error
    elif algo == "adversarial_reduction":
        rel0 = ExpWeightsRelaxation(policy_class, n, eta=config.get("eta")).initial_value()
        out["rad_estimate"], out["rad_stderr"] = rel0, 0.0
        out["gamma"] = reduction_gamma(rel0, n, d) if gamma_cfg == "auto" else float(gamma_cfg)
        out["bound"] = reduction_bound(rel0, n, d)
    return out


def make_strategy(config: dict, policy_class: PolicyClass, gamma: float | None) -> Strategy:
    """Fresh strategy instance; one per episode so call counters stay per-episode."""
    algo = config.get("algorithm", "bistro")
    n, d = int(config["n"]), int(config["d"])
    if algo in ("bistro", "bistro_regularized", "bistro_relaxed"):
        cfg = BistroConfig(
            horizon=n,
            gamma=gamma,
            sign_scale=float(config.get("sign_scale", 2.0)),
            playouts_per_round=int(config.get("playouts", 1)),
            mode=config.get("horizon_mode", "iid_pool"),
        )
        if algo == "bistro":
            oracle = ExactErmOracle(policy_class)
        elif algo == "bistro_regularized":
            constraint = build_constraint(config)
            if constraint is None:
                raise ValueError("bistro_regularized requires a constraint")
            lam = float(config.get("lambda", 0.0))
            oracle = RegularizedErmOracle(policy_class, constraint, lam / gamma)
        else:
            oracle = BoxRelaxedOracle()
        if "delta" in config:
            oracle = approximate_erm(oracle, float(config["delta"]), seed=0)
        return BistroStrategy(policy_class, oracle, cfg)
    if algo == "adversarial_reduction":
        rel = ExpWeightsRelaxation(policy_class, n, eta=config.get("eta"))
        return ReductionStrategy(rel, gamma, n)
    if algo == "uniform":
        return UniformStrategy(d)
    if algo == "egreedy":
        return EpsilonGreedyStrategy(policy_class, epsilon=float(config.get("epsilon", 0.1)))
    if algo == "ftl":
        return FollowTheLeaderStrategy(policy_class)
    raise ValueError(f"unknown algorithm {algo!r}")


def episode_csv_lines(transcript: Transcript) -> list[str]:
    """CSV rows: actions are 1-based in files, context ids stay 0-based."""
    d = transcript.d
    header = (
        "round,context,action,"
        + ",".join(f"q_{j}" for j in range(1, d + 1))
        + ",observed_cost,expected_cost,cum_expected_cost"
    )
    lines = [header]
    cum = transcript.cumulative_expected
    expected = transcript.expected_costs
    for t in range(transcript.n):
        qs = ",".join(repr(float(v)) for v in transcript.distributions[t])
        lines.append(
            f"{t + 1},{int(transcript.contexts[t])},{int(transcript.actions[t]) + 1},{qs},"
            f"{float(transcript.observed_costs[t])!r},{float(expected[t])!r},{float(cum[t])!r}"
        )
    return lines


def write_episode_csv(path: str, transcript: Transcript) -> None:
    with open(path, "w", newline="") as f:
        f.write("\n".join(episode_csv_lines(transcript)) + "\n")


def run_suite(config: dict, seeds, out_dir: str | None = None) -> dict:
    """Run every seed, aggregate regret, and compare against the bound."""
    policy_class = build_policy_class(config)
    env = build_environment(config, policy_class)
    n = int(config["n"])
    params = resolve_strategy_params(config, policy_class, env)
    constraint = build_constraint(config)
    K = config.get("K")

    seeds = list(seeds)
    regrets = np.zeros(len(seeds))
    realized = np.zeros(len(seeds))
    calls = 0
    transcripts = []
    for i, seed in enumerate(seeds):
        strategy = make_strategy(config, policy_class, params["gamma"])
        try:
            tr = run_episode(strategy, env, n, seed)
            regrets[i] = expected_regret(tr, policy_class, constraint, K)
            realized[i] = realized_regret(tr, policy_class, constraint, K)
        except Exception as exc:
            raise RuntimeError(f"episode failed for seed {seed}: {exc}") from exc
        calls += strategy.oracle_calls
        transcripts.append(tr)

    mean = float(regrets.mean()) if seeds else 0.0
    std = float(regrets.std(ddof=1)) if len(seeds) > 1 else 0.0
    bound = params["bound"]
    summary = {
        "algorithm": params["algorithm"],
        "n": n,
        "d": int(config["d"]),
        "seeds": [int(s) for s in seeds],
        "mean_regret": mean,
        "std_regret": std,
        "mean_realized_regret": float(realized.mean()) if seeds else 0.0,
        "bound": bound,
        "gamma_used": params["gamma"],
        "rad_estimate": params["rad_estimate"],
        "rad_stderr": params["rad_stderr"],
        "oracle_calls_total": int(calls),
        "violations": int(bound is not None and mean > bound),
        "per_seed_regret": [float(r) for r in regrets],
    }
    for key in ("class_rad_estimate", "class_rad_stderr"):
        if key in params:
            summary[key] = params[key]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for seed, tr in zip(seeds, transcripts):
            write_episode_csv(os.path.join(out_dir, f"episode_{seed}.csv"), tr)
        with open(os.path.join(out_dir, "summary.json"), "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
    return summary
