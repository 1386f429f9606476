"""Empirical admissibility checks for the shipped relaxations.

A relaxation is admissible when, at every round, the expected best-response
value of the adversary (enumerating contexts with their probabilities and
cost vectors over the hypercube vertices, where the inner expression is
convex in the cost vector) does not exceed the relaxation of the shorter
history, and when at the horizon the relaxation dominates the negated
benchmark in expectation over the action draws.

The playout relaxation is estimated by Monte Carlo with reported standard
errors; the exponential-weights reduction is evaluated exactly. Instances
are capped at desk scale so expectations over playouts and action sequences
stay enumerable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .adversarial import ExpWeightsRelaxation
from .policies import CapacityError, PolicyClass, mix_with_uniform
from .waterfill import waterfill

MAX_D = 3
MAX_N = 3
MAX_UNIVERSE = 3
MAX_CLASS = 8

INITIAL_TOL = 1e-9
EXACT_TOL = 1e-9


@dataclass(frozen=True)
class RecursiveStep:
    round_index: int
    lhs: float
    rhs: float
    stderr: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def passed(self, k: float = 3.0) -> bool:
        return self.margin <= k * self.stderr + EXACT_TOL


@dataclass(frozen=True)
class InitialCondition:
    checks: int
    min_margin: float
    failures: int


@dataclass
class AdmissibilityReport:
    algorithm: str
    gamma: float
    samples: int
    steps: list[RecursiveStep]
    initial: InitialCondition

    def ok(self, k: float = 3.0) -> bool:
        return all(s.passed(k) for s in self.steps) and self.initial.failures == 0


def _check_capacity(policy_class: PolicyClass, probs, n: int) -> None:
    if policy_class.d > MAX_D or n > MAX_N:
        raise CapacityError(f"admissibility checks limited to d<={MAX_D}, n<={MAX_N}")
    if len(probs) > MAX_UNIVERSE or policy_class.size > MAX_CLASS:
        raise CapacityError(
            f"admissibility checks limited to |X|<={MAX_UNIVERSE}, |F|<={MAX_CLASS}"
        )


def _vertices(d: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=d)))


def _sign_patterns(cells: int) -> np.ndarray:
    codes = np.arange(2**cells)
    return ((codes[:, None] >> np.arange(cells)) & 1) * 2.0 - 1.0


def _fixed_policy_values(table: np.ndarray, fixed_ctx: np.ndarray,
                         fixed_cols: np.ndarray) -> np.ndarray:
    """sum_s fixed_cols[s, a_{f,s}] per policy; fixed_cols is (k, d)."""
    if fixed_ctx.size == 0:
        return np.zeros(table.shape[0])
    A = table[:, fixed_ctx]  # (F, k)
    return fixed_cols[np.arange(fixed_ctx.size)[None, :], A].sum(axis=1)


def _playout_sups(table: np.ndarray, fixed_vals: np.ndarray, future_ctx: np.ndarray,
                  future_signs: np.ndarray, scale: float) -> np.ndarray:
    """Per-draw sup_f of -(fixed + scale * sign part); shapes (R, m) / (R, d, m)."""
    R, m = future_ctx.shape
    totals = np.repeat(fixed_vals[:, None], R, axis=1)  # (F, R)
    if m:
        A = table[:, future_ctx]  # (F, R, m)
        rows = np.arange(R)[None, :]
        for i in range(m):
            totals = totals + scale * future_signs[:, :, i][rows, A[:, :, i]]
    return -totals.min(axis=0)


def _exact_mixed_q(policy_class: PolicyClass, probs: np.ndarray, gamma: float,
                   sign_scale: float, n: int, realized_ctx: np.ndarray,
                   scaled_past: np.ndarray, x: int) -> np.ndarray:
    """Expected mixed distribution at context x, playouts enumerated exactly."""
    table = policy_class.table
    d = policy_class.d
    k = realized_ctx.size
    m = n - k - 1
    fixed = _fixed_policy_values(table, realized_ctx, scaled_past)
    a_now = table[:, x]
    onehots = np.array([(a_now == j).astype(float) for j in range(d)])  # (d, F)
    eps = _sign_patterns(d * m).reshape(-1, d, m) if m else np.zeros((1, d, 0))
    sign_w = 1.0 / eps.shape[0]

    q_star = np.zeros(d)
    for combo in itertools.product(range(probs.size), repeat=m):
        ctx_w = float(np.prod(probs[list(combo)])) if m else 1.0
        if ctx_w == 0.0:
            continue
        A_fut = table[:, np.asarray(combo, dtype=np.int64)] if m else None
        fut = np.zeros((table.shape[0], eps.shape[0]))
        for i in range(m):
            fut += eps[:, :, i].T[A_fut[:, i]]
        base = fixed[:, None] + sign_scale * fut  # (F, P)
        psi = np.empty((eps.shape[0], d))
        for j in range(d):
            psi[:, j] = (base + onehots[j][:, None]).min(axis=0)
        for p in range(eps.shape[0]):
            q_star += ctx_w * sign_w * waterfill(psi[p])
    return mix_with_uniform(q_star, gamma)


def check_bistro_admissibility(
    policy_class: PolicyClass,
    probs,
    n: int,
    gamma: float,
    *,
    samples: int = 10_000,
    seed=0,
    sign_scale: float = 2.0,
    initial_checks: int = 1000,
) -> AdmissibilityReport:
    """Walk one sampled history and test the per-round inequality at each step,
    then test the horizon condition on random endpoints (exactly, by
    enumerating action sequences)."""
    probs = np.asarray(probs, dtype=float)
    _check_capacity(policy_class, probs, n)
    d = policy_class.d
    table = policy_class.table
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    path_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    universe = probs.size
    vertices = _vertices(d)

    realized: list[int] = []
    estimates: list[np.ndarray] = []
    steps: list[RecursiveStep] = []
    for t in range(1, n + 1):
        k = t - 1
        ctx_fixed = np.asarray(realized, dtype=np.int64)
        est_cols = np.asarray(estimates, dtype=float).reshape(k, d)

        # Relaxation of the shorter history: futures cover rounds t..n.
        m_rhs = n - k
        fut_ctx = rng.choice(universe, size=(samples, m_rhs), p=probs)
        fut_signs = rng.integers(0, 2, size=(samples, d, m_rhs)) * 2.0 - 1.0
        fixed_vals = _fixed_policy_values(table, ctx_fixed, est_cols)
        sups = _playout_sups(table, fixed_vals, fut_ctx, fut_signs, 2.0 / gamma)
        rhs = float(sups.mean()) + m_rhs * d * gamma
        se_rhs = float(sups.std(ddof=1) / np.sqrt(samples))

        # Adversary side, context by context with exact strategy expectations.
        lhs = 0.0
        var_lhs = 0.0
        qs_by_context = []
        for x in range(universe):
            q = _exact_mixed_q(policy_class, probs, gamma, sign_scale, n,
                               ctx_fixed, est_cols, x)
            qs_by_context.append(q)
            if probs[x] == 0.0:
                continue
            m_lhs = n - t
            fut_ctx_x = rng.choice(universe, size=(samples, m_lhs), p=probs)
            fut_signs_x = rng.integers(0, 2, size=(samples, d, m_lhs)) * 2.0 - 1.0
            ctx_now = np.append(ctx_fixed, x)
            sup_by_action = []
            for j in range(d):
                per_action = np.empty((vertices.shape[0], samples))
                for vi, c in enumerate(vertices):
                    est = np.zeros(d)
                    est[j] = c[j] / q[j]
                    cols = np.vstack([est_cols, est[None, :]])
                    vals = _fixed_policy_values(table, ctx_now, cols)
                    per_action[vi] = _playout_sups(
                        table, vals, fut_ctx_x, fut_signs_x, 2.0 / gamma
                    )
                sup_by_action.append(per_action)
            best = -np.inf
            best_draws = None
            for vi, c in enumerate(vertices):
                draws = np.zeros(samples)
                for j in range(d):
                    draws += q[j] * (c[j] + sup_by_action[j][vi])
                value = float(draws.mean()) + m_lhs * d * gamma
                if value > best:
                    best, best_draws = value, draws
            lhs += probs[x] * best
            var_lhs += (probs[x] ** 2) * float(best_draws.var(ddof=1)) / samples

        stderr = float(np.sqrt(var_lhs + se_rhs**2))
        steps.append(RecursiveStep(round_index=t, lhs=lhs, rhs=rhs, stderr=stderr))

        # Advance the sampled history one round.
        x_t = int(path_rng.choice(universe, p=probs))
        q_t = qs_by_context[x_t]
        c_t = path_rng.integers(0, 2, size=d).astype(float)
        y_t = int(path_rng.choice(d, p=q_t))
        est = np.zeros(d)
        est[y_t] = gamma * c_t[y_t] / q_t[y_t]
        realized.append(x_t)
        estimates.append(est)

    initial = _check_initial(
        lambda cols, ctx: -float(
            _fixed_policy_values(table, ctx, cols).min()
        ),
        policy_class, probs, n, gamma, rng, initial_checks,
    )
    return AdmissibilityReport(
        algorithm="bistro", gamma=gamma, samples=samples, steps=steps, initial=initial
    )


def _check_initial(endpoint_value, policy_class: PolicyClass, probs: np.ndarray,
                   n: int, gamma: float, rng: np.random.Generator,
                   count: int) -> InitialCondition:
    """E over action draws of the endpoint relaxation must dominate the
    negated benchmark; action sequences are enumerated exactly."""
    d = policy_class.d
    table = policy_class.table
    universe = probs.size
    min_margin = np.inf
    failures = 0
    action_seqs = list(itertools.product(range(d), repeat=n))
    for i in range(count):
        xs = rng.choice(universe, size=n, p=probs)
        if i % 2 == 0:
            costs = rng.integers(0, 2, size=(n, d)).astype(float)
        else:
            costs = rng.random((n, d))
        qs = np.array([mix_with_uniform(rng.dirichlet(np.ones(d)), gamma) for _ in range(n)])
        bench = -float(_fixed_policy_values(table, xs, costs).min())
        expectation = 0.0
        for actions in action_seqs:
            prob = float(np.prod(qs[np.arange(n), actions]))
            cols = np.zeros((n, d))
            cols[np.arange(n), actions] = costs[np.arange(n), actions] / qs[np.arange(n), actions]
            expectation += prob * endpoint_value(cols, xs)
        margin = expectation - bench
        min_margin = min(min_margin, margin)
        if margin < -INITIAL_TOL:
            failures += 1
    return InitialCondition(checks=count, min_margin=float(min_margin), failures=failures)


def check_reduction_admissibility(
    policy_class: PolicyClass,
    probs,
    n: int,
    gamma: float,
    *,
    eta: float | None = None,
    seed=0,
    initial_checks: int = 1000,
) -> AdmissibilityReport:
    """Same walk for the full-information reduction; every relaxation value is
    a finite log-sum-exp, so both sides are exact and stderr is zero."""
    probs = np.asarray(probs, dtype=float)
    _check_capacity(policy_class, probs, n)
    d = policy_class.d
    rel = ExpWeightsRelaxation(policy_class, n, eta=eta)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    path_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    universe = probs.size
    vertices = _vertices(d)

    def reduced_value(scaled_rows: np.ndarray, ctx: np.ndarray) -> float:
        t = len(scaled_rows)
        return rel.value(scaled_rows, ctx) / gamma + (n - t) * d * gamma

    xs: list[int] = []
    scaled: list[np.ndarray] = []
    steps: list[RecursiveStep] = []
    for t in range(1, n + 1):
        hist_rows = np.asarray(scaled, dtype=float).reshape(t - 1, d)
        hist_ctx = np.asarray(xs, dtype=np.int64)
        rhs = reduced_value(hist_rows, hist_ctx)
        lhs = 0.0
        qs_by_context = []
        for x in range(universe):
            q = mix_with_uniform(rel.strategy(hist_rows, hist_ctx, x), gamma)
            qs_by_context.append(q)
            if probs[x] == 0.0:
                continue
            ctx_now = np.append(hist_ctx, x)
            best = -np.inf
            for c in vertices:
                value = 0.0
                for j in range(d):
                    row = np.zeros(d)
                    row[j] = gamma * c[j] / q[j]
                    value += q[j] * (
                        c[j] + reduced_value(np.vstack([hist_rows, row[None, :]]), ctx_now)
                    )
                best = max(best, value)
            lhs += probs[x] * best
        steps.append(RecursiveStep(round_index=t, lhs=lhs, rhs=rhs, stderr=0.0))

        x_t = int(path_rng.choice(universe, p=probs))
        q_t = qs_by_context[x_t]
        c_t = path_rng.integers(0, 2, size=d).astype(float)
        y_t = int(path_rng.choice(d, p=q_t))
        row = np.zeros(d)
        row[y_t] = gamma * c_t[y_t] / q_t[y_t]
        xs.append(x_t)
        scaled.append(row)

    initial = _check_initial(
        lambda cols, ctx: rel.value(gamma * cols, ctx) / gamma,
        policy_class, probs, n, gamma, rng, initial_checks,
    )
    return AdmissibilityReport(
        algorithm="adversarial_reduction", gamma=gamma, samples=0,
        steps=steps, initial=initial,
    )


def expweights_recursive_gap(rel: ExpWeightsRelaxation, costs, contexts,
                             universe: int) -> float:
    """Worst-case per-round slack of the full-information potential.

    Returns max over contexts and vertex costs of
    q^T c + value(c_1..c_t) - value(c_1..c_{t-1}); admissibility requires
    this to be <= 0 (up to arithmetic noise). Vertices suffice because the
    expression is convex in c_t.
    """
    costs = np.asarray(costs, dtype=float).reshape(len(costs), rel.policy_class.d)
    before = rel.value(costs, contexts)
    worst = -np.inf
    for x in range(universe):
        q = rel.strategy(costs, contexts, x)
        ctx_now = np.append(np.asarray(contexts, dtype=np.int64), x)
        for c in _vertices(rel.policy_class.d):
            after = rel.value(np.vstack([costs, c[None, :]]), ctx_now)
            worst = max(worst, float(q @ c) + after - before)
    return worst


def expweights_initial_margin(rel: ExpWeightsRelaxation, costs, contexts) -> float:
    """value(c_1..c_n) + min_f L_n(f); admissibility requires >= 0."""
    costs = np.asarray(costs, dtype=float)
    L = rel._losses(costs, contexts)
    return rel.value(costs, contexts) + float(L.min())
