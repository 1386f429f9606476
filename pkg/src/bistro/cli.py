"""Command-line harness: run episode suites, estimate class complexity, check
relaxation admissibility, and self-test the oracles."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .admissibility import check_bistro_admissibility, check_reduction_admissibility
from .erm import ExactErmOracle
from .rademacher import categorical_sampler, rademacher_estimate, regret_bound, tune_gamma
from .runner import build_environment, build_policy_class, load_config, run_suite


def _parse_seeds(spec: str) -> list[int]:
    if "," in spec:
        return [int(s) for s in spec.split(",") if s]
    return list(range(int(spec)))


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.algorithm:
        config["algorithm"] = args.algorithm
    summary = run_suite(config, _parse_seeds(args.seeds), out_dir=args.out)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 1 if summary["violations"] else 0


def _cmd_rademacher(args) -> int:
    config = load_config(args.config)
    pc = build_policy_class(config)
    env = build_environment(config, pc)
    n, d = int(config["n"]), int(config["d"])
    est = rademacher_estimate(
        ExactErmOracle(pc), categorical_sampler(env.probs), n,
        samples=args.samples, seed=args.seed,
    )
    print(json.dumps({
        "rad_estimate": est.mean,
        "rad_stderr": est.std_error,
        "samples": est.samples,
        "tuned_gamma": tune_gamma(est.mean, n, d),
        "regret_bound": regret_bound(est.mean, n, d),
    }, indent=2, sort_keys=True))
    return 0


def _cmd_admissibility(args) -> int:
    config = load_config(args.config)
    if args.algorithm:
        config["algorithm"] = args.algorithm
    pc = build_policy_class(config)
    env = build_environment(config, pc)
    n, d = int(config["n"]), int(config["d"])
    gamma = config.get("gamma", "auto")
    gamma = 0.25 if gamma == "auto" else float(gamma)
    algo = config.get("algorithm", "bistro")
    if algo == "adversarial_reduction":
        report = check_reduction_admissibility(
            pc, env.probs, n, gamma, eta=config.get("eta"), seed=args.seed,
            initial_checks=args.initial_checks,
        )
    else:
        report = check_bistro_admissibility(
            pc, env.probs, n, gamma, samples=args.samples, seed=args.seed,
            sign_scale=float(config.get("sign_scale", 2.0)),
            initial_checks=args.initial_checks,
        )
    print(f"algorithm={report.algorithm} gamma={report.gamma} d={d} n={n}")
    for step in report.steps:
        flag = "ok" if step.passed() else "VIOLATED"
        print(
            f"  round {step.round_index}: lhs={step.lhs:.6f} rhs={step.rhs:.6f} "
            f"margin={step.margin:+.6f} stderr={step.stderr:.6f} [{flag}]"
        )
    init = report.initial
    print(
        f"  horizon condition: {init.checks} endpoints, min margin "
        f"{init.min_margin:+.3e}, failures {init.failures}"
    )
    print("PASS" if report.ok() else "FAIL")
    return 0 if report.ok() else 1


def _cmd_selftest(args) -> int:
    from .verify import selftest

    return 0 if selftest(verbose=True) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bistro",
        description="Relaxation-based contextual bandits: simulation and verification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an episode suite from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seeds", default="1", help="seed count k, or comma-separated list")
    p_run.add_argument("--out", default=None, help="directory for per-episode CSVs and summary")
    p_run.add_argument("--algorithm", default=None,
                       help="override the config's algorithm field")
    p_run.set_defaults(fn=_cmd_run)

    p_rad = sub.add_parser("rademacher", help="Monte-Carlo class complexity and tuned rate")
    p_rad.add_argument("--config", required=True)
    p_rad.add_argument("--samples", type=int, default=200)
    p_rad.add_argument("--seed", type=int, default=0)
    p_rad.set_defaults(fn=_cmd_rademacher)

    p_adm = sub.add_parser("admissibility", help="empirical per-round inequality check")
    p_adm.add_argument("--config", required=True)
    p_adm.add_argument("--samples", type=int, default=10_000)
    p_adm.add_argument("--seed", type=int, default=0)
    p_adm.add_argument("--initial-checks", type=int, default=1000)
    p_adm.add_argument("--algorithm", default=None)
    p_adm.set_defaults(fn=_cmd_admissibility)

    p_self = sub.add_parser("selftest", help="oracle-equivalence self checks")
    p_self.set_defaults(fn=_cmd_selftest)

    args = parser.parse_args(argv)
    np.seterr(all="raise", under="ignore")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
