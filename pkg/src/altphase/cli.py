"""Command-line interface.

Subcommands: ``recover`` (one seeded instance, prints the trace), ``sweep-m``
(smallest measurement count reaching a target success rate), ``sweep-noise``
(error vs noise level), ``validate-lemmas`` (oracle table), and ``bench``
(kernel backend comparison).  Exit codes: 0 on success, 1 on a validation
problem, 2 when a lemma check fails.

A ``--config`` JSON file of key/value pairs overrides the command-line flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import __version__, backend
from .altmin import AltMinConfig, altmin_phase
from .harness import (
    ALGOS,
    MODELS,
    TrialConfig,
    emit_report,
    lemma_report_json,
    min_measurements_search,
    noise_sweep,
    run_trial,
    trial_seed,
    validate_lemmas,
)
from .measurements import build_instance


class _Parser(argparse.ArgumentParser):
    # flag misuse is a validation failure: exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--n", type=int, default=16, help="signal dimension")
    p.add_argument("--m", type=int, default=None, help="measurement count (default 8n)")
    p.add_argument("--model", choices=MODELS, default="gaussian")
    p.add_argument("--algo", choices=ALGOS, default="altmin")
    p.add_argument("--k", type=int, default=None, help="sparsity for --algo sparse")
    p.add_argument("--sigma", type=float, default=0.0, help="noise level")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--trials", type=int, default=20, help="trials per sweep point")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="write the report here")
    p.add_argument("--config", default=None,
                   help="JSON file whose keys override the flags above")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="altphase",
                     description="phase retrieval by alternating minimization")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("recover", help="run one seeded instance and print the trace")
    _add_common(p)

    p = sub.add_parser("sweep-m", help="search the smallest m reaching a success rate")
    _add_common(p)
    p.add_argument("--m-start", type=int, default=None, help="first m to probe (default 2n)")
    p.add_argument("--m-step", type=int, default=None, help="scan step (default n//2)")
    p.add_argument("--m-max", type=int, default=None, help="last m to probe (default 10n)")
    p.add_argument("--success-ratio", type=float, default=0.8)

    p = sub.add_parser("sweep-noise", help="mean recovery error per noise level")
    _add_common(p)
    p.add_argument("--sigmas", default="0,0.05,0.1,0.2",
                   help="comma-separated noise levels")

    p = sub.add_parser("validate-lemmas", help="run the oracle checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("bench", help="compare the compiled and pure kernel backends")
    _add_common(p)
    p.add_argument("--repeats", type=int, default=5, help="timed repetitions per case")
    return parser


def _apply_config_file(args) -> None:
    if getattr(args, "config", None) is None:
        return
    with open(args.config) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError("--config must contain a JSON object")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"--config: unknown key {key!r}")
        setattr(args, attr, value)


def _trial_config(args) -> TrialConfig:
    m = args.m if args.m is not None else 8 * args.n
    return TrialConfig(n=args.n, m=m, model=args.model, algo=args.algo,
                       sigma=args.sigma, k=args.k)


def _emit(report, args) -> None:
    if args.out:
        emit_report(report, args.format, args.out)
        print(f"wrote {args.format} report to {args.out}")


def _cmd_recover(args) -> int:
    config = _trial_config(args)
    config.validate()
    seed = trial_seed(args.seed, 0)
    instance = build_instance(config.model, config.n, config.m, config.sigma, seed)
    from .harness import _run_algorithm

    trace = _run_algorithm(config, instance)
    for t, res in enumerate(trace.residuals):
        line = f"iter {t:3d}  residual {res:.6e}"
        if trace.iterates_dist is not None:
            line += f"  dist {trace.iterates_dist[t]:.6e}"
        print(line)
    if trace.support is not None:
        print("support", list(trace.support))
    result = run_trial(config, seed)
    print(f"error_l2 {result.error_l2:.6e}  success {result.success}  "
          f"iterations {result.iterations}  wall {result.wall_time_s * 1e3:.1f} ms")
    if args.out:
        doc = {"trial": result.to_json(), "trace": trace.to_json()}
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote trace to {args.out}")
    return 0


def _cmd_sweep_m(args) -> int:
    config = _trial_config(args)
    m_start = args.m_start if args.m_start is not None else 2 * args.n
    m_step = args.m_step if args.m_step is not None else max(1, args.n // 2)
    m_max = args.m_max if args.m_max is not None else 10 * args.n
    report = min_measurements_search(config, m_start, m_step, m_max,
                                     trials_per_point=args.trials,
                                     master_seed=args.seed,
                                     success_ratio=args.success_ratio)
    for row in report.rows:
        print(f"m {int(row.param):5d}  success_rate {row.success_rate:.2f}  "
              f"mean_error {row.mean_error:.3e}")
    if report.metadata["found"]:
        print(f"smallest m with success rate >= {args.success_ratio}: "
              f"{report.metadata['min_m']}")
    else:
        print(f"no m in [{m_start}, {m_max}] reached success rate {args.success_ratio}")
    _emit(report, args)
    return 0


def _cmd_sweep_noise(args) -> int:
    config = _trial_config(args)
    sigmas = [float(s) for s in str(args.sigmas).split(",") if s.strip() != ""]
    report = noise_sweep(config, sigmas, trials_per_point=args.trials,
                         master_seed=args.seed)
    for row in report.rows:
        print(f"sigma {row.param:8.4f}  mean_error {row.mean_error:.4e}  "
              f"success_rate {row.success_rate:.2f}")
    _emit(report, args)
    return 0


def _cmd_validate_lemmas(args) -> int:
    checks = validate_lemmas(seed=args.seed, samples=args.samples)
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{c.name:<{width}}  {status}  value={c.value:.6g}  [{c.requirement}]")
    doc = lemma_report_json(checks, args.seed)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote lemma report to {args.out}")
    return 0 if doc["all_passed"] else 2


def _cmd_bench(args) -> int:
    config = _trial_config(args)
    config.validate()
    if config.model != "gaussian":
        print("bench: only the gaussian model exercises the dense kernels",
              file=sys.stderr)
        return 1
    seed = trial_seed(args.seed, 0)
    instance = build_instance(config.model, config.n, config.m, config.sigma, seed)
    op = instance.operator
    z = op.forward(instance.x_star)
    b = backend.apply_phases(z, instance.y)
    x0 = np.zeros(config.n, dtype=np.complex128)

    def time_best(fn):
        best = float("inf")
        for _ in range(args.repeats):
            start = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - start)
        return best

    rows = []
    for name in backend.available_backends():
        with backend.temporary_backend(name):
            rows.append((name, "apply_phases",
                         time_best(lambda: backend.apply_phases(z, instance.y))))
            rows.append((name, "cgnr_dense",
                         time_best(lambda: backend.cgnr_dense(
                             op.rows, op.matrix, b, x0, 1e-10, 4 * config.n))))
            rows.append((name, "altmin_phase",
                         time_best(lambda: altmin_phase(op, instance.y, AltMinConfig()))))
    print(f"n={config.n} m={config.m} repeats={args.repeats} "
          f"(best of {args.repeats}, seconds)")
    for name, op_name, seconds in rows:
        print(f"{name:>8}  {op_name:<14} {seconds:.6f}")
    if len(backend.available_backends()) < 2:
        print("compiled backend unavailable; nothing to compare against")
    else:
        for op_name in ("apply_phases", "cgnr_dense", "altmin_phase"):
            pure = next(s for b_, o, s in rows if b_ == "pure" and o == op_name)
            comp = next(s for b_, o, s in rows if b_ == "compiled" and o == op_name)
            print(f"speedup {op_name}: {pure / comp:.2f}x")
    if args.out:
        doc = [{"backend": b_, "op": o, "best_seconds": s} for b_, o, s in rows]
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


_COMMANDS = {
    "recover": _cmd_recover,
    "sweep-m": _cmd_sweep_m,
    "sweep-noise": _cmd_sweep_noise,
    "validate-lemmas": _cmd_validate_lemmas,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"altphase: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
