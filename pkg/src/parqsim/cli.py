"""Command-line batch harness: ``parqsim <subcommand> [flags]``.

Subcommands: ht-decay, qft-fidelity, grover-curve, shor, bench. Lists are
comma-separated (``--p 1e-4,1e-3``). ``--config FILE`` reads ``key = value``
lines; explicit flags override the file.
"""
from __future__ import annotations

import argparse
import sys

from . import kernels
from .experiments import ExperimentSpec, read_config, run_experiment, to_csv
from .statevec import RegisterSizeError

SUBCOMMANDS = ("ht-decay", "qft-fidelity", "grover-curve", "shor", "bench")
BENCH_KINDS = {"qft": "qft-bench", "ht": "ht-bench", "gate": "gate-microbench"}

# flag -> ExperimentSpec field
_FLAGS = {
    "n": "n", "p": "p", "sigma": "sigma", "k": "k", "trials": "trials", "workers": "workers",
    "seed": "seed", "out": "out", "mode": "mode", "improvements": "improvements",
    "N": "N", "runs": "runs", "x": "x", "modulus": "modulus", "target": "target",
    "granularity": "granularity", "repeats": "repeats", "budget": "budget",
    "max_iterations": "max_iterations", "ancilla": "ancilla",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parqsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value settings file")
        sp.add_argument("--n", help="qubit counts, e.g. 10 or 20,22,24")
        sp.add_argument("--p", help="depolarizing probabilities")
        sp.add_argument("--sigma", help="operational-error standard deviations (radians)")
        sp.add_argument("--k", help="sweeps (HT) or iterations (Grover); the maximum is used")
        sp.add_argument("--trials", help="trajectories per sweep point")
        sp.add_argument("--workers", help="worker counts")
        sp.add_argument("--seed", help="master seed")
        sp.add_argument("--out", help="CSV output path (stdout when omitted)")
        sp.add_argument("--granularity", choices=("gate", "iteration"))
        sp.add_argument("--budget", help="memory budget in bytes")
        if name == "shor":
            sp.add_argument("--N", help="numbers to factor")
            sp.add_argument("--mode", choices=("semantic", "gate-level"))
            sp.add_argument("--improvements",
                            help="comma list of neighbor,gcd,small-factor,lcm or 'all'")
            sp.add_argument("--runs", help="independent factorizations per N")
            sp.add_argument("--max-iterations", dest="max_iterations")
        if name == "qft-fidelity":
            sp.add_argument("--modulus", help="N whose period-finding comb is transformed")
            sp.add_argument("--x", help="base of the modular exponentiation")
        if name == "grover-curve":
            sp.add_argument("--target", help="marked element")
            sp.add_argument("--ancilla", help="use the ancilla oracle (true/false)")
        if name == "bench":
            sp.add_argument("--kind", choices=sorted(BENCH_KINDS), default="qft")
            sp.add_argument("--repeats", help="timing repeats (median is reported)")
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    values = read_config(args.config) if args.config else {}
    for flag, key in _FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = str(v)
    kind = BENCH_KINDS[args.kind] if args.command == "bench" else args.command
    return ExperimentSpec.from_mapping(values.pop("kind", kind), values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        kernels.set_default_workers(spec.workers[0])
        rows = run_experiment(spec)
    except RegisterSizeError as exc:
        print(f"parqsim: refused: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"parqsim: error: {exc}", file=sys.stderr)
        return 1
    if not spec.out:
        sys.stdout.write(to_csv(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
