"""Command-line entry point.

Exit codes: 0 on success, 1 for validation or admissibility failures, 2 for
I/O, usage and format errors.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .bounds import AdmissibilityError, theoretical_delta_window
from .chain import ChainLaw, SampleFormatError, format_sample, parse_sample
from .estimator import estimate_tree
from .experiments import ConfigError, load_config, run_recovery
from .noise import PerturbedLaw, exact_delta_window, perturb, theorem1_certify
from .tree import (
    EMPTY_TOKEN,
    TreeFormatError,
    TreeValidationError,
    all_strings,
    compute_constants,
    load_tree,
    truncate,
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _read_input(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write_output(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_tree(args) -> int:
    tree = load_tree(args.tree)
    if args.action == "validate":
        print(f"valid contexts={len(tree)} height={tree.height} "
              f"complete={'yes' if tree.is_complete else 'no'} "
              f"irreducible={'yes' if tree.is_irreducible else 'no'}")
    elif args.action == "constants":
        c = compute_constants(tree)
        print(f"alpha={_fmt(c.alpha)}")
        for k, b in enumerate(c.beta_seq):
            print(f"beta_{k}={_fmt(b)}")
        print(f"beta={_fmt(c.beta_sum)}")
        print(f"beta_star={_fmt(c.beta_star)}")
        print(f"c={_fmt(c.c_const)}")
    else:
        if args.K is None:
            print("error: tree truncate requires --K", file=sys.stderr)
            return 2
        for w in sorted(truncate(tree, args.K), key=lambda w: (len(w), w)):
            print(w)
    return 0


def cmd_simulate(args) -> int:
    law = ChainLaw(load_tree(args.tree))
    path = law.sample(args.n, args.seed)
    header = {"seed": args.seed, "tree": law.tree.digest(), "n": args.n}
    _write_output(args.out, format_sample(path, header))
    return 0


def cmd_perturb(args) -> int:
    path, header = parse_sample(_read_input(args.input))
    out = perturb(path, args.eps, args.seed)
    head = {"seed": args.seed, "eps": repr(args.eps)}
    if "tree" in header:
        head["tree"] = header["tree"]
    _write_output(args.out, format_sample(out, head))
    return 0


def cmd_estimate(args) -> int:
    path, _ = parse_sample(_read_input(args.input))
    est = estimate_tree(path, args.delta, args.d)
    _write_output(args.out, est.serialize())
    return 0


def cmd_exact(args) -> int:
    law = PerturbedLaw(load_tree(args.tree), args.eps)
    if args.w is not None:
        words = ["" if args.w == EMPTY_TOKEN else args.w]
    else:
        words = [w for L in range(args.depth + 1) for w in all_strings(L)]
    lines = ["w\tq\tq0\tq1"]
    for w in words:
        q1 = law.conditional(1, w)
        lines.append(f"{w or EMPTY_TOKEN}\t{_fmt(law.q(w))}\t{_fmt(1 - q1)}\t{_fmt(q1)}")
    _write_output(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_certify(args) -> int:
    report = theorem1_certify(PerturbedLaw(load_tree(args.tree), args.eps), args.jmax)
    print("j\tmax_gap\tbound\tholds")
    for j, gap, bound, ok in report.rows():
        print(f"{j}\t{_fmt(gap)}\t{_fmt(bound)}\t{'yes' if ok else 'no'}")
    print(f"# max_gap={_fmt(report.max_gap)} bound={_fmt(report.bound)} "
          f"holds={'yes' if report.holds else 'no'}")
    return 0 if report.holds else 1


def cmd_window(args) -> int:
    law = ChainLaw(load_tree(args.tree))
    theo = theoretical_delta_window(law, args.eps, args.d)
    exact = exact_delta_window(PerturbedLaw(law, args.eps), args.d)
    for name, w in (("theoretical", theo), ("exact", exact)):
        print(f"{name}\tlow={_fmt(w.low)}\thigh={_fmt(w.high)}\t{'empty' if w.empty else 'nonempty'}")
    return 0


def cmd_experiment(args) -> int:
    report = run_recovery(load_config(args.config), workers=args.workers)
    _write_output(args.out, report.to_tsv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyvlmc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tree", help="validate, inspect or truncate a tree file")
    p.add_argument("action", choices=["validate", "constants", "truncate"])
    p.add_argument("--tree", required=True)
    p.add_argument("--K", type=int)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("simulate", help="sample the stationary chain")
    p.add_argument("--tree", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("perturb", help="flip a sample through the noise channel")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("estimate", help="estimate a context tree from a sample")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="exact law of the perturbed chain")
    p.add_argument("--tree", required=True)
    p.add_argument("--eps", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--w")
    g.add_argument("--depth", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("certify", help="exact perturbation gap against its bound")
    p.add_argument("--tree", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--jmax", type=int, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("window", help="theoretical and exact threshold windows")
    p.add_argument("--tree", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("experiment", help="seeded Monte Carlo recovery experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TreeFormatError, SampleFormatError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TreeValidationError, AdmissibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
