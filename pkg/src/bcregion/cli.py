"""Command-line interface: ``bcregion <command> [options]``.

Exit codes: 0 success, 1 decomposition check failed, 2 usage error,
3 model validation error, 4 capacity error.

``--format machine`` prints tab-separated records with 12 significant
digits and is byte-reproducible for fixed seeds; ``--format human``
prints aligned tables with 6 decimals.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import constraints, mcsim, models, region, setfam
from .fmt import fmt_human, fmt_sig
from .infodist import CapacityError, ModelValidationError, build_joint

EXIT_OK, EXIT_UNVERIFIED, EXIT_USAGE, EXIT_VALIDATION, EXIT_CAPACITY = 0, 1, 2, 3, 4
BUILTIN_PREFIX = "builtin:"


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- parsing

def load_model(ref: str):
    """A model file path, or ``builtin:NAME`` for a bundled model."""
    if ref.startswith(BUILTIN_PREFIX):
        name = ref[len(BUILTIN_PREFIX):]
        if name not in models.BUNDLED:
            raise UsageError(f"unknown bundled model {name!r}; choose from {', '.join(models.BUNDLED)}")
        return models.bundled(name)
    path = Path(ref)
    if not path.is_file():
        raise UsageError(f"model file not found: {ref}")
    return models.load(path)


def parse_floats(text: str, what: str) -> np.ndarray:
    try:
        vals = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not np.all(np.isfinite(vals)):
        raise UsageError(f"{what}: values must be finite")
    return vals


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated receivers, got {text!r}") from None


def parse_weights(text: str, k_total: int) -> np.ndarray:
    w = parse_floats(text, "--weights")
    if w.size != k_total:
        raise UsageError(f"--weights: expected {k_total} values, got {w.size}")
    return w


def parse_rates(text: str, d, k_total: int) -> dict:
    """``margin:X`` for balanced rates with X bits of slack, or ``S=r,S=r,...``."""
    if text.startswith("margin:"):
        margin = parse_floats(text[len("margin:"):], "--rates margin")
        if margin.size != 1 or margin[0] < 0:
            raise UsageError("--rates margin: expected one nonnegative number")
        return mcsim.margin_rates(d, float(margin[0]))
    rates = {}
    for item in text.split(";" if k_total > 9 else ","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"--rates: expected SUBSET=RATE, got {item!r}")
        key, val = item.split("=", 1)
        try:
            rates[setfam.parse_subset(key, k_total)] = float(val)
        except ValueError as exc:
            raise UsageError(f"--rates: {exc}") from None
    return rates


# ----------------------------------------------------------------- output

def emit(lines) -> None:
    for line in lines:
        sys.stdout.write(line + "\n")


def table(rows: list[list[str]]) -> list[str]:
    if not rows:
        return []
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def system_lines(sys_: constraints.RegionSystem, fmt: str) -> list[str]:
    if fmt == "machine":
        header = "#tag\tsense\t" + " ".join(v.label(sys_.k_total) for v in sys_.variables) + "\tbound"
        return [header] + sys_.records()
    rows = [["constraint", "inequality", "bound"]]
    for ineq in sys_.inequalities:
        lhs = " + ".join(v.label(sys_.k_total) for v, _ in ineq.coeffs)
        rows.append([constraints.provenance_tag(ineq.provenance, sys_.k_total),
                     f"{lhs} {ineq.sense}", fmt_human(ineq.bound)])
    return table(rows)


def value_str(res, fmt: str) -> str:
    if res.status != "optimal":
        return res.status
    return fmt_sig(res.value) if fmt == "machine" else fmt_human(res.value)


# ---------------------------------------------------------------- commands

def cmd_decompose(args) -> int:
    k = args.k
    try:
        t_list = parse_ints(args.t, "--t")
        pi = tuple(parse_ints(args.pi, "--pi"))
        t = setfam.subset(*t_list)
        if sorted(pi) != sorted(t_list) or len(set(pi)) != len(pi):
            raise UsageError("--pi must be an ordering of the receivers in --t")
        report = setfam.verify_decomposition(t, pi, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = []
    for i, block in enumerate(report.blocks):
        fam = setfam.format_family(block, k)
        lines.append(f"block\t{i}\t{fam}" if args.format == "machine" else f"B_pi({i}) = {fam}")
    verdict = "verified" if report.ok else "FAILED"
    lines.append(f"verdict\t{verdict}" if args.format == "machine" else f"decomposition {verdict}")
    lines.extend(f"violation\t{v}" for v in report.violations)
    emit(lines)
    return EXIT_OK if report.ok else EXIT_UNVERIFIED


def cmd_region(args) -> int:
    d = build_joint(load_model(args.model))
    emit(system_lines(constraints.theorem1_system(d), args.format))
    return EXIT_OK


def cmd_corollary3(args) -> int:
    spec = load_model(args.model)
    if spec.k_total != 3:
        raise UsageError(f"corollary3 needs a 3-receiver model, got K={spec.k_total}")
    emit(system_lines(constraints.corollary3_system(build_joint(spec)), args.format))
    return EXIT_OK


def _support_lines(label: str, res, witness, fmt: str) -> list[str]:
    if fmt == "machine":
        line = f"{label}\t{res.status}\t{value_str(res, fmt)}"
        if witness is not None:
            line += "\t" + ",".join(fmt_sig(x) for x in witness)
        return [line]
    out = [f"{label}: {value_str(res, fmt)}"]
    if witness is not None:
        out.append("witness: " + ", ".join(f"R{k + 1}={fmt_human(x)}" for k, x in enumerate(witness)))
    return out


def cmd_support(args) -> int:
    spec = load_model(args.model)
    w = parse_weights(args.weights, spec.k_total)
    sys_ = constraints.theorem1_system(build_joint(spec))
    res = region.support(sys_, w)
    wit = region.witness_point(sys_, res) if res.ok else None
    emit(_support_lines("support", res, wit, args.format))
    return EXIT_OK


def cmd_project(args) -> int:
    spec = load_model(args.model)
    w = parse_weights(args.weights, spec.k_total)
    d = build_joint(spec)
    res = region.projected_support(d, w)
    wit = None
    if res.ok:
        variables, _, _ = region.projected_system(d)
        wit = np.zeros(spec.k_total)
        for v, x in zip(variables, res.witness):
            if v.kind == "Rsplit":
                wit[v.receiver - 1] += x
    emit(_support_lines("projected", res, wit, args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    a = constraints.theorem1_system(build_joint(load_model(args.model_a)))
    b = constraints.theorem1_system(build_joint(load_model(args.model_b)))
    if a.k_total != b.k_total:
        raise UsageError("models have different receiver counts")
    if args.dirs < 0:
        raise UsageError("--dirs must be >= 0")
    rep = region.compare_regions(a, b, args.dirs, args.seed)
    summ = rep.summary()
    if args.format == "machine":
        lines = [f"#seed={args.seed}\tdirs={args.dirs}", "#direction\tvalue_a\tvalue_b\tgap"]
        lines += rep.records()
        if summ["count"]:
            lines.append(f"summary\tmin={fmt_sig(summ['min'])}\tmax={fmt_sig(summ['max'])}"
                         f"\tmean={fmt_sig(summ['mean'])}\tcontained={str(rep.contained).lower()}")
        else:
            lines.append("summary\tcount=0\tcontained=true")
    else:
        rows = [["direction", "value_a", "value_b", "gap"]]
        for w, va, vb, g in zip(rep.directions, rep.values_a, rep.values_b, rep.gaps):
            rows.append(["(" + ", ".join(f"{x:.4f}" for x in w) + ")", fmt_human(va), fmt_human(vb), fmt_human(g)])
        lines = [f"seed {args.seed}, {args.dirs} directions"] + table(rows)
        if summ["count"]:
            lines.append(f"gap min {fmt_human(summ['min'])}  max {fmt_human(summ['max'])}"
                         f"  mean {fmt_human(summ['mean'])}")
        lines.append("region b inside region a: " + ("yes" if rep.contained else "no"))
    emit(lines)
    return EXIT_OK


def cmd_optimize(args) -> int:
    spec = load_model(args.model)
    w = parse_weights(args.weights, spec.k_total)
    if args.budget < 1:
        raise UsageError("--budget must be >= 1")
    res = region.optimize_pmf(spec, w, args.budget, args.seed)
    if args.format == "machine":
        lines = [f"#seed={args.seed}\tbudget={args.budget}",
                 f"value\t{fmt_sig(res.value)}",
                 "pmf\t" + ",".join(fmt_sig(p) for p in res.pmf)]
    else:
        lines = [f"best weighted sum rate after {res.evaluations} evaluations: {fmt_human(res.value)} bits",
                 "pmf: " + " ".join(f"{p:.6f}" for p in res.pmf)]
    if args.out:
        Path(args.out).write_text(models.dumps(spec.with_pmf(res.pmf)))
    emit(lines)
    return EXIT_OK


def cmd_simulate_cover(args) -> int:
    spec = load_model(args.model)
    k = spec.k_total
    d = build_joint(spec)
    rates = parse_rates(args.rates, d, k)
    if args.eps is not None:
        eps = tuple(parse_floats(args.eps, "--eps"))
    else:
        eps = mcsim.default_eps(k, args.eps_base)
    ns = parse_ints(args.n, "--n")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    lines = []
    if args.format == "machine":
        lines.append(f"#seed={args.seed}\teps=" + ",".join(fmt_sig(e) for e in eps))
    for n in ns:
        cfg = mcsim.CoverTrialConfig(n=n, rates=rates, eps=eps, trials=args.trials, seed=args.seed)
        try:
            cfg.validate(k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        est = mcsim.estimate_cover_failure(d, cfg, workers=args.workers)
        if args.format == "machine":
            lines.append(est.record(k))
        else:
            lines.append(f"n={n:3d}  failures {est.failures}/{est.trials}  estimate {fmt_human(est.estimate)}"
                         f"  95% CI [{fmt_human(est.low)}, {fmt_human(est.high)}]")
    emit(lines)
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = load_model(args.model)
    if args.normalize:
        text = models.dumps(models.normalize(spec))
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        emit([f"valid\tK={spec.k_total}" if args.format == "machine" else f"model is valid (K={spec.k_total})"])
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("machine", "human"), default="human",
                        help="output format (default: human)")
    common.add_argument("-v", "--verbose", action="store_true", help="log clamping and LP warnings")

    p = argparse.ArgumentParser(prog="bcregion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        sp.set_defaults(func=func)
        return sp

    def model_arg(sp, flag="--model"):
        sp.add_argument(flag, required=True, help="model file or builtin:NAME")

    sp = add("decompose", cmd_decompose, "list the blocks B_pi(i) and verify the decomposition")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--t", required=True, help="receivers, e.g. 1,2,3")
    sp.add_argument("--pi", required=True, help="ordering of T, e.g. 2,1,3")

    model_arg(add("region", cmd_region, "print the sum-rate region inequalities"))
    model_arg(add("corollary3", cmd_corollary3, "print the explicit 3-receiver region"))
    for name, func, help_ in (("support", cmd_support, "support function of the region"),
                              ("project", cmd_project, "support of the split-rate system")):
        sp = add(name, func, help_)
        model_arg(sp)
        sp.add_argument("--weights", required=True, help="one weight per receiver")

    sp = add("compare", cmd_compare, "compare two regions in random directions")
    model_arg(sp, "--model-a")
    model_arg(sp, "--model-b")
    sp.add_argument("--dirs", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("optimize", cmd_optimize, "local search over the auxiliary pmf")
    model_arg(sp)
    sp.add_argument("--weights", required=True)
    sp.add_argument("--budget", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write the model with the best pmf here")

    sp = add("simulate-cover", cmd_simulate_cover, "Monte Carlo covering failure probability")
    model_arg(sp)
    sp.add_argument("--n", required=True, help="blocklength(s), e.g. 8,12,16,20")
    sp.add_argument("--rates", required=True, help="SUBSET=RATE,... or margin:BITS")
    sp.add_argument("--eps", help="eps_1,...,eps_K (strictly decreasing)")
    sp.add_argument("--eps-base", type=float, default=mcsim.DEFAULT_EPS_BASE)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1, help="worker processes (output does not depend on it)")

    sp = add("validate", cmd_validate, "check a model file")
    model_arg(sp)
    sp.add_argument("--normalize", action="store_true", help="print the renormalized model")
    sp.add_argument("--out", help="write the normalized model here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bcregion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelValidationError as exc:
        print(f"bcregion: invalid model: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"bcregion: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
