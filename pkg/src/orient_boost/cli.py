"""Command-line driver.

Subcommands: stats, decompose, sample, count, estimate, exact-expect, solve,
boost-formula, verify, experiment.  All randomness flows from one --seed;
when omitted a seed is generated, printed, and embedded in every output.
ORIENT_BOOST_THREADS sets the worker count and never affects numeric output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import bounds, counting, designs, reports, sampling
from .errors import OrientBoostError
from .orientations import (
    Orientation,
    as_fraction,
    classify,
    make_pattern,
    orientation_from_json,
    orientation_from_text,
    stats,
    tournament_from_hex_text,
    tournament_from_json,
)
from .rng import stream_for


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment run depends on; embedded in every sidecar."""

    pattern_kind: str
    pattern_n: int
    pattern_k: int | None
    design_file: str | None
    design_t: int | None
    base_file: str | None
    base_star_file: str | None
    samples: int
    exact: bool
    master_seed: int
    csv_path: str
    sidecar_path: str | None
    node_budget: int
    support_budget: int
    brute_budget: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        cfg = cls(**{f: obj[f] for f in cls.__dataclass_fields__})
        for path in (cfg.design_file, cfg.base_file, cfg.base_star_file):
            if path is not None and not os.path.exists(path):
                raise OrientBoostError(f"referenced file does not exist: {path}")
        for name in ("node_budget", "support_budget", "brute_budget"):
            if getattr(cfg, name) <= 0:
                raise OrientBoostError(f"{name} must be positive")
        if cfg.samples < 0 or (cfg.samples == 0 and not cfg.exact):
            raise OrientBoostError("need --samples >= 1 or --exact")
        return cfg


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(8), "big")
    print(f"generated seed: {seed}", file=sys.stderr)
    return seed


def _load_orientation(path: str, fmt: str | None) -> Orientation:
    with open(path) as fh:
        text = fh.read()
    if fmt == "json" or (fmt is None and path.endswith(".json")):
        return orientation_from_json(text)
    return orientation_from_text(text)


def _load_tournament(path: str):
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return tournament_from_json(text)
    return tournament_from_hex_text(text)


def _pattern_from_args(args, seed: int) -> Orientation:
    if getattr(args, "pattern_file", None):
        return _load_orientation(args.pattern_file, None)
    return make_pattern(args.pattern, args.n, k=getattr(args, "k", None), seed=seed)


def _design_from_args(args, n: int) -> tuple[designs.Decomposition, str]:
    if getattr(args, "design", None):
        with open(args.design) as fh:
            d = designs.decomposition_from_json(fh.read())
        report = designs.validate(d)
        if not report.ok:
            raise OrientBoostError(f"design file invalid: {report.first_violation}")
        return d, f"file:{os.path.basename(args.design)}"
    t = args.t
    budget = getattr(args, "node_budget", 2_000_000)
    if n % 2 == 1:
        return designs.adjusted_decomposition(n, t, node_budget=budget), f"adjusted(t={t})"
    d = designs.extend_to_even(designs.adjusted_decomposition(n - 1, t, node_budget=budget))
    return d, f"adjusted+even(t={t})"


def _bases_from_args(args, t: int) -> sampling.BaseTournaments:
    r = _load_tournament(args.base) if getattr(args, "base", None) else None
    rstar = _load_tournament(args.base_star) if getattr(args, "base_star", None) else None
    if r is None and rstar is None:
        return sampling.BaseTournaments.circulant(t)
    return sampling.BaseTournaments(
        r if r is not None else sampling.circulant_regular_tournament(t),
        rstar if rstar is not None else sampling.circulant_regular_tournament(2 * t - 1),
    )


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_stats(args) -> int:
    h = _load_orientation(args.input, args.format)
    s = stats(h)
    flags = classify(h)
    _emit({
        "n": h.n, "e": s.e, "plus": s.plus, "minus": s.minus,
        "c": s.c, "i": s.i, "f": s.f, "g": s.g, "maxdeg": s.maxdeg,
        "even": flags.even, "eulerian": flags.eulerian, "balanced": flags.balanced,
        "k_regular": flags.k_regular,
    })
    return 0


def _cmd_decompose(args) -> int:
    if args.kind == "sts":
        d = designs.steiner_triple_system(args.n)
    elif args.kind == "pg":
        d = designs.projective_plane_decomposition(args.q)
    else:
        if args.n % 2 == 1:
            d = designs.adjusted_decomposition(args.n, args.t, node_budget=args.node_budget)
        else:
            d = designs.extend_to_even(
                designs.adjusted_decomposition(args.n - 1, args.t, node_budget=args.node_budget)
            )
    if args.even:
        d = designs.extend_to_even(d)
    report = designs.validate(d)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(d.to_json())
    else:
        print(d.to_json())
    _emit({"n": d.n, "t": d.t, "blocks": len(d.blocks), "valid": report.ok,
           "first_violation": report.first_violation})
    return 0 if report.ok else 1


def _cmd_validate(args) -> int:
    with open(args.input) as fh:
        d = designs.decomposition_from_json(fh.read())
    report = designs.validate(d)
    _emit({"valid": report.ok, "failures": list(report.failures)})
    return 0 if report.ok else 1


def _cmd_sample(args) -> int:
    seed = _resolve_seed(args)
    if args.design:
        with open(args.design) as fh:
            d = designs.decomposition_from_json(fh.read())
    elif args.n is None:
        raise ValueError("need either --design or --n")
    else:
        d, _ = _design_from_args(argparse.Namespace(design=None, t=args.t, node_budget=args.node_budget), args.n)
    bases = _bases_from_args(args, d.t)
    chunks = []
    for index in range(args.samples):
        t = sampling.sample(d, bases, sampling.SampleSeed(seed, index))
        chunks.append(t.to_json() + "\n" if args.format == "json" else t.to_hex_text() + "\n")
    data = "".join(chunks)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)
    return 0


def _cmd_count(args) -> int:
    t = _load_tournament(args.tournament)
    method = args.method
    out: dict = {"n": t.n, "method": method}
    if args.pattern == "cycle" and method in ("dp", "auto") and t.n > 3:
        cycles = counting.count_hamilton_cycles(t)
        out |= {"pattern": "cycle", "cycles": cycles, "labeled_copies": cycles * t.n}
    elif args.pattern == "path" and method in ("dp", "auto"):
        paths = counting.count_hamilton_paths(t)
        out |= {"pattern": "path", "paths": paths, "labeled_copies": paths}
    else:
        seed = args.seed if args.seed is not None else 0
        h = _pattern_from_args(args, seed)
        out |= {"pattern": args.pattern,
                "labeled_copies": counting.count_labeled_copies(h, t, budget_n=args.brute_budget)}
    _emit(out)
    return 0


def _report_record(pattern_label: str, design_label: str, seed: int, rep) -> dict:
    return {
        "n": rep.n, "t": rep.t, "pattern": pattern_label, "design": design_label,
        "samples": rep.samples, "baseline_log2": rep.baseline_log2,
        "estimate_log2": rep.estimate_log2, "ratio": rep.ratio,
        "stderr_ratio": rep.ratio_stderr, "typical_frac": rep.typical_fraction,
        "seed": seed,
    }


def _pattern_label(args) -> str:
    if getattr(args, "pattern_file", None):
        return f"file:{os.path.basename(args.pattern_file)}"
    label = args.pattern
    if getattr(args, "k", None):
        label += f"{args.k}"
    return label


def _cmd_estimate(args) -> int:
    seed = _resolve_seed(args)
    h = _pattern_from_args(args, seed)
    d, design_label = _design_from_args(args, h.n)
    bases = _bases_from_args(args, d.t)
    rep = counting.estimate_expected_copies(
        h, d, bases, samples=args.samples, master_seed=seed,
        workers=counting.worker_count_from_env(),
    )
    _emit(_report_record(_pattern_label(args), design_label, seed, rep) | {
        "baseline": str(rep.baseline), "capture_means": list(rep.capture_means),
    })
    return 0


def _cmd_exact_expect(args) -> int:
    seed = args.seed if args.seed is not None else 0
    h = _pattern_from_args(args, seed)
    d, design_label = _design_from_args(args, h.n)
    bases = _bases_from_args(args, d.t)
    summary = counting.exact_copy_summary(h, d, bases, budget_n=args.brute_budget)
    baseline = counting.baseline_expected_copies(h)
    _emit({
        "n": h.n, "t": d.t, "pattern": _pattern_label(args), "design": design_label,
        "expectation": str(summary.expectation), "baseline": str(baseline),
        "ratio": str(summary.ratio), "ratio_float": float(summary.ratio),
        "typical_fraction": str(summary.typical_fraction),
        "capture_averages": [str(x) for x in summary.capture_averages],
    })
    return 0


def _cmd_solve(args) -> int:
    sol = bounds.solve_parameters(as_fraction(args.eps), args.k)
    _emit({"t": sol.t, "delta": float(sol.delta), "rho": float(sol.rho),
           "delta_exact": str(sol.delta), "eps": str(sol.eps), "k": sol.k})
    return 0


def _cmd_boost_formula(args) -> int:
    _emit({"k": args.k, "t": args.t, "value": bounds.kreg_boost_formula(args.k, args.t)})
    return 0


def _cmd_verify(args) -> int:
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1

    for t in (3, 5, 7):
        chk = bounds.verify_relabel_probabilities(sampling.circulant_regular_tournament(t))
        check(f"relabeling probabilities, circulant t={t}", chk.ok)
    chk = bounds.verify_relabel_probabilities(sampling.quadratic_residue_tournament(7))
    check("relabeling probabilities, quadratic-residue t=7", chk.ok)

    from .orientations import random_orientation
    ok = True
    for sd in range(200):
        h = random_orientation(11, 14, seed=sd)
        s = stats(h)
        ok = ok and s.plus == 3 * s.f + s.c + s.g and s.minus == 2 * s.g + s.i
    check("pair/triangle statistic identities on 200 seeded patterns", ok)

    check("gcd identity for odd t in [3,99]",
          all(designs.gcd_identity_holds(t) for t in range(3, 100, 2)))

    fano = designs.steiner_triple_system(7)
    bases = sampling.BaseTournaments.circulant(3)
    c7 = make_pattern("cycle", 7)
    summary = counting.exact_copy_summary(c7, fano, bases)
    acc = Fraction(0)
    for t, w in sampling.enumerate_support(fano, bases):
        acc += w * counting.count_hamilton_cycles(t) * 7
    check("exact expectation equals support-weighted count (7-cycle)", acc == summary.expectation)

    kernel = counting.CopyKernel(c7, fano, bases)
    ok = True
    for index in range(500):
        pi = stream_for(11, index).permutation(7)
        if kernel.ratio(pi) != kernel.ratio(pi, method="enumerate"):
            ok = False
    check("closed-form factors equal enumerated factors on 500 sampled copies", ok)

    ok = all(sampling.sample(fano, bases, sampling.SampleSeed(5, i)).is_regular() for i in range(100))
    check("sampled tournaments are regular (100 seeds)", ok)

    print(f"{failures} failure(s)" if failures else "all checks passed")
    return 1 if failures else 0


def _cmd_experiment(args) -> int:
    seed = _resolve_seed(args)
    cfg = ExperimentConfig(
        pattern_kind=args.pattern, pattern_n=args.n, pattern_k=args.k,
        design_file=args.design, design_t=args.t,
        base_file=args.base, base_star_file=args.base_star,
        samples=args.samples, exact=args.exact, master_seed=seed,
        csv_path=args.output, sidecar_path=args.sidecar,
        node_budget=args.node_budget, support_budget=args.support_budget,
        brute_budget=args.brute_budget,
    )
    cfg = ExperimentConfig.from_dict(cfg.to_dict())  # validation pass
    h = _pattern_from_args(args, seed)
    d, design_label = _design_from_args(args, h.n)
    bases = _bases_from_args(args, d.t)
    baseline = counting.baseline_expected_copies(h)

    if args.exact:
        summary = counting.exact_copy_summary(h, d, bases, budget_n=args.brute_budget)
        record = {
            "n": h.n, "t": d.t, "pattern": _pattern_label(args), "design": design_label,
            "samples": 0, "baseline_log2": counting.log2_fraction(baseline),
            "estimate_log2": counting.log2_fraction(summary.expectation),
            "ratio": float(summary.ratio), "stderr_ratio": 0.0,
            "typical_frac": float(summary.typical_fraction), "seed": seed,
        }
        extra = {"expectation": str(summary.expectation), "ratio_exact": str(summary.ratio)}
    else:
        rep = counting.estimate_expected_copies(
            h, d, bases, samples=args.samples, master_seed=seed,
            workers=counting.worker_count_from_env(),
        )
        record = _report_record(_pattern_label(args), design_label, seed, rep)
        extra = {"capture_means": list(rep.capture_means)}

    sidecar = {
        "config": cfg.to_dict(),
        "derived": {
            "t": d.t,
            "delta": str(Fraction(1, 4 * (d.t - 2))),
            "baseline": str(baseline),
            "base_tournament_hex": bases.r.to_hex_text(),
            "base_star_tournament_hex": bases.rstar.to_hex_text(),
            "design_blocks": len(d.blocks),
        },
        "results": [record | extra],
    }
    reports.write_report([record], args.output, sidecar, args.sidecar)
    _emit({"written": args.output, **record})
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_pattern_args(p, *, with_file: bool = True) -> None:
    p.add_argument("--pattern", default="cycle",
                   choices=["cycle", "path", "matching", "k_regular_random"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="degree for k_regular_random")
    if with_file:
        p.add_argument("--pattern-file", default=None, help="orientation file overriding --pattern")


def _add_design_args(p) -> None:
    p.add_argument("--design", default=None, help="decomposition JSON file")
    p.add_argument("--t", type=int, default=3, help="block size when building a design")
    p.add_argument("--base", default=None, help="regular tournament file for size-t blocks")
    p.add_argument("--base-star", default=None, help="regular tournament file for size-(2t-1) blocks")


def _add_budget_args(p) -> None:
    p.add_argument("--node-budget", type=int, default=2_000_000)
    p.add_argument("--support-budget", type=int, default=1_000_000)
    p.add_argument("--brute-budget", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orient-boost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="statistics of an orientation file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["json", "text"], default=None)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("decompose", help="build and validate a decomposition")
    p.add_argument("--kind", choices=["auto", "sts", "pg"], default="auto")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--q", type=int, default=4, help="plane order for --kind pg")
    p.add_argument("--even", action="store_true", help="extend the result by one vertex")
    p.add_argument("--output", default=None)
    _add_budget_args(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("validate", help="validate a decomposition file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("sample", help="draw block-randomized tournaments")
    p.add_argument("--design", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--base", default=None)
    p.add_argument("--base-star", default=None)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=["json", "hex"], default="json")
    p.add_argument("--output", default=None)
    _add_budget_args(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("count", help="exact labeled-copy counts in a tournament file")
    _add_pattern_args(p)
    p.add_argument("--tournament", required=True)
    p.add_argument("--method", choices=["auto", "brute", "dp"], default="auto")
    p.add_argument("--seed", type=int, default=None)
    _add_budget_args(p)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("estimate", help="Monte Carlo expected-copy estimate")
    _add_pattern_args(p)
    _add_design_args(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    _add_budget_args(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("exact-expect", help="exact expected copies on tiny instances")
    _add_pattern_args(p)
    _add_design_args(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--brute-budget", type=int, default=9)
    p.add_argument("--node-budget", type=int, default=2_000_000)
    p.add_argument("--support-budget", type=int, default=1_000_000)
    p.set_defaults(func=_cmd_exact_expect)

    p = sub.add_parser("solve", help="least odd block size for the target inequalities")
    p.add_argument("--eps", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("boost-formula", help="finite-t boost product for k-regular patterns")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.set_defaults(func=_cmd_boost_formula)

    p = sub.add_parser("verify", help="run the identity/oracle check suites")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("experiment", help="end-to-end run producing a CSV report")
    _add_pattern_args(p)
    _add_design_args(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exact", action="store_true")
    group.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--sidecar", default=None)
    _add_budget_args(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OrientBoostError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
