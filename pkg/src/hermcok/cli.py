"""Command line entry point: ``hermcok <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .classify import classify, verify_congruence
from .cokernel import cokernel_type, count_automorphisms, elementary_divisors
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_distribution_experiment,
    run_moment_experiment,
    run_universality_sweep,
)
from .oracles import (
    brute_force_automorphisms,
    brute_force_invertible_count,
    charsum_exhaustive,
    pairing_census,
)
from .partitions import Partition, partitions_up_to
from .ring import make_spec
from .sampler import EntryDistribution, HermitianMatrix
from .theory import TheoryContext, theory_table

log = logging.getLogger("hermcok")


def _int_list(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


def _add_common(ap):
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--ext", default="unram", choices=["unram", "ram-odd", "ram2-i", "ram2-ii"])
    ap.add_argument("--unit-param", type=int, default=None)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--n-ladder", type=_int_list, default=())
    ap.add_argument("--clamp", type=int, default=1)
    ap.add_argument("--trunc", type=int, default=None, help="working truncation M (default: the clamp)")
    ap.add_argument("--samples", type=int, default=10000)
    ap.add_argument("--sampler", choices=["haar", "eps"], default="haar")
    ap.add_argument("--dist-y", default=None, help='residue law, e.g. "0:0.7,1:0.3"')
    ap.add_argument("--dist-z", default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=["json", "csv"], default="json")


def _config(args):
    dy = EntryDistribution.parse(args.dist_y, args.p) if args.dist_y else None
    dz = EntryDistribution.parse(args.dist_z, args.p) if args.dist_z else None
    return ExperimentConfig(
        p=args.p,
        kind=args.ext,
        unit_param=args.unit_param,
        n=args.n,
        n_ladder=args.n_ladder,
        clamp=args.clamp,
        trunc=args.trunc,
        samples=args.samples,
        sampler=args.sampler,
        dist_y=dy,
        dist_z=dz,
        seed=args.seed,
        threads=args.threads,
        out=args.out,
        format=args.format,
    )


def _write(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _report_out(args, report):
    # experiments write --out themselves; otherwise print
    if not args.out:
        sys.stdout.write(report.dumps(args.format) + "\n")


def cmd_dist(args):
    _report_out(args, run_distribution_experiment(_config(args)))


def cmd_moments(args):
    targets = [Partition.parse(t) for t in args.targets]
    _report_out(args, run_moment_experiment(_config(args), targets))


def cmd_sweep(args):
    _report_out(args, run_universality_sweep(_config(args)))


def cmd_theory(args):
    spec = make_spec(args.p, args.ext, args.unit_param, 1)
    ctx = TheoryContext(spec, tail_terms=args.tail_terms, pairing_count_source=args.source)
    gammas = [Partition.parse(g) for g in args.gamma] if args.gamma else partitions_up_to(args.max_size, None, args.max_rank)
    rows = theory_table(ctx, gammas, args.n)
    report = ExperimentReport("theory", {"p": args.p, "ext": args.ext, "n": args.n}, rows, {})
    _write(args, report.dumps(args.format))


def cmd_oracle(args):
    q = args.q
    if args.target == "pairings":
        spec = make_spec(args.p, args.ext, args.unit_param, 1)
        gamma = Partition.parse(args.gamma)
        census = pairing_census(gamma, spec, args.budget)
        out = {
            "input": {"p": args.p, "ext": args.ext, "gamma": str(gamma)},
            "count": census.perfect,
            "classes": census.to_json()["classes"],
            "automorphisms": census.automorphisms,
            "orbit_stabilizer": census.identity_holds(),
            "budget_used": args.budget,
        }
    elif args.target == "auts":
        mu = Partition.parse(args.gamma)
        out = {
            "input": {"mu": str(mu), "q": q},
            "count": brute_force_automorphisms(mu, q, budget=args.budget),
            "closed_form": count_automorphisms(mu, q),
            "budget_used": args.budget,
        }
    elif args.target == "invertible":
        out = {
            "input": {"n": args.n, "p": args.p, "shape": args.shape},
            "count": brute_force_invertible_count(args.n, args.p, args.shape, args.budget),
            "budget_used": args.budget,
        }
    else:
        spec = make_spec(args.p, args.ext, args.unit_param, 1)
        gamma = Partition.parse(args.gamma)
        checked, bad, zeros = charsum_exhaustive(spec, args.n, gamma)
        out = {
            "input": {"p": args.p, "ext": args.ext, "n": args.n, "gamma": str(gamma)},
            "count": checked,
            "disagreements": bad,
            "fx_zero": zeros,
            "budget_used": checked,
        }
    _write(args, json.dumps(out, indent=2))


def _read_matrix(args):
    with open(args.matrix) if args.matrix != "-" else sys.stdin as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        spec = make_spec(data.get("p", args.p), data.get("ext", args.ext), data.get("unit_param", args.unit_param), data.get("M", args.trunc))
        rows = data["entries"]
    else:
        spec = make_spec(args.p, args.ext, args.unit_param, args.trunc)
        rows = data
    return spec, rows


def cmd_classify(args):
    spec, rows = _read_matrix(args)
    A = HermitianMatrix.from_json(rows, spec)
    Y, form = classify(A)
    out = {
        "Y": [[e.to_json() for e in row] for row in Y],
        "form": form.to_json(),
        "verified": verify_congruence(A, Y, form),
    }
    _write(args, json.dumps(out, indent=2))


def cmd_snf(args):
    from .ring import RingElem

    spec, rows = _read_matrix(args)
    A = [[RingElem.from_json(e, spec) for e in row] for row in rows]
    a = args.clamp if args.clamp else spec.M
    out = {"divisors": elementary_divisors(A, a), "type": str(cokernel_type(A, a))}
    _write(args, json.dumps(out, indent=2))


def build_parser():
    ap = argparse.ArgumentParser(prog="hermcok", description="Cokernels of random Hermitian matrices over p-adic rings")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="distribution of cok(X) (x) O/pi^a against theory")
    _add_common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("moments", help="empirical #Sur moments against the closed form")
    _add_common(p)
    p.add_argument("--targets", nargs="+", default=["1"], help='module types such as "1" or "1.1"')
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("sweep", help="TV distance to the limit along an n-ladder, Haar vs skewed")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theory", help="table of pairing counts, finite-n and limiting probabilities")
    _add_common(p)
    p.add_argument("--gamma", nargs="*", default=None)
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--max-rank", type=int, default=3)
    p.add_argument("--tail-terms", type=int, default=40)
    p.add_argument("--source", choices=["oracle", "cached"], default="cached")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("oracle", help="brute-force counts")
    _add_common(p)
    p.add_argument("target", choices=["pairings", "auts", "invertible", "charsum"])
    p.add_argument("--gamma", default="1")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--shape", choices=["hermitian", "symmetric"], default="hermitian")
    p.add_argument("--budget", type=int, default=2**22)
    p.set_defaults(func=cmd_oracle)

    for name, fn, helptext in [
        ("classify", cmd_classify, "congruence to a canonical form"),
        ("snf", cmd_snf, "elementary divisors of a matrix"),
    ]:
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("matrix", help='JSON file (rows of {"x","y"}) or "-" for stdin')
        p.set_defaults(func=fn)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "trunc", None) is None and args.command in ("classify", "snf"):
        args.trunc = max(args.clamp, 1)
    try:
        args.func(args)
    except (ValueError, RuntimeError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
