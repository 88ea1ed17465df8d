"""Command-line surface: bound search, full-LP runs, oracle queries,
certificate verification, eta sweeps, and problem-file emission.

Every computing command writes a manifest describing the exact inputs,
configuration, and output digests needed to reproduce the run.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile
import time
from fractions import Fraction

from . import __version__
from . import lp as lpmod
from .inequalities import count_elemental, elemental_specs
from .problemfile import format_problem, parse_problem, problem_digest
from .regen import LayeredOracle, build_regen, inner_bound_points
from .search import SearchConfig, render_stats, run_search, sweep_eta
from .terms import EncodingError, format_rational, parse_rational

MATERIALIZE_CAP = 16


def _atomic_write(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".entrobound-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _sha256(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def _write_manifest(path: str, command: str, config: dict,
                    inputs: dict, outputs: dict[str, str]) -> None:
    lines = ["manifest-format: 1",
             f"command: {command}",
             f"entrobound-version: {__version__}",
             f"python-version: {sys.version.split()[0]}",
             f"timestamp-utc: {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}"]
    for key, value in config.items():
        lines.append(f"config {key}: {value}")
    for key, value in inputs.items():
        lines.append(f"input {key}: {value}")
    for out_path, content in outputs.items():
        lines.append(f"output {out_path}: sha256 {_sha256(content)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _problem_from_flags(args) -> tuple[str, object]:
    if getattr(args, "problem_file", None):
        with open(args.problem_file) as fh:
            text = fh.read()
        return text, parse_problem(text)
    spec = build_regen(args.n, args.repr)
    problem = spec.to_problem()
    return format_problem(problem), problem

def _search_config(args) -> SearchConfig:
    oracles = tuple(LayeredOracle(args.n, r) for r in args.filter_r)
    return SearchConfig(kappa_init=args.kappa, kappa_max=args.kappa_max,
                        max_episodes=args.episodes,
                        growth_rounds=args.growth_rounds,
                        pairs_per_round=args.pairs_per_round,
                        walks_per_round=args.walks_per_round,
                        det_samples=args.det_samples,
                        max_pool=args.max_pool, stagnation=args.stagnation,
                        seed=args.seed, filter_oracles=oracles,
                        symmetry=args.symmetry,
                        float_steer=args.float_steer,
                        max_pivots=args.max_pivots or None)


def _print_bound(eta: Fraction, bound: Fraction) -> None:
    a, b, c = lpmod.bound_in_rate_form(eta, bound)
    print(f"bound: alpha + {format_rational(eta)}*beta >= "
          f"{format_rational(bound)} (= {float(bound):.6f})")
    print(f"bound (integer form): {a}*alpha + {b}*beta >= {c}")


def cmd_bound(args) -> int:
    problem_text, problem = _problem_from_flags(args)
    config = _search_config(args)
    if args.emit_problem:
        _atomic_write(args.emit_problem, problem_text)
    eta = parse_rational(args.eta)
    stop_at = parse_rational(args.target) if args.target else None
    outcome = run_search(problem_text, eta, config, stop_at=stop_at)
    _print_bound(eta, outcome.bound)
    outputs = {}
    cert_text = outcome.certificate.render()
    if args.out_cert:
        _atomic_write(args.out_cert, cert_text)
        outputs[args.out_cert] = cert_text
    if args.out_stats:
        stats_text = render_stats(outcome.stats)
        _atomic_write(args.out_stats, stats_text)
        outputs[args.out_stats] = stats_text
    if args.emit_problem:
        outputs[args.emit_problem] = problem_text
    manifest_path = args.out_manifest or (
        (args.out_cert or "bound") + ".manifest")
    _write_manifest(manifest_path, "bound",
                    {"eta": args.eta, "seed": config.seed,
                     "kappa": config.kappa_init, "kappa_max": config.kappa_max,
                     "episodes": config.max_episodes,
                     "growth_rounds": config.growth_rounds,
                     "pairs_per_round": config.pairs_per_round,
                     "max_pool": config.max_pool,
                     "stagnation": config.stagnation,
                     "filter_r": ",".join(map(str, args.filter_r)) or "none",
                     "symmetry": config.symmetry},
                    {"problem-digest": problem_digest(problem_text)}, outputs)
    return 0


def cmd_full_lp(args) -> int:
    problem_text, problem = _problem_from_flags(args)
    size = problem.universe.size
    if size > MATERIALIZE_CAP and not args.force:
        print(f"refusing to materialize the full elemental set for "
              f"N={size}: {count_elemental(size)} inequalities "
              f"(use --force to override)", file=sys.stderr)
        return 2
    eta = parse_rational(args.eta)
    specs = elemental_specs(problem.universe, cap=max(size, MATERIALIZE_CAP))
    symmetry = problem.symmetry_group() if args.symmetry else None
    if symmetry is not None and len(symmetry) == 1:
        symmetry = None
    assembled = lpmod.assemble(specs, problem_text, eta, symmetry=symmetry)
    result = lpmod.solve(assembled)
    if result.status != "optimal":
        print(f"LP is {result.status}", file=sys.stderr)
        return 2
    _print_bound(eta, result.value)
    outputs = {}
    if args.out_cert:
        cert_text = lpmod.make_certificate(result, assembled).render()
        _atomic_write(args.out_cert, cert_text)
        outputs[args.out_cert] = cert_text
    manifest_path = args.out_manifest or ((args.out_cert or "full_lp") + ".manifest")
    _write_manifest(manifest_path, "full-lp",
                    {"eta": args.eta, "symmetry": args.symmetry},
                    {"problem-digest": problem_digest(problem_text)}, outputs)
    return 0


def cmd_oracle(args) -> int:
    if args.inner_points:
        for r, (alpha, beta) in enumerate(inner_bound_points(args.n), start=2):
            print(f"r={r}: alpha={format_rational(alpha)} "
                  f"beta={format_rational(beta)}")
        return 0
    if args.r is None or args.term is None:
        print("need --r and --term (or --inner-points)", file=sys.stderr)
        return 2
    oracle = LayeredOracle(args.n, args.r)
    try:
        term = oracle.universe.parse_term(args.term)
    except EncodingError as exc:
        print(f"bad term encoding: {exc}", file=sys.stderr)
        return 2
    value = oracle.eval(term)
    print(f"H{args.term} = {oracle.raw_count(term)}/{oracle.message_size}"
          f" = {format_rational(value)}")
    return 0


def cmd_verify(args) -> int:
    with open(args.cert) as fh:
        cert_text = fh.read()
    with open(args.problem) as fh:
        problem_text = fh.read()
    try:
        cert = lpmod.parse_certificate(cert_text)
    except EncodingError as exc:
        print(f"certificate parse failure: {exc}", file=sys.stderr)
        return 2
    ok, diag = lpmod.verify_certificate(cert, problem_text)
    if not ok:
        print(f"certificate INVALID: {diag}", file=sys.stderr)
        return 1
    print("certificate OK")
    _print_bound(cert.eta, cert.bound)
    return 0


def cmd_sweep(args) -> int:
    problem_text, problem = _problem_from_flags(args)
    etas = [parse_rational(e) for e in args.etas.split(",") if e.strip()]
    if not etas:
        print("empty eta list", file=sys.stderr)
        return 2
    config = _search_config(args)
    results = sweep_eta(problem_text, etas, config)
    rows = ["eta,bound,bound_decimal"]
    failures = 0
    for eta, bound, _cert, err in results:
        if err is not None:
            failures += 1
            print(f"eta={format_rational(eta)}: FAILED ({err})", file=sys.stderr)
            continue
        rows.append(f"{format_rational(eta)},{format_rational(bound)},"
                    f"{float(bound):.9f}")
        print(f"eta={format_rational(eta)}: bound {format_rational(bound)}")
    csv_text = "\n".join(rows) + "\n"
    _atomic_write(args.out_csv, csv_text)
    inner_rows = ["r,alpha,beta"]
    for r, (alpha, beta) in enumerate(inner_bound_points(args.n), start=2):
        inner_rows.append(f"{r},{format_rational(alpha)},{format_rational(beta)}")
    inner_text = "\n".join(inner_rows) + "\n"
    inner_path = os.path.splitext(args.out_csv)[0] + "_inner_points.csv"
    _atomic_write(inner_path, inner_text)
    manifest_path = args.out_manifest or (args.out_csv + ".manifest")
    _write_manifest(manifest_path, "sweep",
                    {"etas": args.etas, "seed": config.seed,
                     "symmetry": config.symmetry,
                     "filter_r": ",".join(map(str, args.filter_r)) or "none"},
                    {"problem-digest": problem_digest(problem_text)},
                    {args.out_csv: csv_text, inner_path: inner_text})
    return 0 if failures == 0 else 1


def cmd_emit_problem(args) -> int:
    problem_text, _ = _problem_from_flags(args)
    _atomic_write(args.out, problem_text)
    print(f"wrote {args.out} (digest {problem_digest(problem_text)})")
    return 0


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", default="regen", choices=["regen"],
                   help="built-in problem family")
    p.add_argument("--problem-file", help="generic problem file (overrides --problem)")
    p.add_argument("--n", type=int, default=6, help="node count")
    p.add_argument("--repr", default="reduced", choices=["reduced", "full"])


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", default="1", help="rational weight on beta")
    p.add_argument("--filter-r", default=(), type=_int_list,
                   help="comma list of layered-code parameters for equality filtering")
    p.add_argument("--kappa", type=int, default=64)
    p.add_argument("--kappa-max", type=int, default=8192)
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--growth-rounds", type=int, default=8)
    p.add_argument("--pairs-per-round", type=int, default=64)
    p.add_argument("--walks-per-round", type=int, default=8)
    p.add_argument("--det-samples", type=int, default=6)
    p.add_argument("--max-pool", type=int, default=2048)
    p.add_argument("--max-pivots", type=int, default=20000,
                   help="exact-solve pivot budget per episode; 0 = unlimited")
    p.add_argument("--stagnation", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--target", default="",
                   help="stop as soon as the bound reaches this rational")
    p.add_argument("--float-steer", action="store_true",
                   help="steer episodes with a float solve; exact solves "
                        "only on improvement")
    p.add_argument("--symmetry", action="store_true",
                   help="collapse entropy terms onto symmetry orbits")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrobound",
        description="Converse-bound prover for entropy linear programs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="search for a certified outer bound")
    _add_problem_flags(p)
    _add_search_flags(p)
    p.add_argument("--out-cert", help="write the proof certificate here")
    p.add_argument("--out-stats", help="write per-episode stats CSV here")
    p.add_argument("--out-manifest")
    p.add_argument("--emit-problem", help="also write the problem file here")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("full-lp", help="solve the full elemental LP exactly")
    _add_problem_flags(p)
    p.add_argument("--eta", default="1")
    p.add_argument("--symmetry", action="store_true")
    p.add_argument("--force", action="store_true")
    p.add_argument("--out-cert")
    p.add_argument("--out-manifest")
    p.set_defaults(func=cmd_full_lp)

    p = sub.add_parser("oracle", help="query the layered-code entropy oracle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--term", help='term set, e.g. "{S_1_2,S_2_1}"')
    p.add_argument("--inner-points", action="store_true",
                   help="print the achieved (alpha, beta) pairs")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="verify a proof certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--problem", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="trace the tradeoff over several eta values")
    _add_problem_flags(p)
    _add_search_flags(p)
    p.add_argument("--etas", required=True, help="comma list of rationals")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-manifest")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("emit-problem", help="write a problem file")
    _add_problem_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_problem)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EncodingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
