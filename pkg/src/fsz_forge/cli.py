"""Command-line front end: verify, witness, count, fsz, selftest.

Every report is built as one plain dict and rendered to text, JSON or
CSV.  Output is byte-deterministic for fixed arguments and seed: keys
are sorted, CSV uses a fixed line terminator, and nothing derived from
wall time or worker scheduling is printed.

Exit codes: 0 for a completed run (a non-FSZ finding is a result, not a
failure), 1 for usage or input errors, 2 when an internal verification
fails, such as a named identity check or a disagreement between the two
counters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass

from . import construction, fszcheck, gncount, spgroup
from .mixedmod import GroupParams, MatrixInvariantError, ParameterError
from .spgroup import ElementSyntaxError, EnumerationLimitError, SpjGroup
from .gncount import TableError
from .fszcheck import VerificationError

DEFAULT_LIMIT = spgroup.DEFAULT_ENUMERATION_LIMIT
SELFTEST_GRID = ((3, 1), (3, 2), (5, 1), (5, 2), (7, 1))


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    p: int | None = None
    j: int | None = None
    n: int | None = None
    u_text: str | None = None
    g_text: str | None = None
    table_path: str | None = None
    format: str = "text"
    threads: int | None = None
    seed: int = 0
    limit: int = DEFAULT_LIMIT
    samples: int = 200
    brute: bool = False
    no_reduction: bool = False


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; this CLI reserves
    # 2 for verification failures, so usage errors exit 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--format", choices=("text", "json", "csv"), default="text",
        help="output format (default text)",
    )
    common.add_argument(
        "--threads", type=_positive_int, default=None,
        help="worker count (default: FSZ_FORGE_THREADS or all cores)",
    )
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument(
        "--limit", type=_positive_int, default=DEFAULT_LIMIT,
        help=f"enumeration guard in elements (default {DEFAULT_LIMIT})",
    )

    parser = _Parser(prog="fsz-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("verify", parents=[common], help="run the construction checks")
    sp.add_argument("--p", type=_positive_int, required=True)
    sp.add_argument("--j", type=_positive_int, required=True)
    sp.add_argument("--samples", type=_positive_int, default=200,
                    help="random power-law samples (default 200)")

    sp = sub.add_parser("witness", parents=[common],
                        help="evaluate the designated non-FSZ pair")
    sp.add_argument("--p", type=_positive_int, required=True)
    sp.add_argument("--j", type=_positive_int, required=True)

    sp = sub.add_parser("count", parents=[common], help="count one set G_n(u,g)")
    sp.add_argument("--p", type=_positive_int, required=True)
    sp.add_argument("--j", type=_positive_int, required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--u", required=True, metavar="ELT")
    sp.add_argument("--g", required=True, metavar="ELT")
    sp.add_argument("--brute", action="store_true",
                    help="require the brute-force scan")

    sp = sub.add_parser("fsz", parents=[common], help="decide FSZ_n for a group")
    sp.add_argument("--p", type=_positive_int)
    sp.add_argument("--j", type=_positive_int)
    sp.add_argument("--table", metavar="FILE", help="multiplication table JSON file")
    sp.add_argument("--n", type=_positive_int,
                    help="single n; default checks every divisor of the exponent")
    sp.add_argument("--no-reduction", action="store_true",
                    help="scan all commuting pairs (tiny groups only)")

    sub.add_parser("selftest", parents=[common],
                   help="run the invariant suite on the default grid")
    return parser


def _resolve_threads(threads: int | None) -> int | None:
    if threads is not None:
        return threads
    env = os.environ.get("FSZ_FORGE_THREADS", "").strip()
    if env.isdigit() and int(env) >= 1:
        return int(env)
    return None


def serialize_report(report: dict, fmt: str) -> str:
    """Render a report dict; identical input gives identical bytes."""
    if fmt == "json":
        payload = {
            k: v for k, v in report.items() if k not in ("rows", "head", "tail")
        }
        return json.dumps(payload, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check_or_query", "parameters", "value"])
        for name, parameters, value in report.get("rows", ()):
            writer.writerow([str(name), str(parameters), str(value)])
        return buf.getvalue()
    if fmt != "text":
        raise ParameterError(f"unknown format {fmt!r}")
    lines = list(report.get("head", ()))
    for name, parameters, value in report.get("rows", ()):
        if parameters:
            lines.append(f"{name} [{parameters}]: {value}")
        else:
            lines.append(f"{name}: {value}")
    lines.extend(report.get("tail", ()))
    return "\n".join(lines) + "\n"


def _params(cfg: RunConfig) -> GroupParams:
    return GroupParams(cfg.p, cfg.j)


def _pass(ok: bool, detail: str = "") -> str:
    if ok:
        return "PASS" if not detail else f"PASS ({detail})"
    return "FAIL" if not detail else f"FAIL ({detail})"


def _power_sample(params: GroupParams, samples: int, seed: int) -> tuple[bool, str]:
    """power_pj against generic square-and-multiply, all b-orders forced."""
    rng = random.Random(seed)
    elements = []
    for t in range(params.j + 1):
        k = 0 if t == params.j else params.p ** t
        elements.append(
            spgroup.SElement(spgroup.random_element(params, rng).vec, k)
        )
    while len(elements) < max(samples, params.j + 1):
        elements.append(spgroup.random_element(params, rng))
    for x in elements:
        if spgroup.power_pj(params, x) != spgroup.power_generic(params, x, params.n):
            return False, f"mismatch at {spgroup.format_element(params, x)}"
    return True, f"{len(elements)} elements, every b-order included"


def _do_verify(cfg: RunConfig) -> tuple[dict, int]:
    params = _params(cfg)
    report = construction.verify_construction(params)
    sample_ok, sample_detail = _power_sample(params, cfg.samples, cfg.seed)
    structure = spgroup.structure_report(
        params, limit=cfg.limit, rng=random.Random(cfg.seed)
    )

    rows = [
        (check.name, params.describe(), _pass(check.passed, check.detail))
        for check in report.checks
    ]
    rows.append(("power_sample", params.describe(), _pass(sample_ok, sample_detail)))
    rows.extend(
        (f"structure_{check.name}", params.describe(), _pass(check.passed, check.detail))
        for check in structure.checks
    )
    ok = report.all_passed and sample_ok and structure.all_passed
    out = {
        "kind": "verify",
        "group": params.describe(),
        "group_order": params.group_order,
        "checks": report.as_dict()["checks"]
        + [{"name": "power_sample", "passed": sample_ok, "detail": sample_detail}]
        + [
            {"name": f"structure_{c['name']}", "passed": c["passed"], "detail": c["detail"]}
            for c in structure.as_dict()["checks"]
        ],
        "all_passed": ok,
        "head": [f"construction checks for {params.describe()}"],
        "tail": [f"all checks passed: {'yes' if ok else 'NO'}"],
        "rows": rows,
    }
    return out, 0 if ok else 2


def _witness_payload(verdict: fszcheck.FszVerdict, describe) -> dict:
    return verdict.as_dict(describe)


def _do_witness(cfg: RunConfig) -> tuple[dict, int]:
    params = _params(cfg)
    G = SpjGroup(params)
    verdict = fszcheck.spj_witness(params)
    describe = G.describe_element
    rows = [
        ("count_designated", params.describe(),
         str(verdict.statistics["count_designated"])),
        ("count_designated_square", params.describe(),
         str(verdict.statistics["count_designated_square"])),
        ("verdict", f"n={verdict.n}", verdict.verdict),
    ]
    if verdict.witness is not None:
        w = verdict.witness.as_dict(describe)
        rows.append(
            ("witness", f"m={w['m']}",
             f"u={w['u']} g={w['g']} counts {w['count_g']} vs {w['count_gm']}")
        )
    out = {
        "kind": "witness",
        **_witness_payload(verdict, describe),
        "head": [f"designated pair of {verdict.group}, n = {verdict.n}"],
        "tail": [f"verdict: {verdict.verdict}"],
        "rows": rows,
    }
    return out, 0


def _do_count(cfg: RunConfig) -> tuple[dict, int]:
    params = _params(cfg)
    G = SpjGroup(params)
    u = spgroup.parse_element(params, cfg.u_text)
    g = spgroup.parse_element(params, cfg.g_text)
    describe = G.describe_element
    threads = _resolve_threads(cfg.threads)

    structured = None
    if cfg.n == params.n:
        structured = gncount.gn_count_structured(params, u, g)
    brute = None
    brute_feasible = params.group_order <= cfg.limit
    if cfg.brute and not brute_feasible:
        raise EnumerationLimitError(
            f"--brute requested but group order {params.group_order} exceeds "
            f"the limit {cfg.limit}"
        )
    if brute_feasible:
        brute = gncount.gn_count_bruteforce(
            G, cfg.n, u, g, threads=threads, limit=cfg.limit
        )
    if structured is None and brute is None:
        raise EnumerationLimitError(
            f"no counter applies: n = {cfg.n} differs from p^j = {params.n} and "
            f"group order {params.group_order} exceeds the limit {cfg.limit}"
        )

    agree = None
    if structured is not None and brute is not None:
        agree = structured.count == brute.count

    rows = []
    query = f"n={cfg.n} u={describe(u)} g={describe(g)}"
    for label, result in (("structured", structured), ("bruteforce", brute)):
        if result is None:
            continue
        rows.append((f"count_{label}", query, str(result.count)))
        rows.append(
            (f"witnesses_{label}", query,
             "; ".join(describe(w) for w in result.witnesses) or "none")
        )
    if agree is not None:
        rows.append(("counters_agree", query, "yes" if agree else "NO"))

    out = {
        "kind": "count",
        "group": G.describe(),
        "n": cfg.n,
        "u": describe(u),
        "g": describe(g),
        "structured": None if structured is None else structured.as_dict(describe),
        "bruteforce": None if brute is None else brute.as_dict(describe),
        "agree": agree,
        "head": [f"G_n(u, g) on {G.describe()}"],
        "tail": [],
        "rows": rows,
    }
    return out, 2 if agree is False else 0


def _do_fsz(cfg: RunConfig) -> tuple[dict, int]:
    threads = _resolve_threads(cfg.threads)
    if cfg.table_path is not None:
        G = gncount.load_table_group(cfg.table_path)
    else:
        G = SpjGroup(_params(cfg))
    describe = G.describe_element
    reduction = not cfg.no_reduction

    if cfg.n is not None:
        verdicts = [
            fszcheck.check_fsz_n(
                G, cfg.n, reduction=reduction, limit=cfg.limit, threads=threads
            )
        ]
        overall = None
    else:
        verdicts = fszcheck.check_fsz(
            G, reduction=reduction, limit=cfg.limit, threads=threads
        )
        overall = all(v.is_fsz for v in verdicts)

    rows = []
    for v in verdicts:
        rows.append(("fsz_n", f"n={v.n}", v.verdict))
        if v.witness is not None:
            w = v.witness.as_dict(describe)
            rows.append(
                ("witness", f"n={v.n} m={w['m']}",
                 f"u={w['u']} g={w['g']} counts {w['count_g']} vs {w['count_gm']}")
            )
    tail = []
    if overall is not None:
        rows.append(("fsz_overall", "", "FSZ" if overall else "non-FSZ"))
        tail.append(f"overall: {'FSZ' if overall else 'non-FSZ'}")

    out = {
        "kind": "fsz",
        "group": G.describe(),
        "verdicts": [v.as_dict(describe) for v in verdicts],
        "overall": overall,
        "head": [f"FSZ scan of {G.describe()}"],
        "tail": tail,
        "rows": rows,
    }
    return out, 0


def _do_selftest(cfg: RunConfig) -> tuple[dict, int]:
    threads = _resolve_threads(cfg.threads)
    rows = []
    checks = []
    ok_all = True

    def add(name: str, parameters: str, ok: bool, detail: str = "") -> None:
        nonlocal ok_all
        ok_all = ok_all and ok
        rows.append((name, parameters, _pass(ok, detail)))
        checks.append(
            {"name": name, "parameters": parameters, "passed": ok, "detail": detail}
        )

    for p, j in SELFTEST_GRID:
        params = GroupParams(p, j)
        where = params.describe()
        report = construction.verify_construction(params)
        add("construction", where, report.all_passed,
            "" if report.all_passed else "see verify")
        sample_ok, sample_detail = _power_sample(params, 50, cfg.seed)
        add("power_sample", where, sample_ok, sample_detail)
        structure = spgroup.structure_report(
            params, limit=cfg.limit, rng=random.Random(cfg.seed)
        )
        add("structure", where, structure.all_passed, structure.center_method)

        verdict = fszcheck.spj_witness(params)
        expected_witness = p > 3
        has_witness = verdict.witness is not None
        add("designated_pair", where, has_witness == expected_witness, verdict.verdict)

    params = GroupParams(5, 1)
    G = SpjGroup(params)
    u, g, g2 = fszcheck._designated_pair(params)
    brute = gncount.gn_count_bruteforce_many(
        G, params.n, u, [g, g2], threads=threads, limit=cfg.limit
    )
    s1 = gncount.gn_count_structured(params, u, g)
    s2 = gncount.gn_count_structured(params, u, g2)
    agree = brute[0].count == s1.count and brute[1].count == s2.count
    add("counter_agreement", params.describe(), agree,
        f"counts ({s1.count}, {s2.count})")

    params31 = GroupParams(3, 1)
    verdicts = fszcheck.check_fsz(SpjGroup(params31), limit=cfg.limit, threads=threads)
    add("fsz_overall", params31.describe(), all(v.is_fsz for v in verdicts),
        ", ".join(v.verdict for v in verdicts))

    out = {
        "kind": "selftest",
        "grid": [list(point) for point in SELFTEST_GRID],
        "checks": checks,
        "all_passed": ok_all,
        "head": ["invariant suite on the default grid"],
        "tail": [f"all checks passed: {'yes' if ok_all else 'NO'}"],
        "rows": rows,
    }
    return out, 0 if ok_all else 2


def _make_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        p=getattr(args, "p", None),
        j=getattr(args, "j", None),
        n=getattr(args, "n", None),
        u_text=getattr(args, "u", None),
        g_text=getattr(args, "g", None),
        table_path=getattr(args, "table", None),
        format=args.format,
        threads=args.threads,
        seed=args.seed,
        limit=args.limit,
        samples=getattr(args, "samples", 200),
        brute=getattr(args, "brute", False),
        no_reduction=getattr(args, "no_reduction", False),
    )


_DISPATCH = {
    "verify": _do_verify,
    "witness": _do_witness,
    "count": _do_count,
    "fsz": _do_fsz,
    "selftest": _do_selftest,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand == "fsz":
        has_pj = args.p is not None and args.j is not None
        has_table = args.table is not None
        if has_table and (args.p is not None or args.j is not None):
            print("error: fsz takes either --p and --j, or --table FILE, not both",
                  file=sys.stderr)
            return 1
        if not has_table and not has_pj:
            print("error: fsz needs either --p and --j, or --table FILE",
                  file=sys.stderr)
            return 1
    cfg = _make_config(args)
    try:
        report, status = _DISPATCH[cfg.subcommand](cfg)
    except (ParameterError, ElementSyntaxError, TableError, EnumerationLimitError,
            argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VerificationError, MatrixInvariantError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(serialize_report(report, cfg.format))
    return status


def main() -> None:
    sys.exit(run())
