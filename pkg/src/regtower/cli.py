"""Command-line front end: ``python3 -m regtower <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 capacity,
regime or feasibility error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from . import construction as con
from . import diagnostics as diag
from .errors import (
    CapacityError,
    ConstructionInfeasible,
    InputError,
    NumericalError,
    RegimeError,
)
from .graph import as_vertex_set, read_graph, read_partition, write_graph
from .irregularity import DEFAULT_CAP, irreg_exact, irreg_partition
from .realization import DEVIATION_CAP, round_to_unweighted, round_with_check
from .refine import regularize
from .spectral import blow_up, format_matrix, mixing_report, parse_matrix, top_singular_value, trace_m2_bound

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3


@dataclass
class CommandOutcome:
    code: int
    summary: str
    paths: list = field(default_factory=list)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _ids(text: str):
    return as_vertex_set(int(t) for t in text.split(",") if t.strip())


def _write(path, text, outcome_paths):
    with open(path, "w") as fh:
        fh.write(text)
    outcome_paths.append(path)


# ----------------------------------------------------------------------------
# subcommands


def _construct(a):
    params = con.ConstructionParams(
        alpha=con.parse_alpha(a.alpha),
        x=tuple(int(v) for v in a.x.split(",")) if a.x else (),
        block_size=a.block,
        seed=a.seed,
        strict_properties=a.strict,
        max_attempts=a.max_attempts,
        r_scale=a.r_scale,
        t_scale=a.t_scale,
    )
    trace = con.build(params, side_cap=a.side_cap)
    con.save_trace(trace, a.out)
    return CommandOutcome(EXIT_OK, f"wrote trace with {params.side_size} vertices per side to {a.out}", [a.out])


def _verify(a):
    trace = con.load_trace(a.trace)
    report = con.verify_construction(trace)
    text = report.format()
    paths = []
    if a.out:
        _write(a.out, text, paths)
    code = EXIT_OK if report.structural_ok else EXIT_VERIFY
    bad = report.failures()
    summary = text if not a.out else ("structural checks passed" if not bad else
                                       "\n".join(f"FAIL {c.name} step {c.step}: {c.detail}" for c in bad))
    return CommandOutcome(code, summary, paths)


def _refine(a):
    g = read_graph(a.graph)
    run = regularize(g, a.eps, a.max_steps, cap=a.cap)
    paths = []
    _write(a.out, run.format(), paths)
    state = "criterion met" if run.by_criterion else "step limit reached"
    return CommandOutcome(EXIT_OK, f"{run.steps} steps, {len(run.partitions[-1])} parts, {state}", paths)


def _irreg(a):
    g = read_graph(a.graph)
    if a.partition:
        P = read_partition(a.partition, g.n)
        total, _ = irreg_partition(g, P, cap=a.cap)
        return CommandOutcome(EXIT_OK, repr(total))
    if a.X is None or a.Y is None:
        raise InputError("give either --partition or both --X and --Y")
    w = irreg_exact(g, _ids(a.X), _ids(a.Y), cap=a.cap)
    return CommandOutcome(EXIT_OK, w.format())


def _realize(a):
    g = read_graph(a.graph)
    paths = []
    if a.check_deviation:
        if g.n > DEVIATION_CAP:
            raise CapacityError(f"--check-deviation needs at most {DEVIATION_CAP} vertices")
        h, dev, used = round_with_check(g, a.seed, a.attempts)
        if h is None:
            return CommandOutcome(EXIT_VERIFY, f"no draw met 4N^(3/2) in {used} attempts (last deviation {dev!r})")
        write_graph(a.out, h)
        paths.append(a.out)
        return CommandOutcome(EXIT_OK, f"deviation {dev!r} after {used} attempt(s)", paths)
    h = round_to_unweighted(g, a.seed)
    write_graph(a.out, h)
    paths.append(a.out)
    return CommandOutcome(EXIT_OK, f"wrote rounded graph to {a.out}", paths)


def _spectral(a):
    paths = []
    lines = []
    if a.trace:
        if a.residual is None:
            raise InputError("--trace needs --residual STEP")
        trace = con.load_trace(a.trace)
        lines.append("X,Y,a,b,lambda_resid,paper_bound")
        for r in con.residual_report(trace, a.residual):
            lines.append(f"{r.X},{r.Y},{r.a},{r.b},{r.lambda_resid!r},{r.paper_bound!r}")
    else:
        if not a.matrix:
            raise InputError("give --matrix or --trace")
        with open(a.matrix) as fh:
            M = parse_matrix(fh.read())
        lam = top_singular_value(M, tol=a.tol)
        lines.append(f"sigma_max,{lam!r}")
        if a.rows is not None or a.cols is not None:
            rows = _ids(a.rows or "")
            cols = _ids(a.cols or "")
            rep = mixing_report(M, rows, cols, lam)
            lines.append("lhs1,rhs1,lhs2,rhs2")
            lines.append(",".join(repr(v) for v in rep))
        if M.shape[0] == M.shape[1]:
            tr, l4 = trace_m2_bound(M)
            lines.append(f"trace_m2,{tr!r},lambda4,{l4!r}")
        if a.blow_up:
            B = blow_up(M, a.blow_up)
            lines.append(f"blow_up_sigma_max,{top_singular_value(B, tol=a.tol)!r}")
            if a.blow_up_out:
                _write(a.blow_up_out, format_matrix(B), paths)
    text = "\n".join(lines) + "\n"
    if a.out:
        _write(a.out, text, paths)
    return CommandOutcome(EXIT_OK, text.rstrip("\n"), paths)


def _diagnose(a):
    trace = con.load_trace(a.trace)
    cand = read_partition(a.candidate, 2 * trace.N)
    ct = diag.color_trace(trace, cand)
    lines = ["step,v,w"]
    lines += [f"{i},{v!r},{w!r}" for i, (v, w) in enumerate(zip(ct.v, ct.w))]
    lines.append("")
    lines.append("part,size,i_S,never_blue")
    lines += [f"{k},{len(p.block)},{p.i_S},{int(p.never_blue)}" for k, p in enumerate(ct.parts)]
    fv, fw = diag.refinement_closeness(trace, cand)
    lines.append("")
    lines.append("closeness_V,closeness_W")
    lines.append(f"{fv!r},{fw!r}")
    code = EXIT_OK
    steps = [a.step] if a.step is not None else list(range(2, trace.s + 1))
    for j in steps:
        rep = diag.counting_report(trace, cand, j, cap=a.cap)
        lines.append("")
        lines.append(f"counting step {j}")
        lines.append(rep.format().rstrip("\n"))
        if rep.failures:
            code = EXIT_VERIFY
    text = "\n".join(lines) + "\n"
    paths = []
    if a.out:
        _write(a.out, text, paths)
    return CommandOutcome(code, text.rstrip("\n"), paths)


def _plan(a):
    plan = con.plan_paper_params(a.eps)
    text = (f"alpha={plan.alpha.numerator}/{plan.alpha.denominator}\n"
            f"s={plan.s}\n"
            f"x={plan.x_description}\n")
    return CommandOutcome(EXIT_OK, text.rstrip("\n"))


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regtower", description="Regularity partitions, irregularity and tower constructions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a layered construction and write its trace directory")
    c.add_argument("--x", required=True, help="comma-separated splitting factors, e.g. 2,2")
    c.add_argument("--alpha", required=True, help="weight increment as an exact rational p/q")
    c.add_argument("--block", type=int, default=1, help="vertices per final part")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--strict", action="store_true", help="enforce the two separation properties")
    c.add_argument("--max-attempts", type=int, default=1000)
    c.add_argument("--r-scale", type=float, default=1.0)
    c.add_argument("--t-scale", type=float, default=1.0)
    c.add_argument("--side-cap", type=int, default=con.DEFAULT_SIDE_CAP)
    c.add_argument("--out", required=True, help="trace directory")
    c.set_defaults(func=_construct)

    v = sub.add_parser("verify", help="check a trace directory")
    v.add_argument("--trace", required=True)
    v.add_argument("--out")
    v.set_defaults(func=_verify)

    r = sub.add_parser("refine", help="refine a graph until it is eps-regular")
    r.add_argument("--graph", required=True)
    r.add_argument("--eps", type=float, required=True)
    r.add_argument("--max-steps", type=int, required=True)
    r.add_argument("--cap", type=int, default=DEFAULT_CAP)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_refine)

    i = sub.add_parser("irreg", help="exact irregularity of a pair or a partition")
    i.add_argument("--graph", required=True)
    i.add_argument("--partition")
    i.add_argument("--X", help="comma-separated vertex ids")
    i.add_argument("--Y", help="comma-separated vertex ids")
    i.add_argument("--cap", type=int, default=DEFAULT_CAP)
    i.set_defaults(func=_irreg)

    z = sub.add_parser("realize", help="round a weighted graph to a 0/1 graph")
    z.add_argument("--graph", required=True)
    z.add_argument("--seed", type=int, required=True)
    z.add_argument("--attempts", type=int, default=10)
    z.add_argument("--check-deviation", action="store_true")
    z.add_argument("--out", required=True)
    z.set_defaults(func=_realize)

    s = sub.add_parser("spectral", help="singular value, mixing, blow-up and residual reports")
    s.add_argument("--matrix")
    s.add_argument("--rows", help="row subset for the mixing report")
    s.add_argument("--cols", help="column subset for the mixing report")
    s.add_argument("--blow-up", type=int)
    s.add_argument("--blow-up-out")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--trace")
    s.add_argument("--residual", type=int)
    s.add_argument("--out")
    s.set_defaults(func=_spectral)

    d = sub.add_parser("diagnose", help="colouring, closeness and counting reports")
    d.add_argument("--trace", required=True)
    d.add_argument("--candidate", required=True)
    d.add_argument("--step", type=int)
    d.add_argument("--cap", type=int, default=DEFAULT_CAP)
    d.add_argument("--out")
    d.set_defaults(func=_diagnose)

    pl = sub.add_parser("plan", help="large-scale parameter arithmetic for eps")
    pl.add_argument("--eps", required=True, help="decimal or rational eps below 1e-13")
    pl.set_defaults(func=_plan)
    return p


def _plan_eps(text):
    from fractions import Fraction
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad eps {text!r}") from None


def run(argv=None) -> CommandOutcome:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return CommandOutcome(EXIT_INPUT, str(exc))
    try:
        if args.command == "plan":
            args.eps = _plan_eps(args.eps)
        return args.func(args)
    except (CapacityError, RegimeError, NumericalError, ConstructionInfeasible) as exc:
        return CommandOutcome(EXIT_CAPACITY, f"error: {exc}")
    except (ValueError, OSError) as exc:
        return CommandOutcome(EXIT_INPUT, f"error: {exc}")


def main(argv=None) -> int:
    out = run(argv)
    stream = sys.stdout if out.code in (EXIT_OK, EXIT_VERIFY) else sys.stderr
    if out.summary:
        print(out.summary, file=stream)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
