"""Command-line surface.

Subcommands:

    eval FILE                 evaluate a construction file and print reports
    verify ...                check engine totals against the closed forms
    geography ...             emit a CSV of exact geography rows
    group simplify|abelianize run the group utilities on one presentation

Construction files are line oriented; see the README for the grammar.  Exit
codes: 0 success, 1 verification mismatch, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import blocks, constructions, geography
from .blocks import Block
from .constructions import ConstructionReport
from .fpgroup import (
    FPGroupError,
    Presentation,
    abelianization,
    format_presentation,
    is_presentation_trivial,
    parse_presentation,
    tietze_simplify,
)
from .sumcalc import (
    GluingError,
    GluingSpec,
    IntersectionConfig,
    SurfaceShape,
    fiber_sum,
    resolve_intersections,
)

__all__ = ["main", "parse_construction", "format_construction", "evaluate", "ConstructionError"]


class ConstructionError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# Construction-file AST, parser, formatter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    """A bare identifier; a reference or a surface label depending on use."""
    value: str


@dataclass(frozen=True)
class Call:
    op: str
    args: tuple
    kwargs: tuple  # of (key, value) pairs, in source order


@dataclass(frozen=True)
class LetStmt:
    name: str
    call: Call
    line: int


@dataclass(frozen=True)
class ReportStmt:
    target: str
    line: int


@dataclass(frozen=True)
class GeographyStmt:
    family: str
    n_min: int
    n_max: int
    line: int


Stmt = LetStmt | ReportStmt | GeographyStmt

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT_RE = re.compile(r"-?\d+")


def _tokenize_line(text: str, lineno: int):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            break
        if ch == "<":
            j = text.find(">", i)
            if j < 0:
                raise ConstructionError("unterminated presentation literal",
                                        lineno, i + 1)
            tokens.append(("pres", text[i:j + 1], i + 1))
            i = j + 1
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(("name", m.group(), i + 1))
            i = m.end()
            continue
        m = _INT_RE.match(text, i)
        if m:
            tokens.append(("int", m.group(), i + 1))
            i = m.end()
            continue
        if ch in "()[],=:":
            tokens.append(("sym", ch, i + 1))
            i += 1
            continue
        raise ConstructionError(f"unexpected character {ch!r}", lineno, i + 1)
    return tokens


class _LineParser:
    def __init__(self, tokens, lineno):
        self.tokens = tokens
        self.lineno = lineno
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ConstructionError("unexpected end of line", self.lineno)
        self.pos += 1
        return t

    def expect(self, value):
        t = self.next()
        if t[1] != value:
            raise ConstructionError(f"expected {value!r}, got {t[1]!r}",
                                    self.lineno, t[2])
        return t

    def expect_kind(self, kind, what):
        t = self.next()
        if t[0] != kind:
            raise ConstructionError(f"expected {what}, got {t[1]!r}",
                                    self.lineno, t[2])
        return t

    def done(self):
        t = self.peek()
        if t is not None:
            raise ConstructionError(f"trailing input {t[1]!r}", self.lineno, t[2])

    def parse_int_tuple(self) -> tuple:
        self.expect("(")
        items = []
        while True:
            t = self.next()
            if t[0] != "int":
                raise ConstructionError(f"expected integer, got {t[1]!r}",
                                        self.lineno, t[2])
            items.append(int(t[1]))
            t = self.next()
            if t[1] == ")":
                break
            if t[1] != ",":
                raise ConstructionError(f"expected , or ), got {t[1]!r}",
                                        self.lineno, t[2])
        return tuple(items)

    def parse_list(self) -> tuple:
        self.expect("[")
        items = []
        t = self.peek()
        if t is not None and t[1] == "]":
            self.next()
            return ()
        while True:
            t = self.peek()
            if t is None:
                raise ConstructionError("unterminated list", self.lineno)
            if t[1] == "(":
                items.append(self.parse_int_tuple())
            else:
                first = self.expect_kind("name", "a label")[1]
                t = self.peek()
                if t is not None and t[1] == ":":
                    self.next()
                    second = self.expect_kind("name", "a label")[1]
                    items.append((first, second))
                else:
                    items.append(first)
            t = self.next()
            if t[1] == "]":
                break
            if t[1] != ",":
                raise ConstructionError(f"expected , or ], got {t[1]!r}",
                                        self.lineno, t[2])
        return tuple(items)

    def parse_value(self):
        t = self.peek()
        if t is None:
            raise ConstructionError("expected a value", self.lineno)
        if t[0] == "int":
            self.next()
            return int(t[1])
        if t[0] == "pres":
            self.next()
            try:
                return parse_presentation(t[1])
            except FPGroupError as e:
                raise ConstructionError(f"bad presentation literal: {e}",
                                        self.lineno, t[2]) from None
        if t[1] == "[":
            return self.parse_list()
        if t[1] == "(":
            return self.parse_int_tuple()
        if t[0] == "name":
            self.next()
            return Name(t[1])
        raise ConstructionError(f"unexpected token {t[1]!r}", self.lineno, t[2])

    def parse_call(self) -> Call:
        op = self.expect_kind("name", "an operation name")[1]
        self.expect("(")
        args = []
        kwargs = []
        t = self.peek()
        if t is not None and t[1] == ")":
            self.next()
            return Call(op, (), ())
        while True:
            t = self.peek()
            if t is not None and t[0] == "name" and self.pos + 1 < len(self.tokens) \
                    and self.tokens[self.pos + 1][1] == "=":
                key = self.next()[1]
                self.next()  # =
                kwargs.append((key, self.parse_value()))
            else:
                args.append(self.parse_value())
            t = self.next()
            if t[1] == ")":
                break
            if t[1] != ",":
                raise ConstructionError(f"expected , or ), got {t[1]!r}",
                                        self.lineno, t[2])
        return Call(op, tuple(args), tuple(kwargs))


def parse_construction(text: str) -> tuple[Stmt, ...]:
    """Parse a construction file into statements, with line/column errors."""
    stmts: list[Stmt] = []
    declared: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(line, lineno)
        if not tokens:
            continue
        p = _LineParser(tokens, lineno)
        head = p.next()
        if head[1] == "let":
            name = p.expect_kind("name", "a declaration name")[1]
            if name in declared:
                raise ConstructionError(f"name {name!r} already declared", lineno)
            p.expect("=")
            call = p.parse_call()
            p.done()
            for a in call.args:
                if isinstance(a, Name) and a.value not in declared:
                    raise ConstructionError(
                        f"reference to undeclared name {a.value!r}", lineno)
            stmts.append(LetStmt(name, call, lineno))
            declared.add(name)
        elif head[1] == "report":
            target = p.expect_kind("name", "a declared name")[1]
            p.done()
            if target not in declared:
                raise ConstructionError(
                    f"report of undeclared name {target!r}", lineno)
            stmts.append(ReportStmt(target, lineno))
        elif head[1] == "geography":
            family = p.expect_kind("name", "a family name")[1]
            n_min = int(p.expect_kind("int", "n-min")[1])
            n_max = int(p.expect_kind("int", "n-max")[1])
            p.done()
            stmts.append(GeographyStmt(family, n_min, n_max, lineno))
        else:
            raise ConstructionError(
                f"expected let, report or geography, got {head[1]!r}",
                lineno, head[2])
    return tuple(stmts)


def _format_value(v) -> str:
    if isinstance(v, Name):
        return v.value
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Presentation):
        return format_presentation(v)
    if isinstance(v, tuple):
        if v and all(isinstance(x, int) for x in v):
            return "(" + ", ".join(map(str, v)) + ")"
        parts = []
        for item in v:
            if isinstance(item, tuple) and len(item) == 2 and all(
                    isinstance(x, str) for x in item):
                parts.append(f"{item[0]}:{item[1]}")
            elif isinstance(item, tuple):
                parts.append("(" + ", ".join(map(str, item)) + ")")
            else:
                parts.append(str(item))
        return "[" + ", ".join(parts) + "]"
    raise TypeError(f"cannot format {v!r}")


def format_construction(stmts) -> str:
    """Canonical text for a parsed construction file; parsing the output
    gives back an equivalent program."""
    lines = []
    for s in stmts:
        if isinstance(s, LetStmt):
            parts = [_format_value(a) for a in s.call.args]
            parts += [f"{k}={_format_value(v)}" for k, v in s.call.kwargs]
            lines.append(f"let {s.name} = {s.call.op}({', '.join(parts)})")
        elif isinstance(s, ReportStmt):
            lines.append(f"report {s.target}")
        else:
            lines.append(f"geography {s.family} {s.n_min} {s.n_max}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _want_ints(call: Call, count: int, line: int) -> list[int]:
    if len(call.args) != count or call.kwargs or \
            not all(isinstance(a, int) for a in call.args):
        raise ConstructionError(
            f"{call.op} takes exactly {count} integer argument(s)", line)
    return list(call.args)


def _resolve_ref(env, v, line, op):
    if not isinstance(v, Name):
        raise ConstructionError(f"{op}: expected a declared name", line)
    return env[v.value]


def _eval_call(call: Call, env: dict, line: int):
    op = call.op
    if op in ("elliptic", "stipsicz", "elbow", "product_torus"):
        (n,) = _want_ints(call, 1, line)
        return blocks.block(op, n)
    if op == "s11":
        _want_ints(call, 0, line)
        return blocks.s11()
    if op == "MG":
        if len(call.args) != 1 or not isinstance(call.args[0], Presentation):
            raise ConstructionError("MG takes one presentation literal", line)
        return blocks.MG(call.args[0])
    if op == "fiber_sum":
        if len(call.args) != 2:
            raise ConstructionError("fiber_sum takes two block references", line)
        x = _resolve_ref(env, call.args[0], line, op)
        y = _resolve_ref(env, call.args[1], line, op)
        kw = dict(call.kwargs)
        extra = set(kw) - {"left", "right", "connect", "connect_label",
                           "carry_left", "carry_right"}
        if extra:
            raise ConstructionError(f"fiber_sum: unknown options {sorted(extra)}", line)
        if "left" not in kw or "right" not in kw:
            raise ConstructionError("fiber_sum needs left= and right= labels", line)

        def label(v):
            if not isinstance(v, Name):
                raise ConstructionError("fiber_sum labels must be bare names", line)
            return v.value

        connect = None
        if "connect" in kw:
            v = kw["connect"]
            if not (isinstance(v, tuple) and len(v) == 1
                    and isinstance(v[0], tuple) and len(v[0]) == 2):
                raise ConstructionError("connect needs one left:right pair "
                                        "written as connect=[A:B]", line)
            connect = (v[0][0], v[0][1])
        spec = GluingSpec(
            left=label(kw["left"]),
            right=label(kw["right"]),
            connect=connect,
            connect_label=(label(kw["connect_label"])
                           if "connect_label" in kw else "K"),
            carry_left=kw.get("carry_left", ()),
            carry_right=kw.get("carry_right", ()),
        )
        return fiber_sum_step(x, y, spec, line)
    if op == "resolve":
        kw = dict(call.kwargs)
        if call.args or set(kw) - {"components", "pairs"}:
            raise ConstructionError(
                "resolve takes components=[(g,s),...] and pairs=[(i,j[,m]),...]",
                line)
        comps = kw.get("components", ())
        pairs = kw.get("pairs", ())
        c = len(comps)
        matrix = [[0] * c for _ in range(c)]
        for p in pairs:
            if not (isinstance(p, tuple) and len(p) in (2, 3)):
                raise ConstructionError("pairs entries are (i,j) or (i,j,count)", line)
            i, j = p[0], p[1]
            m = p[2] if len(p) == 3 else 1
            if not (0 <= i < c and 0 <= j < c):
                raise ConstructionError(f"pair ({i},{j}) out of range", line)
            matrix[i][j] += m
            matrix[j][i] += m
        try:
            cfg = IntersectionConfig(tuple(tuple(x) for x in comps),
                                     tuple(tuple(r) for r in matrix))
            return resolve_intersections(cfg)
        except GluingError as e:
            raise ConstructionError(f"resolve: {e}", line) from None
    if op == "build_A":
        _want_ints(call, 0, line)
        return constructions.build_A()
    if op in ("build_Z", "build_ZE", "build_W"):
        (n,) = _want_ints(call, 1, line)
        return getattr(constructions, op)(n)
    if op == "build_J":
        (n,) = _want_ints(call, 1, line)
        return constructions.build_J(n)
    if op == "build_MGn":
        if len(call.args) != 2 or not isinstance(call.args[0], Presentation) \
                or not isinstance(call.args[1], int):
            raise ConstructionError(
                "build_MGn takes a presentation literal and an integer", line)
        return constructions.build_MGn(call.args[0], call.args[1])
    raise ConstructionError(f"unknown operation {op!r}", line)


def fiber_sum_step(x, y, spec: GluingSpec, line: int):
    if not isinstance(x, Block) or not isinstance(y, Block):
        raise ConstructionError("fiber_sum arguments must be blocks", line)
    return fiber_sum(x, y, spec)


def _presentation_summary(p: Presentation) -> str:
    g, r = p.rank_data
    ab = abelianization(p)
    if g <= 8 and r <= 8:
        return f"{format_presentation(p)}  (abelianization {ab})"
    return f"{g} generators, {r} relators  (abelianization {ab})"


def _block_report(name: str, b: Block) -> list[str]:
    pt = geography.point(b)
    lines = [
        f"block {name} = {b.name}",
        f"  chi = {b.chi}   sigma = {b.sigma}   chi_h = {pt.chi_h}   "
        f"c1sq = {pt.c1sq}   slope = {pt.slope_str()}",
        f"  bmy_defect = {pt.bmy_defect}   noether_defect = {pt.noether_defect}",
        f"  pi1: {_presentation_summary(b.pi1)}",
    ]
    if b.surfaces:
        lines.append("  surfaces:")
        for lab in b.surfaces:
            s = b.surfaces[lab]
            bits = [f"genus {s.genus}", f"square {s.self_intersection}"]
            if s.complement is not None:
                cg, cr = s.complement.group.rank_data
                bits.append(f"complement group: {cg} gens {cr} rels")
            if s.inclusion is not None:
                bits.append("inclusion data")
            lines.append(f"    {lab}: " + ", ".join(bits))
    if b.provenance:
        lines.append("  provenance:")
        for key in b.provenance:
            lines.append(f"    {key}: {b.provenance[key]}")
    if b.flags:
        lines.append("  flags:")
        for f in b.flags:
            lines.append(f"    - {f}")
    return lines


def _report_value(name: str, value) -> list[str]:
    if isinstance(value, Block):
        return _block_report(name, value)
    if isinstance(value, SurfaceShape):
        return [f"surface {name}: genus {value.genus}, "
                f"square {value.self_intersection}"]
    if isinstance(value, ConstructionReport):
        lines = _block_report(name, value.block)
        lines.append(f"  closed form: chi = {value.formula_chi}   "
                     f"sigma = {value.formula_sigma}   "
                     f"match = {'yes' if value.match else 'NO'}")
        for note in value.notes:
            lines.append(f"  note: {note}")
        return lines
    raise ConstructionError(f"cannot report value of {name!r}")


def _geography_rows(family: str, n_min: int, n_max: int, group_size: int = 1):
    if family != "theorem1":
        raise ConstructionError(f"unknown family {family!r} (have: theorem1)")
    if n_min > n_max:
        raise ConstructionError(f"empty range [{n_min}, {n_max}]")
    fam = geography.main_family(family)
    rows = []
    for n in range(n_min, n_max + 1):
        chi = fam.chi_at(n, group_size)
        sigma = fam.sigma_at(n, group_size)
        pt = geography.point(Block(name=fam.name, chi=chi, sigma=sigma,
                                   pi1=Presentation()))
        slope_num = pt.slope.numerator if pt.slope is not None else ""
        slope_den = pt.slope.denominator if pt.slope is not None else ""
        rows.append([fam.name, n, group_size, chi, sigma, pt.c1sq, pt.chi_h,
                     slope_num, slope_den, pt.bmy_defect, pt.noether_defect])
    return rows


CSV_COLUMNS = ["name", "n", "g_plus_r_plus_1", "chi", "sigma", "c1sq",
               "chi_h", "slope_num", "slope_den", "bmy_defect",
               "noether_defect"]


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def evaluate(stmts) -> list[str]:
    """Run a parsed construction file; returns the report lines."""
    env: dict[str, object] = {}
    outputs: list[str] = []
    requested = False
    for s in stmts:
        if isinstance(s, LetStmt):
            try:
                env[s.name] = _eval_call(s.call, env, s.line)
            except ConstructionError:
                raise
            except (GluingError, blocks.CatalogError, FPGroupError, ValueError) as e:
                raise ConstructionError(f"step {s.name!r}: {e}", s.line) from None
        elif isinstance(s, ReportStmt):
            requested = True
            outputs.extend(_report_value(s.target, env[s.target]))
        else:
            requested = True
            rows = _geography_rows(s.family, s.n_min, s.n_max)
            outputs.extend(_csv_text(rows).rstrip("\n").splitlines())
    if not requested:
        for name, value in env.items():
            outputs.extend(_report_value(name, value))
    return outputs


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_eval(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        outputs = evaluate(parse_construction(text))
    except ConstructionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for line in outputs:
        print(line)
    return 0


def _load_group(spec: str) -> tuple[str, Presentation]:
    if spec in constructions.SAMPLE_GROUPS:
        return spec, constructions.SAMPLE_GROUPS[spec]
    if spec.lstrip().startswith("<"):
        return "inline", parse_presentation(spec)
    path = Path(spec)
    if path.exists():
        return path.stem, parse_presentation(path.read_text().strip())
    raise ValueError(
        f"group {spec!r} is neither a builtin "
        f"({', '.join(constructions.SAMPLE_GROUPS)}), an inline <...> "
        f"presentation, nor a file")


def _cmd_verify(args) -> int:
    try:
        if args.group:
            groups = [_load_group(g) for g in args.group]
        else:
            groups = list(constructions.SAMPLE_GROUPS.items())
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.n_min > args.n_max:
        print(f"error: empty range [{args.n_min}, {args.n_max}]", file=sys.stderr)
        return 2
    header = f"{'n':>3}  {'group':<10} {'chi(engine)':>12} {'chi(formula)':>13} " \
             f"{'sigma(engine)':>14} {'sigma(formula)':>15}  match"
    print(header)
    print("-" * len(header))
    failures = 0
    for n in range(args.n_min, args.n_max + 1):
        for gname, pres in groups:
            rep = constructions.build_MGn(pres, n)
            ok = "yes" if rep.match else "NO"
            if not rep.match:
                failures += 1
            print(f"{n:>3}  {gname:<10} {rep.block.chi:>12} {rep.formula_chi:>13} "
                  f"{rep.block.sigma:>14} {rep.formula_sigma:>15}  {ok}")
    if args.n_min <= 1:
        print("note: rows with n <= 1 lie outside the stated range n > 1 of "
              "the closed-form family")
    print(f"{'FAIL' if failures else 'OK'}: {failures} mismatch(es)")
    return 1 if failures else 0


def _cmd_geography(args) -> int:
    try:
        rows = _geography_rows(args.family, args.n_min, args.n_max,
                               args.group_size)
    except ConstructionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = _csv_text(rows)
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_group(args) -> int:
    try:
        pres = parse_presentation(args.presentation)
    except FPGroupError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.action == "abelianize":
        print(abelianization(pres))
        return 0
    res = tietze_simplify(pres, args.budget)
    print(format_presentation(res.presentation))
    print(f"moves: {res.moves}" + (" (budget exhausted)" if res.budget_exhausted else ""))
    triv = is_presentation_trivial(pres, args.budget)
    if triv.certified:
        print("trivial: certified")
    else:
        print(f"trivial: unknown ({triv.witness})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fibersum",
        description="Exact fiber-sum calculus for closed symplectic 4-manifold blocks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a construction file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("verify", help="compare engine totals with the closed forms")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--group", action="append", default=[],
                   help="builtin name, inline <...> presentation, or file "
                        "(repeatable; default: all builtins)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("geography", help="emit exact geography rows as CSV")
    p.add_argument("--family", default="theorem1")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--group-size", type=int, default=1,
                   help="value of g + r + 1 (default 1, the trivial group)")
    p.add_argument("--out", default="-", help="output file, - for stdout")
    p.set_defaults(func=_cmd_geography)

    p = sub.add_parser("group", help="presentation utilities")
    p.add_argument("action", choices=["simplify", "abelianize"])
    p.add_argument("presentation", help="text form, e.g. '< a, b | [a,b], a^2 >'")
    p.add_argument("--budget", type=int, default=1000)
    p.set_defaults(func=_cmd_group)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
