"""Command-line front end: file formats, rule construction, rendering
and report emission for the library operations.

Two text formats are spoken.  "CA v1" carries a truth table; "AFFINE
v1" carries component matrices and a constant.  Both round-trip through
parse and print.  Commands read the primary algebra from stdin (or
--in) and write to stdout (or --out), so they compose in pipelines:

    casim eca 150 | casim power -n 3 | casim matrices

Exit codes: 0 success or a passing check, 1 a mathematical No or FAIL,
2 usage, parse or cap errors, 3 an Unknown verdict.  Output is
deterministic; checks end with a single RESULT line.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import affine_ca, ca_core, simulation
from .affine_ca import AffineAlgebra, CanonicalAdditive
from .ca_core import LocalAlgebra, SpaceTimeDiagram
from .caps import DEFAULT_CAPS, CapExceeded, Caps
from .fp_linalg import FpMatrix, common_invariant_subspaces, is_simple


class FormatError(Exception):
    """Malformed input file; carries the offending line number."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# file formats

def print_ca(algebra: LocalAlgebra) -> str:
    lines = ["CA v1", f"states {algebra.m}", f"radius {algebra.r}"]
    if algebra.m <= 10:
        lines.append("table " + "".join(str(x) for x in algebra.table))
    else:
        lines.append("table-list " + " ".join(str(x) for x in algebra.table))
    return "\n".join(lines) + "\n"


def print_affine(algebra: AffineAlgebra) -> str:
    if algebra.d == 0:
        raise ValueError("zero-dimensional rules are written as CA files")
    lines = ["AFFINE v1", f"p {algebra.p}", f"dim {algebra.d}", f"radius {algebra.r}"]
    for i in range(-algebra.r, algebra.r + 1):
        lines.append(f"component {i}")
        for row in algebra.component(i).entries:
            lines.append(" ".join(str(x) for x in row))
    lines.append("constant")
    lines.append(" ".join(str(x) for x in algebra.constant))
    return "\n".join(lines) + "\n"


class _LineReader:
    def __init__(self, text: str) -> None:
        self.lines = text.splitlines()
        self.pos = 0

    def next_content(self) -> tuple[int, str]:
        while self.pos < len(self.lines):
            self.pos += 1
            stripped = self.lines[self.pos - 1].strip()
            if stripped and not stripped.startswith("#"):
                return self.pos, stripped
        raise FormatError(len(self.lines) + 1, "unexpected end of file")

    def expect_int_field(self, name: str) -> int:
        number, line = self.next_content()
        parts = line.split()
        if len(parts) != 2 or parts[0] != name:
            raise FormatError(number, f"expected '{name} <value>', got {line!r}")
        try:
            return int(parts[1])
        except ValueError:
            raise FormatError(number, f"{name} value {parts[1]!r} is not an integer")


def parse_ca(text: str) -> LocalAlgebra:
    reader = _LineReader(text)
    number, header = reader.next_content()
    if header != "CA v1":
        raise FormatError(number, f"expected header 'CA v1', got {header!r}")
    m = reader.expect_int_field("states")
    r = reader.expect_int_field("radius")
    number, line = reader.next_content()
    parts = line.split()
    if parts[0] == "table" and len(parts) == 2 and m <= 10:
        try:
            table = tuple(int(ch) for ch in parts[1])
        except ValueError:
            raise FormatError(number, "table digits must be 0-9")
    elif parts[0] == "table-list":
        try:
            table = tuple(int(x) for x in parts[1:])
        except ValueError:
            raise FormatError(number, "table-list entries must be integers")
    else:
        raise FormatError(number, f"expected 'table <digits>' or 'table-list ...', got {line!r}")
    try:
        return LocalAlgebra(m, r, table)
    except ValueError as exc:
        raise FormatError(number, str(exc))


def parse_affine(text: str) -> AffineAlgebra:
    reader = _LineReader(text)
    number, header = reader.next_content()
    if header != "AFFINE v1":
        raise FormatError(number, f"expected header 'AFFINE v1', got {header!r}")
    p = reader.expect_int_field("p")
    d = reader.expect_int_field("dim")
    r = reader.expect_int_field("radius")
    if d < 1:
        raise FormatError(number, "dim must be at least 1")
    components = []
    for i in range(-r, r + 1):
        number, line = reader.next_content()
        if line != f"component {i}":
            raise FormatError(number, f"expected 'component {i}', got {line!r}")
        rows = []
        for _ in range(d):
            number, line = reader.next_content()
            try:
                row = [int(x) for x in line.split()]
            except ValueError:
                raise FormatError(number, "matrix rows must be integers")
            if len(row) != d:
                raise FormatError(number, f"expected {d} entries per row")
            rows.append(row)
        try:
            components.append(FpMatrix.from_rows(p, rows))
        except ValueError as exc:
            raise FormatError(number, str(exc))
    number, line = reader.next_content()
    if line != "constant":
        raise FormatError(number, f"expected 'constant', got {line!r}")
    number, line = reader.next_content()
    try:
        constant = tuple(int(x) % p for x in line.split())
    except ValueError:
        raise FormatError(number, "constant entries must be integers")
    if len(constant) != d:
        raise FormatError(number, f"expected {d} constant entries")
    try:
        return AffineAlgebra(p, d, r, tuple(components), constant)
    except ValueError as exc:
        raise FormatError(number, str(exc))


def parse_algebra(text: str) -> LocalAlgebra | AffineAlgebra:
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped == "CA v1":
            return parse_ca(text)
        if stripped == "AFFINE v1":
            return parse_affine(text)
        raise FormatError(1, f"unknown header {stripped!r}; expected 'CA v1' or 'AFFINE v1'")
    raise FormatError(1, "empty input")


def as_table(algebra: LocalAlgebra | AffineAlgebra, caps: Caps = DEFAULT_CAPS) -> LocalAlgebra:
    if isinstance(algebra, AffineAlgebra):
        return affine_ca.to_table(algebra, caps)
    return algebra


def as_canonical(algebra: LocalAlgebra | AffineAlgebra) -> CanonicalAdditive:
    """The canonical additive form, or a ValueError naming the obstacle."""
    if isinstance(algebra, AffineAlgebra):
        if algebra.d != 1 or not algebra.is_additive():
            raise ValueError("a canonical additive rule (dim 1, zero constant) is required")
        return CanonicalAdditive(
            algebra.p, algebra.r, tuple(mat.entries[0][0] for mat in algebra.components))
    canonical = affine_ca.fit_canonical_additive(algebra)
    if canonical is None:
        raise ValueError("the input table is not canonical additive")
    return canonical


# ---------------------------------------------------------------------------
# rendering

_GLYPHS = "0123456789abcdefghijklmnopqrstuvwxyz"


def render_text(diagram: SpaceTimeDiagram, dots: bool = False) -> str:
    lines = []
    for row in diagram.rows:
        if diagram.m <= len(_GLYPHS):
            text = "".join(_GLYPHS[x] for x in row)
            if dots:
                text = text.replace("0", ".")
        else:
            text = " ".join(str(x) for x in row)
        lines.append(text)
    return "\n".join(lines) + "\n"


def render_pgm(diagram: SpaceTimeDiagram) -> str:
    width = diagram.width
    height = len(diagram.rows)
    scale = diagram.m - 1
    lines = ["P2", f"{width} {height}", "255"]
    for row in diagram.rows:
        lines.append(" ".join(str((255 * x) // scale if scale else 0) for x in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# command implementations

class _Io:
    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self._out_parts: list[str] = []

    def read_primary(self) -> str:
        if getattr(self.args, "infile", None):
            with open(self.args.infile, "r", encoding="ascii") as handle:
                return handle.read()
        return sys.stdin.read()

    def primary_algebra(self) -> LocalAlgebra | AffineAlgebra:
        return parse_algebra(self.read_primary())

    def file_algebra(self, path: str) -> LocalAlgebra | AffineAlgebra:
        if path == "-":
            return parse_algebra(sys.stdin.read())
        with open(path, "r", encoding="ascii") as handle:
            return parse_algebra(handle.read())

    def emit(self, text: str) -> None:
        self._out_parts.append(text)

    def finish(self) -> None:
        text = "".join(self._out_parts)
        if getattr(self.args, "out", None):
            with open(self.args.out, "w", encoding="ascii") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)


def _result_line(io: _Io, verdict: str) -> None:
    io.emit(f"RESULT: {verdict}\n")


def _json_report(io: _Io, payload: dict) -> None:
    io.emit(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _cmd_show(io: _Io) -> int:
    algebra = io.primary_algebra()
    if isinstance(algebra, AffineAlgebra):
        io.emit(print_affine(algebra))
    else:
        io.emit(print_ca(algebra))
    return 0


def _cmd_eca(io: _Io) -> int:
    io.emit(print_ca(ca_core.eca(io.args.number)))
    return 0


def _cmd_canonical(io: _Io) -> int:
    rule = affine_ca.canonical_additive(io.args.p, io.args.coefficients)
    io.emit(print_affine(rule.as_affine()))
    return 0


def _cmd_power(io: _Io, caps: Caps) -> int:
    algebra = as_table(io.primary_algebra(), caps)
    io.emit(print_ca(ca_core.iterative_power(algebra, io.args.n, caps)))
    return 0


def _cmd_product(io: _Io, caps: Caps) -> int:
    factors = [as_table(io.primary_algebra(), caps)]
    for path in io.args.factors:
        factors.append(as_table(io.file_algebra(path), caps))
    io.emit(print_ca(ca_core.product(factors, caps)))
    return 0


def _parse_init(spec: str, m: int) -> tuple[int, ...]:
    if spec.startswith("single:"):
        return (int(spec.split(":", 1)[1]),)
    if "," in spec:
        return tuple(int(x) for x in spec.split(","))
    if not spec.isdigit() and m > 10:
        raise ValueError("initial words for m > 10 must be comma separated")
    return tuple(int(ch) for ch in spec)


def _cmd_evolve(io: _Io, caps: Caps) -> int:
    algebra = as_table(io.primary_algebra(), caps)
    word = _parse_init(io.args.init, algebra.m)
    boundary = io.args.boundary
    if boundary.startswith("background:"):
        background = int(boundary.split(":", 1)[1])
        diagram = ca_core.evolve(algebra, word, background, io.args.steps, "background")
    elif boundary.startswith("cyclic:"):
        length = int(boundary.split(":", 1)[1])
        if length < len(word):
            raise ValueError("cyclic length is shorter than the initial word")
        pad = length - len(word)
        ring = (0,) * (pad // 2) + word + (0,) * (pad - pad // 2)
        diagram = ca_core.evolve(algebra, ring, 0, io.args.steps, "cyclic")
    else:
        raise ValueError("boundary must be background:<state> or cyclic:<length>")
    if io.args.render == "pgm":
        io.emit(render_pgm(diagram))
    else:
        io.emit(render_text(diagram, io.args.dots))
    return 0


def _cmd_subalgebras(io: _Io, caps: Caps) -> int:
    algebra = as_table(io.primary_algebra(), caps)
    for carrier in ca_core.enumerate_subalgebras(algebra, caps):
        io.emit(",".join(str(s) for s in carrier) + "\n")
    return 0


def _cmd_congruences(io: _Io, caps: Caps) -> int:
    algebra = as_table(io.primary_algebra(), caps)
    for congruence in ca_core.enumerate_congruences(algebra, caps):
        io.emit(str(congruence) + "\n")
    return 0


def _parse_partition(spec: str) -> list[list[int]]:
    return [[int(x) for x in block.split(",")] for block in spec.split("|")]


def _cmd_quotient(io: _Io, caps: Caps) -> int:
    primary = as_table(io.primary_algebra(), caps)
    if io.args.of is None:
        if io.args.classes is None:
            raise ValueError("quotient needs --classes, or --of with --check")
        congruence = ca_core.Congruence.from_blocks(primary, _parse_partition(io.args.classes))
        io.emit(print_ca(ca_core.quotient(primary, congruence)))
        return 0
    big = as_table(io.file_algebra(io.args.of), caps)
    if io.args.classes is not None:
        congruence = ca_core.Congruence.from_blocks(big, _parse_partition(io.args.classes))
        result = ca_core.quotient(big, congruence)
        if not io.args.check:
            io.emit(print_ca(result))
            return 0
        witness = ca_core.are_isomorphic(result, primary, caps)
        if witness is not None:
            io.emit(f"quotient by {congruence} is isomorphic via "
                    + ",".join(str(x) for x in witness) + "\n")
            _result_line(io, "PASS")
            return 0
        _result_line(io, "FAIL")
        return 1
    # search all congruences of --of for one whose quotient matches stdin
    for congruence in ca_core.enumerate_congruences(big, caps):
        result = ca_core.quotient(big, congruence)
        if result.m != primary.m:
            continue
        witness = ca_core.are_isomorphic(result, primary, caps)
        if witness is not None:
            io.emit(f"classes {congruence}\n")
            io.emit("iso " + ",".join(str(x) for x in witness) + "\n")
            _result_line(io, "PASS")
            return 0
    _result_line(io, "FAIL")
    return 1


def _cmd_iso(io: _Io, caps: Caps) -> int:
    left = as_table(io.primary_algebra(), caps)
    right = as_table(io.file_algebra(io.args.other), caps)
    matcher = simulation._IsoMatcher(caps.scaled_to(max(left.m, right.m)))
    witness = matcher.find(left, right)
    if witness is None:
        _result_line(io, "FAIL")
        return 1
    io.emit("iso " + ",".join(str(x) for x in witness) + "\n")
    _result_line(io, "PASS")
    return 0


def _cmd_fit_affine(io: _Io, caps: Caps) -> int:
    algebra = as_table(io.primary_algebra(), caps)
    affine = affine_ca.fit_affine(algebra, io.args.p)
    if affine is None:
        io.emit("not affine under the positional encoding\n")
        _result_line(io, "FAIL")
        return 1
    io.emit(print_affine(affine))
    return 0


def _infer_prime(m: int) -> int:
    for p in range(2, m + 1):
        if m % p == 0:
            return p
    raise ValueError("state count 1 has no prime base")


def _cmd_e0(io: _Io) -> int:
    rule = as_canonical(io.primary_algebra())
    profile = affine_ca.e0_evolution(rule, io.args.n)
    io.emit(f"positions {-profile.reach}..{profile.reach}\n")
    io.emit(" ".join(str(x) for x in profile.values) + "\n")
    return 0


def _matrix_lines(mat: FpMatrix) -> list[str]:
    if mat.p <= 10:
        return ["".join(str(x) for x in row) for row in mat.entries]
    return [" ".join(str(x) for x in row) for row in mat.entries]


def _cmd_matrices(io: _Io, caps: Caps) -> int:
    algebra = io.primary_algebra()
    if io.args.n is not None:
        rule = as_canonical(algebra)
        matrices = affine_ca.component_matrices(rule, io.args.n)
        r = rule.r
    else:
        if isinstance(algebra, AffineAlgebra):
            affine = algebra
        else:
            affine = affine_ca.fit_affine(algebra, _infer_prime(algebra.m))
            if affine is None:
                raise ValueError("input is not affine; cannot print component matrices")
        matrices = [affine.component(i) for i in range(-affine.r, affine.r + 1)]
        r = affine.r
    for i, mat in zip(range(-r, r + 1), matrices):
        io.emit(f"component {i}\n")
        for line in _matrix_lines(mat):
            io.emit(line + "\n")
    return 0


def _cmd_structure(io: _Io) -> int:
    rule = as_canonical(io.primary_algebra())
    report = affine_ca.check_structure(rule, io.args.n)
    for check in report.checks:
        status = "ok" if check.passed else "FAIL"
        io.emit(f"{status} {check.name}\n")
        if not check.passed:
            io.emit(f"  expected {check.expected}\n  actual   {check.actual}\n")
    _result_line(io, "PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _cmd_invariant_subspaces(io: _Io, caps: Caps) -> int:
    rule = as_canonical(io.primary_algebra())
    matrices = affine_ca.component_matrices(rule, io.args.n)
    for space in common_invariant_subspaces(matrices, io.args.n, caps=caps):
        io.emit(f"dim {space.dim}: {space}\n")
    return 0


def _cmd_simple(io: _Io) -> int:
    rule = as_canonical(io.primary_algebra())
    matrices = affine_ca.component_matrices(rule, io.args.n)
    simple = is_simple(matrices, io.args.n)
    _result_line(io, "PASS" if simple else "FAIL")
    return 0 if simple else 1


def _cmd_split(io: _Io, caps: Caps) -> int:
    rule = as_canonical(io.primary_algebra())
    result = affine_ca.verify_splitting(rule, io.args.k, io.args.l, caps)
    io.emit(f"power B^[{rule.p ** io.args.k * io.args.l}] vs {rule.p ** io.args.k} copies "
            f"of B^[{io.args.l}]: {result.detail}\n")
    _result_line(io, "PASS" if result.ok else "FAIL")
    return 0 if result.ok else 1


def _cmd_classify(io: _Io) -> int:
    algebra = io.primary_algebra()
    if isinstance(algebra, LocalAlgebra):
        affine = affine_ca.fit_affine(algebra, _infer_prime(algebra.m))
        if affine is None:
            raise ValueError("input is not affine under the positional encoding")
    else:
        affine = algebra
    record = affine_ca.classify_affine(affine)
    io.emit(f"p {record.p}\ndim {record.d}\nradius {record.r}\n")
    io.emit("component-bijective " + " ".join(
        "yes" if b else "no" for b in record.component_bijective) + "\n")
    io.emit(f"bijective-condition {'yes' if record.bijective_condition else 'no'}\n")
    io.emit(f"left-witness {record.left_witness}\n")
    io.emit(f"right-witness {record.right_witness}\n")
    io.emit(f"additive {'yes' if record.additive else 'no'}\n")
    io.emit(f"canonical-additive {'yes' if record.canonical_additive else 'no'}\n")
    if record.canonical_additive and record.r == 1:
        capacity = simulation.classify_canonical(as_canonical(affine))
        io.emit(f"capacity-class {capacity.describe()}\n")
        if capacity.caveat:
            io.emit(f"caveat {capacity.caveat}\n")
    return 0


def _bounds_from_args(args: argparse.Namespace) -> simulation.SearchBounds:
    return simulation.SearchBounds(args.n_max, args.k_max, args.size_cap)


def _cmd_simulates(io: _Io, caps: Caps) -> int:
    simulator = as_table(io.primary_algebra(), caps)
    target = as_table(io.file_algebra(io.args.target), caps)
    bounds = _bounds_from_args(io.args)
    verdict = simulation.simulates(target, simulator, bounds, caps)
    if io.args.json:
        payload = {
            "command": "simulates",
            "inputs": {"target_states": target.m, "simulator_states": simulator.m},
            "bounds": {"n_max": bounds.n_max, "k_max": bounds.k_max,
                       "size_cap": bounds.size_cap},
            "result": verdict.outcome,
        }
        if verdict.witness is not None:
            payload["witness"] = {
                "powers": list(verdict.witness.derivation.powers),
                "carrier": list(verdict.witness.derivation.carrier),
                "classes": [list(b) for b in verdict.witness.derivation.partition],
                "iso": list(verdict.witness.isomorphism),
            }
        if verdict.reason is not None:
            payload["reason"] = verdict.reason
        _json_report(io, payload)
    else:
        if verdict.witness is not None:
            io.emit("witness " + verdict.witness.describe() + "\n")
        if verdict.reason is not None:
            io.emit("reason " + verdict.reason + "\n")
    if verdict.outcome == "yes":
        _result_line(io, "PASS")
        return 0
    if verdict.outcome == "no":
        _result_line(io, "FAIL")
        return 1
    _result_line(io, "UNKNOWN")
    return 3


def _cmd_verify(io: _Io, caps: Caps) -> int:
    bounds = _bounds_from_args(io.args)
    algebra = io.primary_algebra()
    if io.args.what == "characterization":
        rule = as_canonical(algebra)
        report = simulation.verify_characterization(rule, bounds, caps)
        items = [{
            "derivation": item.derivation.describe(),
            "size": item.size,
            "ok": item.ok,
            "note": item.note,
        } for item in report.items]
        if io.args.json:
            _json_report(io, {
                "command": "verify characterization",
                "inputs": {"p": rule.p, "coefficients": list(rule.coefficients)},
                "bounds": {"n_max": bounds.n_max, "k_max": bounds.k_max,
                           "size_cap": bounds.size_cap},
                "result": "pass" if report.passed else "fail",
                "items": items,
            })
        else:
            for item in report.items:
                status = "ok" if item.ok else "FAIL"
                io.emit(f"{status} size {item.size}: {item.note} [{item.derivation.describe()}]\n")
        _result_line(io, "PASS" if report.passed else "FAIL")
        return 0 if report.passed else 1
    # affine-closure
    if isinstance(algebra, LocalAlgebra):
        affine = affine_ca.fit_affine(algebra, _infer_prime(algebra.m))
        if affine is None:
            raise ValueError("input is not affine under the positional encoding")
    else:
        affine = algebra
    report = simulation.verify_affine_closure(affine, bounds, caps)
    if not report.applicable:
        io.emit("NOT APPLICABLE: the rule lacks bijective outermost components "
                "(left witness strictly left of right witness)\n")
    if io.args.json:
        _json_report(io, {
            "command": "verify affine-closure",
            "inputs": {"p": affine.p, "dim": affine.d, "radius": affine.r},
            "bounds": {"n_max": bounds.n_max, "k_max": bounds.k_max,
                       "size_cap": bounds.size_cap},
            "result": "pass" if report.passed else "fail",
            "items": [{
                "derivation": item.derivation.describe(),
                "size": item.size,
                "affine": item.affine,
                "witnesses": list(item.witnesses),
                "ok": item.ok,
                "note": item.note,
            } for item in report.items],
        })
    else:
        for item in report.items:
            status = "ok" if item.ok else "FAIL"
            io.emit(f"{status} size {item.size}: {item.note}, witnesses {item.witnesses} "
                    f"[{item.derivation.describe()}]\n")
    _result_line(io, "PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casim",
        description="cellular automaton local algebras over prime fields: "
                    "powers, products, subalgebras, quotients and the simulation preorder")
    parser.add_argument("--in", dest="infile", default=None,
                        help="read the primary algebra from a file")
    parser.add_argument("--out", default=None, help="write output to a file")
    parser.add_argument("--cap", type=int, default=None,
                        help="override the truth-table entry cap")
    # the same options are accepted after the subcommand; SUPPRESS keeps a
    # subcommand without them from clobbering values parsed before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="infile", default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    common.add_argument("--cap", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=lambda
                                **kw: argparse.ArgumentParser(parents=[common], **kw))

    sub.add_parser("show", help="parse and reprint in canonical form")
    cmd = sub.add_parser("eca", help="construct an elementary CA by Wolfram number")
    cmd.add_argument("number", type=int)
    cmd = sub.add_parser("canonical", help="construct a canonical additive rule")
    cmd.add_argument("-p", type=int, required=True)
    cmd.add_argument("-a", dest="coefficients", type=int, nargs="+", required=True,
                     help="coefficients a_-r .. a_r")
    cmd = sub.add_parser("power", help="iterative power (grouping)")
    cmd.add_argument("-n", type=int, required=True)
    cmd = sub.add_parser("product", help="componentwise product with further factors")
    cmd.add_argument("factors", nargs="+", help="files with further factors")
    cmd = sub.add_parser("evolve", help="run the global rule and render the diagram")
    cmd.add_argument("--init", required=True, help="'single:<s>', a digit word, or comma list")
    cmd.add_argument("--steps", type=int, required=True)
    cmd.add_argument("--boundary", default="background:0",
                     help="background:<state> or cyclic:<length>")
    cmd.add_argument("--render", choices=["text", "pgm"], default="text")
    cmd.add_argument("--dots", action="store_true", help="render state 0 as '.'")
    sub.add_parser("subalgebras", help="list all closed carriers")
    sub.add_parser("congruences", help="list all rule-compatible partitions")
    cmd = sub.add_parser("quotient", help="quotient by a partition, or search for one")
    cmd.add_argument("--classes", help="partition, e.g. '0,2|1,3'")
    cmd.add_argument("--of", help="file with the algebra to quotient (stdin is the target)")
    cmd.add_argument("--check", action="store_true",
                     help="check the quotient against the stdin algebra")
    cmd = sub.add_parser("iso", help="isomorphism between stdin and a file")
    cmd.add_argument("other")
    cmd = sub.add_parser("fit-affine", help="recover an affine form")
    cmd.add_argument("-p", type=int, required=True)
    cmd = sub.add_parser("e0", help="one-cell seed evolution of a canonical additive rule")
    cmd.add_argument("-n", type=int, required=True)
    cmd = sub.add_parser("matrices", help="component matrices (of the n-th power)")
    cmd.add_argument("-n", type=int, default=None)
    cmd = sub.add_parser("structure", help="banded-triangular structure checks")
    cmd.add_argument("-n", type=int, required=True)
    cmd = sub.add_parser("invariant-subspaces",
                         help="lattice of common invariant subspaces of the n-th power")
    cmd.add_argument("-n", type=int, required=True)
    cmd = sub.add_parser("simple", help="is the n-th power simple?")
    cmd.add_argument("-n", type=int, required=True)
    cmd = sub.add_parser("split", help="check the power-splitting isomorphism")
    cmd.add_argument("-k", type=int, required=True)
    cmd.add_argument("-l", type=int, required=True)
    sub.add_parser("classify", help="affine classification record")
    cmd = sub.add_parser("simulates", help="does the stdin algebra simulate the target?")
    cmd.add_argument("target", help="file with the algebra to be simulated")
    cmd.add_argument("--n-max", type=int, default=2)
    cmd.add_argument("--k-max", type=int, default=2)
    cmd.add_argument("--size-cap", type=int, default=None)
    cmd.add_argument("--json", action="store_true")
    cmd = sub.add_parser("verify", help="theorem verification reports")
    cmd.add_argument("what", choices=["characterization", "affine-closure"])
    cmd.add_argument("--n-max", type=int, default=2)
    cmd.add_argument("--k-max", type=int, default=2)
    cmd.add_argument("--size-cap", type=int, default=None)
    cmd.add_argument("--json", action="store_true")
    return parser


_COMMANDS = {
    "show": lambda io, caps: _cmd_show(io),
    "eca": lambda io, caps: _cmd_eca(io),
    "canonical": lambda io, caps: _cmd_canonical(io),
    "power": _cmd_power,
    "product": _cmd_product,
    "evolve": _cmd_evolve,
    "subalgebras": _cmd_subalgebras,
    "congruences": _cmd_congruences,
    "quotient": _cmd_quotient,
    "iso": _cmd_iso,
    "fit-affine": _cmd_fit_affine,
    "e0": lambda io, caps: _cmd_e0(io),
    "matrices": _cmd_matrices,
    "structure": lambda io, caps: _cmd_structure(io),
    "invariant-subspaces": _cmd_invariant_subspaces,
    "simple": lambda io, caps: _cmd_simple(io),
    "split": _cmd_split,
    "classify": lambda io, caps: _cmd_classify(io),
    "simulates": _cmd_simulates,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    caps = DEFAULT_CAPS
    if args.cap is not None:
        from dataclasses import replace
        caps = replace(caps, table_cap=args.cap)
    io = _Io(args)
    try:
        code = _COMMANDS[args.command](io, caps)
    except FormatError as exc:
        print(f"casim: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"casim: {exc} (raise --cap or the search bounds)", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"casim: {exc}", file=sys.stderr)
        return 2
    io.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
