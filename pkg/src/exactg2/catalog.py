"""Structure-equation notation, the embedded nilpotent catalog and reference fixtures.

Tuple grammar (whitespace, ``^``, braces and ``*`` are tolerated)::

    tuple ::= '(' entry (',' entry)* ')'
    entry ::= '0' | term (('+' | '-') term)*
    term  ::= [coefficient] 'e' digit digit

A coefficient is a rational such as ``9/2`` optionally times ``sqrt3``.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .exterior import KForm, parse_form
from .lie import LieAlgebra, central_series, validate_jacobi
from .linalg import ExactMatrix
from .ring import EMPTY, Registry, SQRT3, UsageError, format_scalar, numbered_registry, parse_polynomial, sign, to_scalar

CATALOG_ENV = "EXACTG2_CATALOG"
FIXTURES_ENV = "EXACTG2_FIXTURES"


class ParseError(UsageError):
    def __init__(self, message, position=None, text=""):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else f"{message}{where}")
        self.position = position


class MalformedAlgebraError(UsageError):
    """The parsed structure equations violate the Jacobi identity."""

    def __init__(self, witness):
        super().__init__(f"Jacobi identity fails on (e{witness[0]}, e{witness[1]}, e{witness[2]})")
        self.witness = witness


_TERM = re.compile(
    r"""\s*(?P<sign>[+\-−])?\s*
        (?P<coef>\d+(?:/\d+)?)?\s*\*?\s*
        (?P<root>sqrt3|√3)?\s*\*?\s*
        [eE]\s*\^?\s*\{?\s*(?P<idx>\d\s*\d)\s*\}?""",
    re.VERBOSE,
)


def _normalise(text: str) -> str:
    return text.replace("−", "-").replace("\\,", "")


def _parse_entry(entry: str, dim: int, offset: int, full: str):
    """Parse one tuple entry into {(i, j): coefficient}."""
    stripped = entry.strip()
    if stripped == "0":
        return {}
    if not stripped:
        raise ParseError("empty entry", offset, full)
    out = {}
    pos = 0
    first = True
    while pos < len(entry):
        if not entry[pos:].strip():
            break
        m = _TERM.match(entry, pos)
        if not m or m.end() == pos:
            raise ParseError("expected a term like 'e12' or '-9/2e37'", offset + pos, full)
        sgn = m.group("sign")
        if not first and sgn is None:
            raise ParseError("missing '+' or '-' between terms", offset + pos, full)
        first = False
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("root"):
            coef = coef * SQRT3
        if sgn in ("-", "−"):
            coef = -coef
        digits = m.group("idx").replace(" ", "")
        i, j = int(digits[0]), int(digits[1])
        for k in (i, j):
            if not 1 <= k <= dim:
                raise ParseError(f"index {k} out of range 1..{dim}", offset + m.start("idx"), full)
        if i == j:
            raise ParseError(f"repeated index in e{i}{j}", offset + m.start("idx"), full)
        if i > j:
            i, j, coef = j, i, -coef
        out[(i, j)] = to_scalar(out.get((i, j), 0) + coef)
        if not out[(i, j)]:
            del out[(i, j)]
        pos = m.end()
    return out


def _split_tuple(text: str):
    src = _normalise(text)
    s = src.strip()
    start = src.find("(")
    end = src.rfind(")")
    if not s.startswith("(") or not s.endswith(")") or start < 0 or end < start:
        raise ParseError("a tuple must be enclosed in parentheses", 0, text)
    body = src[start + 1:end]
    depth = 0
    pieces, offsets, cur, cur_off = [], [], [], start + 1
    for k, ch in enumerate(body):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            pieces.append("".join(cur))
            offsets.append(cur_off)
            cur, cur_off = [], start + 2 + k
        else:
            cur.append(ch)
    pieces.append("".join(cur))
    offsets.append(cur_off)
    return src, pieces, offsets


def parse_structure_equations(text: str, name: str = "", validate: bool = True, ideal=None) -> LieAlgebra:
    """Parse ``(0,0,e12,e13,e14+e23,e34-e25)`` into a validated Lie algebra."""
    src, pieces, offsets = _split_tuple(text)
    dim = len(pieces)
    if dim > 9:
        raise ParseError("single-digit indices limit the dimension to 9", None, text)
    diffs = []
    for piece, off in zip(pieces, offsets):
        coeffs = _parse_entry(piece, dim, off, src)
        diffs.append(KForm(dim, 2, coeffs))
    g = LieAlgebra(diffs, ideal=ideal, name=name)
    if validate and g.is_numeric():
        bad = validate_jacobi(g)
        if bad is not None:
            raise MalformedAlgebraError(bad)
    return g


def _format_term(c, i, j, first):
    s = sign(c)
    mag = c if s > 0 else -c
    if isinstance(mag, Fraction):
        body = f"e{i}{j}" if mag == 1 else f"{format_scalar(mag)}e{i}{j}"
    else:
        body = f"({format_scalar(c)})*e{i}{j}" if mag.a and mag.b else f"{format_scalar(mag)}*e{i}{j}"
        if mag.a and mag.b:
            s = 1
    if first:
        return ("-" if s < 0 else "") + body
    return ("-" if s < 0 else "+") + body


def render_structure_equations(g: LieAlgebra) -> str:
    """Canonical tuple text; multi-indices sorted, no spaces."""
    entries = []
    for f in g.differentials:
        if not f:
            entries.append("0")
            continue
        parts = []
        for idx, c in f.items():
            if not c.is_constant():
                raise UsageError("cannot render symbolic structure constants as a tuple")
            parts.append(_format_term(c.constant_value(), idx[0], idx[1], not parts))
        entries.append("".join(parts))
    return "(" + ",".join(entries) + ")"


# ---------------------------------------------------------------------------
# Bracket tables
# ---------------------------------------------------------------------------

_BRACKET = re.compile(r"\[\s*e_?\{?(\d)\}?\s*,\s*e_?\{?(\d)\}?\s*\]\s*=\s*([^;\n]+)")
_VEC_TERM = re.compile(r"\s*([+-])?\s*(\d+(?:/\d+)?)?\s*\*?\s*(sqrt3)?\s*\*?\s*e_?\{?(\d)\}?")


def parse_bracket_table(text: str, dim: int, name: str = "", ideal=None) -> LieAlgebra:
    """Parse ``[e1,e3] = e4 - 3e6; [e1,e4] = e5`` (nonzero brackets only)."""
    text = _normalise(text)
    brackets = {}
    matched = 0
    for m in _BRACKET.finditer(text):
        matched += 1
        i, j = int(m.group(1)), int(m.group(2))
        rhs = m.group(3).strip()
        vec = [Fraction(0)] * dim
        pos = 0
        while pos < len(rhs):
            t = _VEC_TERM.match(rhs, pos)
            if not t or t.end() == pos:
                raise ParseError("bad bracket value", m.start(3) + pos, text)
            c = Fraction(t.group(2)) if t.group(2) else Fraction(1)
            if t.group(3):
                c = c * SQRT3
            if t.group(1) == "-":
                c = -c
            k = int(t.group(4))
            if not 1 <= k <= dim:
                raise ParseError(f"index {k} out of range", m.start(3) + pos, text)
            vec[k - 1] = vec[k - 1] + c
            pos = t.end()
        if (i, j) in brackets or (j, i) in brackets:
            raise ParseError(f"bracket [e{i},e{j}] given twice", m.start(), text)
        brackets[(i, j)] = vec
    if not matched and text.strip():
        raise ParseError("no brackets found", 0, text)
    g = LieAlgebra.from_brackets(dim, brackets, ideal=ideal, name=name)
    bad = validate_jacobi(g)
    if bad is not None:
        raise MalformedAlgebraError(bad)
    return g


def render_bracket_table(g: LieAlgebra) -> str:
    out = []
    for (i, j), vec in g.bracket_table().items():
        parts = []
        for k, c in enumerate(vec, start=1):
            if c:
                v = c.constant_value()
                s = sign(v)
                mag = v if s > 0 else -v
                body = f"e{k}" if mag == 1 else f"{format_scalar(mag)}e{k}"
                parts.append(("-" if s < 0 else "") + body if not parts else ("-" if s < 0 else "+") + body)
        out.append(f"[e{i},e{j}]={''.join(parts)}")
    return "; ".join(out)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@dataclass
class CatalogEntry:
    id: int
    tuple_text: str
    provenance: str
    algebra: LieAlgebra = field(repr=False)

    @property
    def aliases(self):
        return re.findall(r"alias (\S+)", self.provenance)

    @property
    def expected_exclusion(self):
        """Degree k at which the listed proof excludes this algebra, or None if admitting."""
        m = re.search(r"excluded k=(\d)", self.provenance)
        return int(m.group(1)) if m else None


def _data_text(filename: str) -> str:
    return resources.files("exactg2").joinpath("data", filename).read_text(encoding="utf-8")


def parse_catalog(text: str):
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        body, _, prov = line.partition("#")
        parts = body.split(None, 1)
        if len(parts) != 2:
            raise ParseError(f"catalog line {lineno} must read '<id> <tuple> # <provenance>'")
        ident, tup = parts[0], parts[1].strip()
        try:
            g = parse_structure_equations(tup, name=f"catalog-{ident}")
        except UsageError as exc:
            raise UsageError(f"catalog entry {ident}: {exc}") from None
        g = g.with_ideal(list(range(1, g.dim + 1))).renamed(f"catalog-{ident}")
        if not central_series(g).nilpotent:
            raise UsageError(f"catalog entry {ident} is not nilpotent")
        entries.append(CatalogEntry(int(ident), tup, prov.strip(), g))
    return entries


def load_catalog(path: str | None = None):
    """The 34 nilpotent six-dimensional algebras, validated, in id order."""
    path = path or os.environ.get(CATALOG_ENV)
    text = open(path, encoding="utf-8").read() if path else _data_text("catalog.txt")
    entries = parse_catalog(text)
    ids = [e.id for e in entries]
    if ids != sorted(ids) or len(set(ids)) != len(ids):
        raise UsageError("catalog ids must be unique and increasing")
    return entries


def catalog_entry(key, entries=None):
    """Look up by numeric id or alias (``a``, ``n1``, ``n2``, ``worked``)."""
    entries = entries if entries is not None else load_catalog()
    key = str(key)
    for e in entries:
        if str(e.id) == key or key in e.aliases:
            return e
    raise UsageError(f"unknown catalog id {key!r}")


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


@dataclass
class AppendixMatrix:
    algebra: str
    degree: int
    basis: list          # KForms on the 6-dimensional nilpotent algebra
    matrix: ExactMatrix  # unreliable entries hold zero
    unreliable: list     # (row, col), 1-based
    readings: dict = field(default_factory=dict)   # (row, col) -> interpreted entry
    compare: str = "entrywise"                     # or "behavioural"

    def reliable(self) -> bool:
        return not self.unreliable

    def with_readings(self) -> ExactMatrix:
        """The matrix with each unreliable cell replaced by its recorded reading."""
        missing = [rc for rc in self.unreliable if rc not in self.readings]
        if missing:
            raise UsageError(f"no reading recorded for cells {missing}")
        rows = [list(r) for r in self.matrix.rows]
        for (r, c), v in self.readings.items():
            rows[r - 1][c - 1] = v
        return ExactMatrix(rows, self.matrix.registry)


@dataclass
class ReferenceFixtures:
    s: LieAlgebra
    s_from_brackets: LieAlgebra
    s_phi: KForm
    s_primitive: KForm
    h: LieAlgebra
    h_from_brackets: LieAlgebra
    h_change: ExactMatrix
    h_E: LieAlgebra
    h_phi_E: KForm
    h_primitive_E: KForm
    appendix: dict       # (algebra, k) -> AppendixMatrix
    sample_points: dict  # algebra alias -> {param: value}
    constraints: dict    # algebra alias -> text
    derivations: dict    # algebra alias -> generic derivation as printed (a1..a16)
    obstruction: dict    # raw texts of the exactness-obstruction data


def _matrix(text: str, registry: Registry):
    rows, bad = [], []
    for r, line in enumerate(l for l in text.strip().splitlines() if l.strip()):
        row = []
        for c, cell in enumerate(line.split(",")):
            cell = cell.strip()
            if cell == "?":
                bad.append((r + 1, c + 1))
                row.append(0)
            else:
                row.append(parse_polynomial(cell, registry))
        rows.append(row)
    return ExactMatrix(rows, registry), bad


def reference_fixtures(path: str | None = None) -> ReferenceFixtures:
    """Named fixtures; ``path`` (or the EXACTG2_FIXTURES variable) overrides the packaged file."""
    path = path or os.environ.get(FIXTURES_ENV)
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(open(path, encoding="utf-8").read() if path else _data_text("fixtures.ini"))
    s_sec, h_sec, e_sec = cp["s-example"], cp["h-example"], cp["h-E-basis"]
    s = parse_structure_equations(s_sec["differentials"], "s", ideal=_ideal(s_sec["ideal"]))
    s_br = parse_bracket_table(s_sec["brackets"], 7, "s", ideal=_ideal(s_sec["ideal"]))
    h = parse_structure_equations(h_sec["differentials"], "h", ideal=_ideal(h_sec["ideal"]))
    h_br = parse_bracket_table(h_sec["brackets"], 7, "h", ideal=_ideal(h_sec["ideal"]))
    change, _ = _matrix(e_sec["change"], EMPTY)
    h_E = parse_structure_equations(e_sec["differentials"], "h-E")
    appendix = {}
    reg = numbered_registry("a", 16)
    for name in cp.sections():
        if not name.startswith("appendix "):
            continue
        _, alg, k = name.split()
        sec = cp[name]
        basis = [parse_form(t, 6) for t in sec["basis"].split(";")]
        mat, bad = _matrix(sec["matrix"], reg)
        readings = {}
        for part in sec.get("readings", "").split(";"):
            if part.strip():
                cell, _, value = part.partition(":")
                r, c = (int(x) for x in cell.split(","))
                readings[(r, c)] = parse_polynomial(value.strip(), reg)
        appendix[(alg, int(k[1:]))] = AppendixMatrix(alg, int(k[1:]), basis, mat, bad, readings,
                                                      sec.get("compare", "entrywise"))
    derivations = {}
    for name in cp.sections():
        if name.startswith("derivation "):
            alias = name.split()[1]
            derivations[alias] = _matrix(cp[name]["matrix"], reg)[0]
    samples = {}
    constraints = {}
    for key, val in cp["samples"].items():
        pt = {}
        for part in val.split(","):
            n, v = part.split("=")
            pt[n.strip()] = Fraction(v.strip())
        samples[key] = pt
    for key, val in cp["constraints"].items():
        constraints[key] = val.strip()
    return ReferenceFixtures(
        s=s, s_from_brackets=s_br,
        s_phi=parse_form(s_sec["phi"], 7), s_primitive=parse_form(s_sec["primitive"], 7),
        h=h, h_from_brackets=h_br, h_change=change, h_E=h_E,
        h_phi_E=parse_form(e_sec["phi"], 7), h_primitive_E=parse_form(e_sec["primitive"], 7),
        appendix=appendix, sample_points=samples, constraints=constraints,
        derivations=derivations,
        obstruction={k: " ".join(v.split()) for k, v in cp["obstruction"].items()},
    )


def _ideal(text: str):
    a, b = text.split("..")
    return list(range(int(a), int(b) + 1))


def standard_phi_text() -> str:
    return "e127 + e347 + e567 + e135 - e146 - e236 - e245"
