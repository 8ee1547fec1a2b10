"""Line-oriented manifests: ``[section]`` headers and ``key = value`` entries.

Example::

    [structure]
    builtin = heisenberg_sasakian

    [checks]
    axioms =
    sasakian = route=g_phi

Expression values are quoted strings in the field grammar; matrices separate
rows with ``;`` and entries with ``,``.  A hand-written parser keeps the line
number of every entry so diagnostics can point at it.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

import numpy as np

from . import gtb, jets, structures
from .checks import CHECKS
from .fields import ChartSpec, ExpressionSyntaxError, Field, UnknownIdentifierError, parse_expr

SECTIONS = ("chart", "structure", "checks", "sampling", "tolerances", "product")


class ManifestError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class Manifest:
    sections: dict  # name -> list[Entry]
    sha256: str
    path: str = ""

    def section(self, name: str) -> list:
        return self.sections.get(name, [])

    def get(self, section: str, key: str, default=None) -> Entry | None:
        for e in self.section(section):
            if e.key == key:
                return e
        return default


_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][\w-]*)\s*=\s*(.*)$")


def _unquote(value: str, line: int) -> str:
    value = value.strip()
    if value and value[0] in "\"'":
        q = value[0]
        if len(value) < 2 or value[-1] != q:
            raise ManifestError("unterminated quoted string", line)
        return value[1:-1]
    return value


def parse_text(text: str, path: str = "") -> Manifest:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1).lower()
            if current not in SECTIONS:
                raise ManifestError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ManifestError(f"section [{current}] appears twice", lineno)
            sections[current] = []
            continue
        m = _ENTRY.match(line)
        if not m:
            raise ManifestError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ManifestError("entry before the first [section]", lineno)
        key = m.group(1)
        if any(e.key == key for e in sections[current]):
            raise ManifestError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current].append(Entry(key, _unquote(m.group(2), lineno), lineno))
    return Manifest(sections, hashlib.sha256(text.encode()).hexdigest(), path)


def load(path: str) -> Manifest:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


# ---------------------------------------------------------------------------
# interpretation


def parse_params(entry: Entry) -> dict:
    params = {}
    for part in filter(None, (p.strip() for p in entry.value.split(","))):
        if "=" not in part:
            raise ManifestError(f"check parameter {part!r} is not name=value", entry.line)
        k, v = (s.strip() for s in part.split("=", 1))
        params[k] = v
    return params


def check_list(m: Manifest) -> list:
    entries = m.section("checks")
    if not entries:
        raise ManifestError("no [checks] listed")
    out = []
    for e in entries:
        if e.key not in CHECKS:
            raise ManifestError(f"unknown check {e.key!r}; known: {', '.join(CHECKS)}", e.line)
        out.append((e.key, parse_params(e)))
    return out


def _number(entry: Entry, kind=float):
    try:
        v = kind(entry.value)
    except ValueError:
        raise ManifestError(f"{entry.key} must be a {kind.__name__}, got {entry.value!r}", entry.line) from None
    return v


def sampling_settings(m: Manifest) -> dict:
    out = {}
    for e in m.section("sampling"):
        if e.key in ("count", "seed"):
            v = _number(e, int)
            if v < (1 if e.key == "count" else 0):
                raise ManifestError(f"{e.key} must be positive", e.line)
            out[e.key] = v
        elif e.key in ("low", "high"):
            out[e.key] = _number(e)
        else:
            raise ManifestError(f"unknown sampling key {e.key!r}", e.line)
    if out.get("low", -1.0) > out.get("high", 1.0):
        raise ManifestError("sampling low exceeds high", m.get("sampling", "low").line)
    return out


TOLERANCE_KEYS = ("tol", "axiom_tol", "eig_tol")


def tolerance_settings(m: Manifest) -> dict:
    out = {}
    for e in m.section("tolerances"):
        if e.key not in TOLERANCE_KEYS:
            raise ManifestError(f"unknown tolerance {e.key!r}", e.line)
        v = _number(e)
        if v <= 0:
            raise ManifestError(f"{e.key} must be positive", e.line)
        out[e.key] = v
    return out


def _chart(m: Manifest) -> ChartSpec | None:
    e = m.get("chart", "coords")
    if e is None:
        return None
    try:
        return ChartSpec(tuple(n.strip() for n in e.value.split(",") if n.strip()))
    except ValueError as exc:
        raise ManifestError(str(exc), e.line) from None


def _matrix_exprs(entry: Entry, chart: ChartSpec, shape) -> list:
    rows = [r for r in entry.value.split(";")]
    cells = [[c.strip() for c in r.split(",")] for r in rows]
    arr = cells[0] if len(shape) == 1 else cells
    got = (len(cells[0]),) if len(shape) == 1 else (len(cells), len(cells[0]))
    if len(shape) == 1 and len(cells) != 1 or got != tuple(shape) or any(len(r) != len(cells[0]) for r in cells):
        raise ManifestError(f"{entry.key} must have shape {tuple(shape)}", entry.line)
    for cell in np.ravel(np.array(arr, dtype=object)):
        try:
            parse_expr(cell, chart)
        except (ExpressionSyntaxError, UnknownIdentifierError) as exc:
            raise ManifestError(f"{entry.key}: {exc}", entry.line) from None
    return arr


def _field(entry: Entry, chart: ChartSpec, shape) -> Field:
    return Field.from_exprs(_matrix_exprs(entry, chart, shape), chart, entry.key)


def build_structure(m: Manifest):
    """(structure, metric or None) from the [structure] section."""
    sec = {e.key: e for e in m.section("structure")}
    if not sec:
        raise ManifestError("missing [structure] section")
    allowed = {"builtin", "kind", "name", "phi", "xi", "eta", "g", "Phi", "Eplus", "Eminus", "G"}
    for e in sec.values():
        if e.key not in allowed:
            raise ManifestError(f"unknown structure key {e.key!r}", e.line)
    if "builtin" in sec:
        e = sec["builtin"]
        if e.value not in structures.BUILTINS:
            raise ManifestError(f"unknown builtin {e.value!r}; known: {', '.join(structures.BUILTINS)}", e.line)
        return structures.builtin(e.value)
    chart = _chart(m)
    if chart is None:
        raise ManifestError("explicit structures need [chart] coords = ...")
    d = chart.dim
    name = sec["name"].value if "name" in sec else "manifest"
    kind = sec["kind"].value if "kind" in sec else ("raw" if "Phi" in sec else "classical" if "phi" in sec
                                                   else "contact")
    try:
        if kind == "classical":
            for k in ("phi", "xi", "eta"):
                if k not in sec:
                    raise ManifestError(f"classical structure needs {k!r}")
            S = structures.from_classical_almost_contact(chart, _field(sec["phi"], chart, (d, d)),
                                                         _field(sec["xi"], chart, (d,)),
                                                         _field(sec["eta"], chart, (d,)), name=name)
        elif kind == "contact":
            if "eta" not in sec:
                raise ManifestError("contact structure needs 'eta'")
            S = structures.from_contact(chart, _field(sec["eta"], chart, (d,)), name=name)
        elif kind == "raw":
            for k in ("Phi", "Eplus", "Eminus"):
                if k not in sec:
                    raise ManifestError(f"raw structure needs {k!r}")
            S = structures.GenContactStructure(chart, _field(sec["Phi"], chart, (2 * d, 2 * d)),
                                               _field(sec["Eplus"], chart, (2 * d,)),
                                               _field(sec["Eminus"], chart, (2 * d,)), name)
        else:
            raise ManifestError(f"unknown structure kind {kind!r}", sec["kind"].line)
    except structures.ClassicalAxiomError as exc:
        raise ManifestError(str(exc)) from None
    G = None
    if "G" in sec:
        G = structures.GenMetric(_field(sec["G"], chart, (2 * d, 2 * d)))
    elif "g" in sec:
        g = _field(sec["g"], chart, (d, d))
        zero = Field.zeros((d, d), d)
        G = structures.GenMetric(Field.combine(lambda a, z: jets.block([[z, jets.inv(a)], [a, z]]), [g, zero],
                                               (2 * d, 2 * d), "G"))
    return S, G


def build_product(m: Manifest, S):
    """(second factor, two-form) from [product], or (None, None)."""
    sec = {e.key: e for e in m.section("product")}
    if not sec:
        return None, None
    e = sec.get("with")
    if e is None or e.value not in structures.BUILTINS:
        raise ManifestError("[product] needs with = <builtin name>", e.line if e else None)
    S2 = structures.builtin(e.value)[0]
    chart = S.chart.product(S2.chart)
    B = None
    if "B" in sec:
        B = _field(sec["B"], chart, (chart.dim, chart.dim))
    return S2, B
