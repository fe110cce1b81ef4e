"""JSON document formats for algebras, complexes, bicharacters and lattice elements.

Rationals travel as ``"p/q"`` strings (integers are also accepted on input).
Every parser has a matching ``*_to_doc`` producing the canonical form, so that
``parse(to_doc(x)) == x``.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .complexes import ChainComplex, ChainMap, EquivariantComplex, InvariantError, validate_complex
from .cyclic import BUILTIN_ALGEBRAS, FDAlgebra
from .exactla import QMatrix, ShapeError
from .nctorus import AngleScalar, Bicharacter, Coefficient, TrigPoly, TwistedElement

KINDS = ("algebra", "complex", "bicharacter", "element")


class ParseError(ValueError):
    """Malformed document; the message starts with the offending location."""


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(value: Any, locus: str) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{locus}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"{locus}: expected a rational like \"p/q\", got {value!r}")


def _int(value: Any, locus: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, str) and value.lstrip("-").isdigit():
            return int(value)
        raise ParseError(f"{locus}: expected an integer, got {value!r}")
    return value


def _field(doc: dict, key: str, locus: str):
    if not isinstance(doc, dict):
        raise ParseError(f"{locus}: expected an object")
    if key not in doc:
        raise ParseError(f"{locus}: missing field {key!r}")
    return doc[key]


def load_document(source: str | Path) -> tuple[Any, str]:
    """Read JSON from a path or an inline document; returns ``(doc, label)``."""
    text = str(source)
    if text.lstrip().startswith("{"):
        label = "<inline>"
    else:
        label = text
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise FileNotFoundError(f"{label}: {exc.strerror}") from None
    try:
        return json.loads(text), label
    except json.JSONDecodeError as exc:
        raise ParseError(f"{label}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


# algebras -------------------------------------------------------------------


def parse_algebra(doc: Any, label: str = "algebra") -> FDAlgebra:
    dim = _int(_field(doc, "dim", label), f"{label}.dim")
    if dim < 0:
        raise ParseError(f"{label}.dim: must be non-negative")
    entries = []
    for n, quad in enumerate(_field(doc, "structure", label)):
        locus = f"{label}.structure[{n}]"
        if not isinstance(quad, list) or len(quad) != 4:
            raise ParseError(f"{locus}: expected [i, j, k, \"p/q\"]")
        i, j, k = (_int(quad[t], f"{locus}[{t}]") for t in range(3))
        for t, idx in enumerate((i, j, k)):
            if not 0 <= idx < dim:
                raise ParseError(f"{locus}[{t}]: index {idx} outside 0..{dim - 1}")
        entries.append((i, j, k, parse_rational(quad[3], f"{locus}[3]")))
    unit = doc.get("unit")
    if unit is not None:
        if not isinstance(unit, list) or len(unit) != dim:
            raise ParseError(f"{label}.unit: expected a list of {dim} rationals")
        unit = [parse_rational(u, f"{label}.unit[{t}]") for t, u in enumerate(unit)]
    return FDAlgebra.from_structure(dim, entries, unit)


def algebra_to_doc(A: FDAlgebra) -> dict:
    doc = {"dim": A.dim, "structure": [[i, j, k, fmt_rational(c)] for i, j, k, c in A.products]}
    if A.unit is not None:
        doc["unit"] = [fmt_rational(u) for u in A.unit]
    return doc


def resolve_algebra(source: str) -> tuple[FDAlgebra, dict]:
    """A built-in name (``C``, ``C2``, ``M2``, ``dual``), a path, or inline JSON."""
    if source in BUILTIN_ALGEBRAS:
        A = BUILTIN_ALGEBRAS[source]()
        return A, algebra_to_doc(A)
    doc, label = load_document(source)
    A = parse_algebra(doc, label)
    return A, algebra_to_doc(A)


# complexes ------------------------------------------------------------------


def _sparse(block: Any, shape: tuple[int, int], locus: str) -> QMatrix:
    if not isinstance(block, list):
        raise ParseError(f"{locus}: expected a list of [row, col, \"p/q\"] triples")
    entries = []
    for n, t in enumerate(block):
        if not isinstance(t, list) or len(t) != 3:
            raise ParseError(f"{locus}[{n}]: expected [row, col, \"p/q\"]")
        r, c = _int(t[0], f"{locus}[{n}][0]"), _int(t[1], f"{locus}[{n}][1]")
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise ParseError(f"{locus}[{n}]: entry ({r}, {c}) outside shape {shape}")
        entries.append((r, c, parse_rational(t[2], f"{locus}[{n}][2]")))
    return QMatrix.from_sparse(shape, entries)


def parse_complex(doc: Any, label: str = "complex", require_alpha: bool = False) -> ChainComplex | EquivariantComplex:
    degrees = _field(doc, "degrees", label)
    if not isinstance(degrees, dict):
        raise ParseError(f"{label}.degrees: expected an object keyed by degree")
    dims = {}
    for key, d in degrees.items():
        n = _int(key, f"{label}.degrees key {key!r}")
        if n < 0:
            raise ParseError(f"{label}.degrees: negative degree {n}")
        dims[n] = _int(d, f"{label}.degrees[{key}]")
    boundary = {}
    for key, block in (doc.get("boundary") or {}).items():
        n = _int(key, f"{label}.boundary key {key!r}")
        boundary[n] = _sparse(block, (dims.get(n - 1, 0), dims.get(n, 0)), f"{label}.boundary[{key}]")
    C = ChainComplex(dims, boundary)
    alpha_doc = doc.get("alpha")
    if alpha_doc is None:
        if require_alpha:
            raise ParseError(f"{label}: missing field 'alpha'")
        verdict = validate_complex(C)
        if not verdict:
            raise InvariantError(verdict.message)
        return C
    alpha = {}
    for key, block in alpha_doc.items():
        n = _int(key, f"{label}.alpha key {key!r}")
        alpha[n] = _sparse(block, (dims.get(n, 0), dims.get(n, 0)), f"{label}.alpha[{key}]")
    E = EquivariantComplex(C, ChainMap(alpha))
    verdict = validate_complex(E)
    if not verdict:
        raise InvariantError(verdict.message)
    return E


def _triples(M: QMatrix) -> list:
    return [[r, c, fmt_rational(v)] for r, c, v in M.nonzero_entries()]


def complex_to_doc(X: ChainComplex | EquivariantComplex) -> dict:
    E = X if isinstance(X, EquivariantComplex) else None
    C = E.complex if E else X
    doc = {
        "degrees": {str(n): C.dim(n) for n in sorted(C.dims)},
        "boundary": {str(n): _triples(C.d(n)) for n in range(1, C.top + 1) if not C.d(n).is_zero()},
    }
    if E is not None:
        doc["alpha"] = {str(n): _triples(E.alpha_at(n)) for n in sorted(C.dims)}
    return doc


# bicharacters and elements ----------------------------------------------------


def parse_angle(doc: Any, locus: str, basis: set[str] | None = None) -> AngleScalar:
    if isinstance(doc, (str, int)):
        return AngleScalar(parse_rational(doc, locus))
    if not isinstance(doc, dict):
        raise ParseError(f"{locus}: expected {{\"rational\": ..., \"coefficients\": {{...}}}}")
    rational = parse_rational(doc.get("rational", "0/1"), f"{locus}.rational")
    coeffs = doc.get("coefficients") or {}
    if not isinstance(coeffs, dict):
        raise ParseError(f"{locus}.coefficients: expected an object")
    for name in coeffs:
        if basis is not None and name not in basis:
            raise ParseError(f"{locus}.coefficients: {name!r} is not a declared basis symbol")
    return AngleScalar(rational, tuple((n, parse_rational(v, f"{locus}.coefficients.{n}")) for n, v in coeffs.items()))


def angle_to_doc(a: AngleScalar) -> dict:
    return {"rational": fmt_rational(a.rational), "coefficients": {n: fmt_rational(c) for n, c in a.coefficients}}


_PAIR_KEYS = {"12": (0, 1), "13": (0, 2), "23": (1, 2)}


def parse_bicharacter(doc: Any, label: str = "bicharacter") -> Bicharacter:
    basis = _field(doc, "basis", label)
    if not isinstance(basis, list) or not all(isinstance(b, str) for b in basis):
        raise ParseError(f"{label}.basis: expected a list of symbol names")
    if len(set(basis)) != len(basis):
        raise ParseError(f"{label}.basis: duplicate symbol names")
    theta = _field(doc, "theta", label)
    if not isinstance(theta, dict):
        raise ParseError(f"{label}.theta: expected an object keyed by \"12\", \"13\", \"23\"")
    upper = {}
    for key, value in theta.items():
        if key not in _PAIR_KEYS:
            raise ParseError(f"{label}.theta: key {key!r} is not one of 12, 13, 23 (entries are strictly upper triangular)")
        upper[_PAIR_KEYS[key]] = parse_angle(value, f"{label}.theta.{key}", set(basis))
    return Bicharacter.from_upper(upper, basis)


def bicharacter_to_doc(eta: Bicharacter) -> dict:
    return {
        "basis": list(eta.basis),
        "theta": {key: angle_to_doc(eta[ij]) for key, ij in _PAIR_KEYS.items()},
    }


def parse_element(doc: Any, label: str = "element") -> TwistedElement | TrigPoly:
    rank = _int(_field(doc, "lattice_dim", label), f"{label}.lattice_dim")
    if rank not in (2, 3):
        raise ParseError(f"{label}.lattice_dim: expected 2 (trigonometric polynomial) or 3 (lattice element)")
    terms = []
    for n, term in enumerate(_field(doc, "terms", label)):
        locus = f"{label}.terms[{n}]"
        point = _field(term, "point", locus)
        if not isinstance(point, list) or len(point) != rank:
            raise ParseError(f"{locus}.point: expected {rank} integers")
        point = tuple(_int(x, f"{locus}.point") for x in point)
        magnitude = parse_rational(_field(term, "magnitude", locus), f"{locus}.magnitude")
        if magnitude == 0:
            continue
        phase = parse_angle(term.get("phase", "0/1"), f"{locus}.phase")
        terms.append((point, Coefficient(magnitude, phase)))
    cls = TwistedElement if rank == 3 else TrigPoly
    try:
        return cls(terms)
    except ValueError as exc:
        raise ParseError(f"{label}.terms: {exc}") from None


def element_to_doc(x: TwistedElement | TrigPoly) -> dict:
    return {
        "lattice_dim": x.rank,
        "terms": [
            {"point": list(p), "magnitude": fmt_rational(c.magnitude), "phase": angle_to_doc(c.phase)}
            for p, c in x.terms.items()
        ],
    }


_PARSERS = {
    "algebra": parse_algebra,
    "complex": parse_complex,
    "bicharacter": parse_bicharacter,
    "element": parse_element,
}


def parse_input(source: str | Path | dict, kind: str):
    """Parse and validate a document of the given kind from a path, inline JSON or a dict."""
    if kind not in _PARSERS:
        raise ValueError(f"unknown document kind {kind!r}; expected one of {', '.join(KINDS)}")
    if isinstance(source, dict):
        doc, label = source, kind
    else:
        doc, label = load_document(source)
    try:
        return _PARSERS[kind](doc, label)
    except ShapeError as exc:
        raise ParseError(f"{label}: {exc}") from None


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(doc: Any) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()
