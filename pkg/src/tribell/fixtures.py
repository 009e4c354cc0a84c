"""Optimal states and measurements for the 46 inequalities, with targets.

The package ships a checksum-guarded text table holding, per inequality,
the optimal quantum value, a symbolic recipe for the optimal state and the
six optimal observables, the expected monotone profile, and the expected
class assignments. This module parses those recipes into concrete
:class:`~tribell.qcore.PureState` / :class:`~tribell.qcore.Observable`
objects so the reproduction suite can re-derive every published quantity.
"""

from __future__ import annotations

import cmath
import hashlib
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .qcore import MINUS_IDENTITY, PLUS_IDENTITY, Observable, PureState
from .seesaw import Solution

__all__ = [
    "ExpectedProfile",
    "FixtureIntegrityError",
    "FixtureRecord",
    "MissingStateError",
    "build_fixture_measurements",
    "build_fixture_state",
    "expected_values",
    "fixture_record",
    "fixture_solution",
    "load_reference_table",
]

_TABLE_RESOURCE = "data/reference_tables.txt"
_TABLE_SHA256 = "fe8ac6d41faace7c722026d770ca7afe6ba8eefc097d1d355c113cbf881158fc"

# Closed-form constants appearing in the optimal measurement angles.
F_ANGLE = (5.0 - math.sqrt(17.0)) / 4.0
S_ANGLE = -math.asin(math.sqrt(2.0 + math.sqrt(78.0 * math.sqrt(17.0) - 318.0)) / 2.0)
G_ANGLE = 160.0 - 39.0 * math.sqrt(17.0)

_SQRT2 = math.sqrt(2.0)
_D_GAP = math.sqrt((5.0 * math.sqrt(17.0) - 13.0) / 2.0)
_D_PLUS = 0.5 * math.sqrt(2.0 + _D_GAP)
_D_MINUS = 0.5 * math.sqrt(2.0 - _D_GAP)

# Single-qubit kets usable inside state recipes. The u+/u- amplitudes admit
# two published sign readings; the one below reproduces the maximum of
# inequality 8 (20/3) to machine precision, the other misses by >1. The
# h+/h- kets follow the published definition literally; see the reference
# table for the measurement-order caveat on inequality 23.
_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "t+": np.array([1.0, 1.0j], dtype=complex) / _SQRT2,
    "t-": np.array([1.0, -1.0j], dtype=complex) / _SQRT2,
    "b+": np.array([-1.0, 1.0], dtype=complex) / _SQRT2,
    "b-": np.array([-1.0, -1.0], dtype=complex) / _SQRT2,
    "u+": np.array([1.0 / _SQRT2, (-_SQRT2 - 4.0j) / 6.0], dtype=complex),
    "u-": np.array([(_SQRT2 - 4.0j) / 6.0, 1.0 / _SQRT2], dtype=complex),
    "h+": np.array([_D_MINUS, _D_PLUS], dtype=complex),
    "h-": np.array([-_D_PLUS, _D_MINUS], dtype=complex),
}

_PARTY_SLOT = {"A": 0, "B": 1, "C": 2}
_PAIR_SLOTS = {"AB": (0, 1), "AC": (0, 2), "BC": (1, 2)}

_EXPR_NAMES = {"sqrt": cmath.sqrt, "pi": math.pi, "I": 1.0j,
               "f": F_ANGLE, "s": S_ANGLE, "g": G_ANGLE}
_EXPR_CHARS = re.compile(r"^[0-9A-Za-z+\-*/(). ]+$")
_IDENTIFIER = re.compile(r"[A-Za-z]+")

_ROTATION_PREFIX = re.compile(r"^R\(([^)]*)\)\s+")
_KET_TERM = re.compile(r"^\|([^>]+)>(?:_([A-Z]{2}))?$")
_BLOCH_TEXT = re.compile(r"^bloch\(([^,]+),(.+)\)$")

# Printed Bloch pairs carry five decimals (one pair only four), so their
# norm can be off by a few parts in 1e5; anything larger points at a
# transcription error. The worst shipped pair deviates by 5.1e-5.
_BLOCH_NORM_TOL = 1e-4
_STATE_NORM_TOL = 1e-3
_REAL_TOL = 1e-12


class FixtureIntegrityError(RuntimeError):
    """The shipped reference table is damaged or malformed."""


class MissingStateError(ValueError):
    """Raised for rows whose maximum needs no quantum state."""


@dataclass(frozen=True)
class ExpectedProfile:
    """One published row of monotone values and class assignments."""

    negativity: float
    c_ab: float
    c_ac: float
    c_bc: float
    i_a: float
    i_b: float
    i_c: float
    entanglement_class: int
    incompatibility_class: int

    @property
    def concurrences(self) -> tuple[float, float, float]:
        return (self.c_ab, self.c_ac, self.c_bc)

    @property
    def incompatibilities(self) -> tuple[float, float, float]:
        return (self.i_a, self.i_b, self.i_c)


@dataclass(frozen=True)
class FixtureRecord:
    id: int
    kind: str
    maximum: float
    maximum_text: str
    state_text: str | None
    measurement_texts: tuple[str, ...]
    profile: ExpectedProfile
    class_pair: tuple[int, int]
    entanglement_tol: float | None = None
    incompatibility_tol: float | None = None

    @property
    def is_exact(self) -> bool:
        return self.kind == "closed"


def _evaluate(text: str) -> complex:
    text = text.strip()
    if not text or not _EXPR_CHARS.match(text):
        raise FixtureIntegrityError(f"bad expression: {text!r}")
    for name in _IDENTIFIER.findall(text):
        if name not in _EXPR_NAMES:
            raise FixtureIntegrityError(f"unknown name {name!r} in {text!r}")
    return complex(eval(text, {"__builtins__": {}}, dict(_EXPR_NAMES)))


def _evaluate_real(text: str) -> float:
    value = _evaluate(text)
    if abs(value.imag) > _REAL_TOL * (1.0 + abs(value.real)):
        raise FixtureIntegrityError(f"expression {text!r} is not real")
    return value.real


def _split_terms(text: str) -> list[str]:
    """Split a recipe into signed terms at top-level +/- boundaries."""
    terms: list[str] = []
    current: list[str] = []
    depth = 0
    in_ket = False
    for ch in text:
        if not in_ket and ch == "(":
            depth += 1
        elif not in_ket and ch == ")":
            depth -= 1
        elif ch == "|" and depth == 0:
            in_ket = True
        elif ch == ">" and in_ket:
            in_ket = False
        if ch in "+-" and depth == 0 and not in_ket and "".join(current).strip():
            terms.append("".join(current).strip())
            current = [ch]
        else:
            current.append(ch)
    tail = "".join(current).strip()
    if tail:
        terms.append(tail)
    if depth != 0 or in_ket:
        raise FixtureIntegrityError(f"unbalanced state recipe: {text!r}")
    return terms


def _term_amplitudes(term: str) -> np.ndarray:
    sign = 1.0
    if term[0] in "+-":
        sign = -1.0 if term[0] == "-" else 1.0
        term = term[1:].strip()
    bar = term.index("|")
    coefficient = sign * _evaluate(term[:bar].strip().rstrip("*").strip() or "1")
    ket = _KET_TERM.match(term[bar:])
    if ket is None:
        raise FixtureIntegrityError(f"bad ket term: {term!r}")
    labels = ket.group(1).split()
    suffix = ket.group(2)
    if len(labels) == 3 and suffix is None:
        slots = (0, 1, 2)
    elif len(labels) == 2 and suffix in _PAIR_SLOTS:
        slots = _PAIR_SLOTS[suffix]
    else:
        raise FixtureIntegrityError(f"bad ket term: {term!r}")
    factors = [_KETS["0"], _KETS["0"], _KETS["0"]]
    for slot, label in zip(slots, labels):
        try:
            factors[slot] = _KETS[label]
        except KeyError:
            raise FixtureIntegrityError(f"unknown ket label {label!r}") from None
    amplitudes = np.einsum("a,b,c->abc", factors[0], factors[1], factors[2])
    return coefficient * amplitudes


def _apply_rotation(amplitudes: np.ndarray, party: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, -s], [s, c]], dtype=complex)
    rotated = np.tensordot(rotation, amplitudes, axes=([1], [party]))
    return np.moveaxis(rotated, 0, party)


def _parse_state(text: str) -> PureState:
    rotations: list[tuple[int, float]] = []
    match = _ROTATION_PREFIX.match(text)
    if match is not None:
        for piece in match.group(1).split(","):
            party, _, angle = piece.partition(":")
            if party.strip() not in _PARTY_SLOT or not angle:
                raise FixtureIntegrityError(f"bad rotation text: {piece!r}")
            rotations.append((_PARTY_SLOT[party.strip()], _evaluate_real(angle)))
        text = text[match.end():]
    amplitudes = np.zeros((2, 2, 2), dtype=complex)
    for term in _split_terms(text):
        amplitudes += _term_amplitudes(term)
    for party, angle in rotations:
        amplitudes = _apply_rotation(amplitudes, party, angle)
    norm = float(np.linalg.norm(amplitudes))
    if abs(norm - 1.0) > _STATE_NORM_TOL:
        raise FixtureIntegrityError(f"state recipe norm {norm} too far from 1")
    return PureState.from_vector(amplitudes.reshape(-1), normalize=True)


def _parse_measurement(text: str) -> Observable:
    if text == "id+":
        return PLUS_IDENTITY
    if text == "id-":
        return MINUS_IDENTITY
    if text == "x":
        return Observable.from_bloch(1.0, 0.0, 0.0)
    if text == "z":
        return Observable.from_bloch(0.0, 0.0, 1.0)
    match = _BLOCH_TEXT.match(text)
    if match is None:
        raise FixtureIntegrityError(f"bad measurement text: {text!r}")
    x = _evaluate_real(match.group(1))
    z = _evaluate_real(match.group(2))
    norm = math.hypot(x, z)
    if abs(norm - 1.0) > _BLOCH_NORM_TOL:
        raise FixtureIntegrityError(f"Bloch pair {text!r} has norm {norm}")
    return Observable.from_bloch(x / norm, 0.0, z / norm)


_OPT_FIELDS = {"ent_tol": "entanglement_tol", "inc_tol": "incompatibility_tol"}


def _parse_row(line: str) -> FixtureRecord:
    fields = line.split(";")
    if len(fields) != 14:
        raise FixtureIntegrityError(f"row needs 14 fields, got {len(fields)}")
    ident = int(fields[0])
    kind = fields[1]
    if kind not in ("closed", "decimal"):
        raise FixtureIntegrityError(f"row {ident}: bad kind {kind!r}")
    maximum_text = fields[2]
    maximum = _evaluate_real(maximum_text)
    state_text = None if fields[3] == "none" else fields[3]
    numbers = [float(piece) for piece in fields[10].split(",")]
    classes = [int(piece) for piece in fields[11].split(",")]
    if len(numbers) != 7 or len(classes) != 2:
        raise FixtureIntegrityError(f"row {ident}: bad profile")
    pair = tuple(int(piece) for piece in fields[12].split(","))
    if len(pair) != 2:
        raise FixtureIntegrityError(f"row {ident}: bad class pair")
    options: dict[str, float] = {}
    if fields[13]:
        for piece in fields[13].split(","):
            key, _, value = piece.partition("=")
            if key not in _OPT_FIELDS:
                raise FixtureIntegrityError(f"row {ident}: unknown option {key!r}")
            options[_OPT_FIELDS[key]] = float(value)
    return FixtureRecord(
        id=ident,
        kind=kind,
        maximum=maximum,
        maximum_text=maximum_text,
        state_text=state_text,
        measurement_texts=tuple(fields[4:10]),
        profile=ExpectedProfile(*numbers, classes[0], classes[1]),
        class_pair=pair,
        **options,
    )


@lru_cache(maxsize=1)
def load_reference_table() -> tuple[FixtureRecord, ...]:
    """All 46 reference rows, ordered by id, checksum-verified."""
    text = resources.files(__package__).joinpath(_TABLE_RESOURCE).read_text(encoding="utf-8")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if digest != _TABLE_SHA256:
        raise FixtureIntegrityError(
            f"reference table checksum mismatch: expected {_TABLE_SHA256}, got {digest}"
        )
    records = [
        _parse_row(line.strip())
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if [record.id for record in records] != list(range(1, 47)):
        raise FixtureIntegrityError("reference table must hold ids 1..46 in order")
    return tuple(records)


def fixture_record(ident: int) -> FixtureRecord:
    if not 1 <= ident <= 46:
        raise KeyError(f"inequality id must be 1..46, got {ident}")
    return load_reference_table()[ident - 1]


def build_fixture_state(ident: int) -> PureState:
    """Optimal state for one inequality, padded with |0> where bipartite."""
    record = fixture_record(ident)
    if record.state_text is None:
        raise MissingStateError(f"inequality {ident} needs no quantum state")
    return _parse_state(record.state_text)


def build_fixture_measurements(ident: int) -> tuple[Observable, ...]:
    """The six optimal observables (A, a, B, b, C, c) for one inequality."""
    record = fixture_record(ident)
    return tuple(_parse_measurement(text) for text in record.measurement_texts)


def expected_values(ident: int) -> tuple[float, ExpectedProfile, tuple[int, int]]:
    """Published maximum, monotone profile, and class pair for one inequality."""
    record = fixture_record(ident)
    return record.maximum, record.profile, record.class_pair


def fixture_solution(ident: int) -> Solution:
    """Package the fixture as a ready-to-evaluate solution.

    Rows without a state get |000>: with both of their observables at
    +identity per party the value does not depend on the state.
    """
    from .bell_expr import catalog_entry
    from .qcore import bell_operator, expectation

    try:
        state = build_fixture_state(ident)
    except MissingStateError:
        vector = np.zeros(8, dtype=complex)
        vector[0] = 1.0
        state = PureState(vector)
    measurements = build_fixture_measurements(ident)
    operator = bell_operator(catalog_entry(ident).expression, measurements)
    return Solution(
        state=state,
        measurements=measurements,
        value=expectation(state, operator),
        sweeps_used=0,
        restart_index=0,
    )
