"""Single-variable *-distributions given by cumulants, and their type lattice.

A class here is a vanishing condition: a set of star patterns outside of
which every cumulant must be zero.  Classification is reported up to a
declared order; conditions quantifying over all orders are decided on the
declared data only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cumulants import (
    CumulantTable,
    core_shape,
    moments_to_classical_cumulants,
    moments_to_free_cumulants,
)
from .errors import IncompleteTableError, InputMismatchError, SchemaError
from .partitions import ONE, STAR, StarPattern

SNAP_TOL = 1e-12

FREE_KINDS = (
    "SYMMETRIC",
    "ORTHOGONAL",
    "SEMICIRCULAR",
    "SHIFTED_ORTHOGONAL",
    "M_UNITARY",
    "FREE_UNITARY",
    "R_DIAGONAL",
    "CIRCULAR",
    "SHIFTED_CIRCULAR",
)

CLASSICAL_KINDS = (
    "SYMMETRIC",
    "ORTHOGONAL",
    "GAUSSIAN",
    "SHIFTED_ORTHOGONAL",
    "M_UNITARY",
    "UNITARY",
    "COMPLEX_GAUSSIAN",
    "SHIFTED_COMPLEX_GAUSSIAN",
)


def _validate_kind(kind: str, m, kinds) -> None:
    if kind not in kinds:
        raise InputMismatchError(f"unknown class kind {kind!r}")
    if kind == "M_UNITARY":
        if m is None or m < 3:
            raise InputMismatchError("M_UNITARY needs a modulus m >= 3")
    elif m is not None:
        raise InputMismatchError(f"{kind} takes no modulus")


@dataclass(frozen=True, order=True)
class FreeClassTag:
    kind: str
    m: int | None = None

    def __post_init__(self) -> None:
        _validate_kind(self.kind, self.m, FREE_KINDS)

    def label(self) -> str:
        return f"M_UNITARY({self.m})" if self.kind == "M_UNITARY" else self.kind


@dataclass(frozen=True, order=True)
class ClassicalClassTag:
    kind: str
    m: int | None = None

    def __post_init__(self) -> None:
        _validate_kind(self.kind, self.m, CLASSICAL_KINDS)

    def label(self) -> str:
        return f"M_UNITARY({self.m})" if self.kind == "M_UNITARY" else self.kind


def _snap(value):
    arr = np.asarray(value, dtype=complex)
    out = arr.copy()
    out.real[np.abs(out.real) <= SNAP_TOL] = 0.0
    out.imag[np.abs(out.imag) <= SNAP_TOL] = 0.0
    if out.ndim == 0:
        return complex(out)
    return out


@dataclass
class CumulantSpecSingle:
    """Sparse cumulant data for one variable, plus an additive constant.

    entries map star patterns to values; absent patterns are exact zeros.
    For a self-adjoint variable the pattern is irrelevant, so entries may be
    given on any representative and are expanded per order; declared entries
    of equal length must then agree and be real.
    """

    order: int
    entries: dict = field(default_factory=dict)
    shift: complex = 0j
    selfadjoint: bool = False
    dim: int = 1

    def __post_init__(self) -> None:
        clean = {}
        for pattern, value in self.entries.items():
            d = StarPattern.coerce(pattern)
            if not 1 <= len(d) <= self.order:
                raise SchemaError(
                    f"entry pattern {d.letters!r} outside order bound {self.order}"
                )
            arr = np.asarray(value, dtype=complex)
            if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
                raise SchemaError("non-finite cumulant entry")
            if self.dim > 1 and arr.shape not in ((self.dim, self.dim),):
                raise SchemaError(
                    f"matrix spec entries must be {self.dim}x{self.dim} blocks"
                )
            snapped = _snap(arr if self.dim > 1 else complex(arr))
            if np.any(np.asarray(snapped) != 0):
                clean[d.letters] = snapped
        self.entries = clean
        self.shift = complex(self.shift)
        if abs(self.shift) <= SNAP_TOL:
            self.shift = 0j
        if not np.isfinite(self.shift.real) or not np.isfinite(self.shift.imag):
            raise SchemaError("non-finite shift")
        if self.dim > 1 and self.shift != 0:
            raise SchemaError("shifts are supported for scalar specs only")
        if self.selfadjoint:
            self._validate_selfadjoint()

    def _validate_selfadjoint(self) -> None:
        if abs(self.shift.imag) > SNAP_TOL:
            raise SchemaError("self-adjoint spec needs a real shift")
        by_len: dict[int, complex] = {}
        for letters, value in self.entries.items():
            if self.dim > 1:
                raise SchemaError("self-adjoint expansion handles scalar specs only")
            if abs(value.imag) > SNAP_TOL:
                raise SchemaError("self-adjoint cumulants must be real")
            k = len(letters)
            if k in by_len and abs(by_len[k] - value) > SNAP_TOL:
                raise SchemaError(
                    "self-adjoint entries of one order must agree across patterns"
                )
            by_len.setdefault(k, value)

    def first_cumulant(self) -> complex:
        base = self.entries.get(ONE, 0j)
        if self.dim > 1:
            raise InputMismatchError("first_cumulant is for scalar specs")
        return complex(base) + self.shift

    def to_table(self, include_shift: bool = True) -> CumulantTable:
        table = CumulantTable(order=self.order, dim=self.dim)
        if self.selfadjoint:
            by_len = {}
            for letters, value in self.entries.items():
                by_len[len(letters)] = value
            for k, value in by_len.items():
                for d in StarPattern.all_patterns(k):
                    table.set(d, value)
        else:
            for letters, value in self.entries.items():
                if self.dim == 1:
                    table.set(letters, value)
                else:
                    table.set(letters, _matrix_entry_core(value, len(letters), self.dim))
        if include_shift and self.shift != 0:
            one = table.data.get(ONE, 0j) + self.shift
            star = table.data.get(STAR, 0j) + self.shift.conjugate()
            if one != 0:
                table.data[ONE] = one
            else:
                table.data.pop(ONE, None)
            if star != 0:
                table.data[STAR] = star
            else:
                table.data.pop(STAR, None)
        return table

    def centered(self) -> "CumulantSpecSingle":
        entries = {
            letters: value
            for letters, value in self.entries.items()
            if len(letters) > 1
        }
        return CumulantSpecSingle(
            order=self.order,
            entries=entries,
            shift=0j,
            selfadjoint=self.selfadjoint,
            dim=self.dim,
        )


def _matrix_entry_core(value: np.ndarray, k: int, p: int) -> np.ndarray:
    """Core tensor for the product convention: value times the coefficients."""
    core = np.zeros(core_shape(p, k), dtype=complex)
    basis = np.zeros((p * p, p, p), dtype=complex)
    idx = np.arange(p * p)
    basis[idx, idx // p, idx % p] = 1.0
    for combo in itertools.product(range(p * p), repeat=k - 1):
        out = np.asarray(value, dtype=complex)
        for i in combo:
            out = out @ basis[i]
        core[combo] = out
    return core


def _nonzero_patterns(table: CumulantTable) -> list[StarPattern]:
    out = []
    for letters, value in table.data.items():
        if float(np.max(np.abs(np.asarray(value)))) > SNAP_TOL:
            out.append(StarPattern(letters))
    return sorted(out, key=lambda d: (len(d), d.letters))


def _base_conditions(patterns: list[StarPattern], m_scan: int) -> dict:
    return {
        "even": all(len(d) % 2 == 0 for d in patterns),
        "pairs": all(len(d) == 2 for d in patterns),
        "balanced": all(d.imbalance == 0 for d in patterns),
        "alternating": all(
            d.imbalance == 0 and d.is_strictly_alternating() for d in patterns
        ),
        "two_alternating": all(d.letters in ("1*", "*1") for d in patterns),
        "moduli": [
            m
            for m in range(3, m_scan + 1)
            if all(d.imbalance % m == 0 for d in patterns)
        ],
    }


def _classify(spec: CumulantSpecSingle, K: int, free: bool, m_scan: int):
    if spec.dim != 1:
        raise InputMismatchError("classification handles scalar specs")
    if K > spec.order:
        raise IncompleteTableError(
            f"spec declares order {spec.order}, classification needs {K}"
        )
    Tag = FreeClassTag if free else ClassicalClassTag
    table = spec.to_table(include_shift=True)
    patterns = [d for d in _nonzero_patterns(table) if len(d) <= K]
    cond = _base_conditions(patterns, m_scan)
    tags = set()
    if cond["even"]:
        tags.add(Tag("SYMMETRIC"))
    if cond["pairs"]:
        tags.add(Tag("ORTHOGONAL"))
        if spec.selfadjoint:
            tags.add(Tag("SEMICIRCULAR" if free else "GAUSSIAN"))
    for m in cond["moduli"]:
        tags.add(Tag("M_UNITARY", m))
    if cond["balanced"]:
        tags.add(Tag("FREE_UNITARY" if free else "UNITARY"))
    if free and cond["alternating"]:
        tags.add(Tag("R_DIAGONAL"))
    if cond["two_alternating"]:
        tags.add(Tag("CIRCULAR" if free else "COMPLEX_GAUSSIAN"))

    noncanonical = []
    if abs(spec.first_cumulant()) > SNAP_TOL:
        ctable = spec.centered().to_table()
        cpatterns = [d for d in _nonzero_patterns(ctable) if len(d) <= K]
        ccond = _base_conditions(cpatterns, m_scan)
        if ccond["pairs"]:
            tags.add(Tag("SHIFTED_ORTHOGONAL"))
        if ccond["two_alternating"]:
            tags.add(Tag("SHIFTED_CIRCULAR" if free else "SHIFTED_COMPLEX_GAUSSIAN"))
        # the remaining centered classes have no shifted counterpart
        if free and ccond["alternating"] and not ccond["two_alternating"]:
            noncanonical.append("SHIFTED_R_DIAGONAL")
        if ccond["balanced"] and not ccond["alternating"]:
            noncanonical.append("SHIFTED_FREE_UNITARY" if free else "SHIFTED_UNITARY")
        if ccond["even"] and not ccond["pairs"]:
            noncanonical.append("SHIFTED_SYMMETRIC")
    return tags, noncanonical


def classify_free(spec: CumulantSpecSingle, K: int, m_scan: int | None = None):
    tags, _ = _classify(spec, K, True, m_scan or max(3, K))
    return tags


def classify_classical(spec: CumulantSpecSingle, K: int, m_scan: int | None = None):
    tags, _ = _classify(spec, K, False, m_scan or max(3, K))
    return tags


def classify_free_report(spec: CumulantSpecSingle, K: int, m_scan: int | None = None) -> dict:
    bound = m_scan or max(3, K)
    tags, noncanonical = _classify(spec, K, True, bound)
    return {
        "tags": sorted(t.label() for t in tags),
        "minimal": sorted(t.label() for t in minimal_tags(tags)),
        "noncanonical_shifted": noncanonical,
        "m_scan": bound,
    }


def classify_classical_report(spec: CumulantSpecSingle, K: int, m_scan: int | None = None) -> dict:
    bound = m_scan or max(3, K)
    tags, noncanonical = _classify(spec, K, False, bound)
    return {
        "tags": sorted(t.label() for t in tags),
        "minimal": sorted(t.label() for t in minimal_tags(tags)),
        "noncanonical_shifted": noncanonical,
        "m_scan": bound,
    }


def implies(a, b) -> bool:
    """Whether membership in class a forces membership in class b.

    The relation is the inclusion of the admissible pattern sets, written
    out by hand: bounded pattern enumeration cannot certify divisibility
    facts like M(12) vs M(5).
    """
    if type(a) is not type(b):
        raise InputMismatchError("cannot compare free and classical tags")
    if a == b:
        return True
    free = isinstance(a, FreeClassTag)
    unitary = "FREE_UNITARY" if free else "UNITARY"
    pair_alt = "CIRCULAR" if free else "COMPLEX_GAUSSIAN"
    quadratic = "SEMICIRCULAR" if free else "GAUSSIAN"
    shifted_pair_alt = "SHIFTED_CIRCULAR" if free else "SHIFTED_COMPLEX_GAUSSIAN"
    ka, kb = a.kind, b.kind
    if ka == pair_alt and kb in (
        "ORTHOGONAL",
        "SYMMETRIC",
        "R_DIAGONAL",
        unitary,
        "M_UNITARY",
    ):
        return True
    if ka == "R_DIAGONAL" and kb in (unitary, "M_UNITARY", "SYMMETRIC"):
        return True
    if ka == unitary and kb in ("M_UNITARY", "SYMMETRIC"):
        return True
    if ka == "M_UNITARY":
        if kb == "M_UNITARY":
            return a.m % b.m == 0
        if kb == "SYMMETRIC":
            return a.m % 2 == 0
    if ka == quadratic and kb in ("ORTHOGONAL", "SYMMETRIC"):
        return True
    if ka == "ORTHOGONAL" and kb == "SYMMETRIC":
        return True
    if ka == shifted_pair_alt and kb == "SHIFTED_ORTHOGONAL":
        return True
    return False


def class_implications(m_scan: int = 6, free: bool = True) -> set:
    """All (a, b) pairs with a => b over the tag universe scanned to m_scan."""
    Tag = FreeClassTag if free else ClassicalClassTag
    kinds = FREE_KINDS if free else CLASSICAL_KINDS
    universe = []
    for kind in kinds:
        if kind == "M_UNITARY":
            universe.extend(Tag(kind, m) for m in range(3, m_scan + 1))
        else:
            universe.append(Tag(kind))
    return {
        (a, b)
        for a in universe
        for b in universe
        if a != b and implies(a, b)
    }


def upward_closure(tags) -> set:
    tags = set(tags)
    out = set(tags)
    for a in tags:
        for b in _closure_targets(a):
            out.add(b)
    return out


def _closure_targets(a):
    Tag = type(a)
    out = set()
    kinds = FREE_KINDS if isinstance(a, FreeClassTag) else CLASSICAL_KINDS
    for kind in kinds:
        if kind == "M_UNITARY":
            ms = range(3, (a.m or 12) + 1) if a.kind == "M_UNITARY" else range(3, 13)
            for m in ms:
                b = Tag(kind, m)
                if implies(a, b):
                    out.add(b)
        else:
            b = Tag(kind)
            if implies(a, b):
                out.add(b)
    return out


def minimal_tags(tags) -> set:
    tags = set(tags)
    return {
        t
        for t in tags
        if not any(s != t and implies(s, t) for s in tags)
    }


def sample_spec(tag: FreeClassTag, seed: int = 0) -> CumulantSpecSingle:
    """A witness spec whose classification is minimal exactly at the tag.

    Seed 0 gives exact unit weights; other seeds jitter the magnitudes
    without disturbing which patterns are populated.
    """
    rng = np.random.default_rng(seed)

    def w() -> float:
        return 1.0 if seed == 0 else float(1.0 + 0.5 * rng.uniform())

    kind = tag.kind
    if kind == "SYMMETRIC":
        return CumulantSpecSingle(
            order=6,
            entries={"11": w(), "**": w(), "1111": w(), "****": w()},
        )
    if kind == "ORTHOGONAL":
        v = w()
        return CumulantSpecSingle(
            order=6, entries={"11": v, "1*": v, "*1": v, "**": v}
        )
    if kind == "SEMICIRCULAR":
        return CumulantSpecSingle(order=6, entries={"11": w()}, selfadjoint=True)
    if kind == "SHIFTED_ORTHOGONAL":
        return CumulantSpecSingle(
            order=6, entries={"11": w()}, selfadjoint=True, shift=w()
        )
    if kind == "M_UNITARY":
        m = tag.m
        return CumulantSpecSingle(
            order=max(6, m),
            entries={"1*": w(), "*1": w(), ONE * m: w(), STAR * m: w()},
        )
    if kind == "FREE_UNITARY":
        return CumulantSpecSingle(
            order=6, entries={"1*": w(), "*1": w(), "11**": w()}
        )
    if kind == "R_DIAGONAL":
        return CumulantSpecSingle(
            order=6,
            entries={"1*": w(), "*1": w(), "1*1*": -w(), "*1*1": -w()},
        )
    if kind == "CIRCULAR":
        return CumulantSpecSingle(order=6, entries={"1*": w(), "*1": w()})
    if kind == "SHIFTED_CIRCULAR":
        return CumulantSpecSingle(
            order=6, entries={"1*": w(), "*1": w()}, shift=w()
        )
    raise InputMismatchError(f"no sample recipe for {tag!r}")


ALL_FREE_TAGS = (
    FreeClassTag("SYMMETRIC"),
    FreeClassTag("ORTHOGONAL"),
    FreeClassTag("SEMICIRCULAR"),
    FreeClassTag("SHIFTED_ORTHOGONAL"),
    FreeClassTag("M_UNITARY", 3),
    FreeClassTag("FREE_UNITARY"),
    FreeClassTag("R_DIAGONAL"),
    FreeClassTag("CIRCULAR"),
    FreeClassTag("SHIFTED_CIRCULAR"),
)


def spec_from_cumulant_table(table: CumulantTable, selfadjoint: bool = False) -> CumulantSpecSingle:
    """Wrap a computed cumulant table as a sparse spec (zeros dropped)."""
    entries = {
        letters: value
        for letters, value in table.data.items()
        if float(np.max(np.abs(np.asarray(value)))) > SNAP_TOL
    }
    return CumulantSpecSingle(
        order=table.order, entries=entries, selfadjoint=selfadjoint, dim=table.dim
    )


def classify_free_moments(moments, K: int):
    """Classify from a moment table by inverting to free cumulants first."""
    table = moments_to_free_cumulants(moments, K)
    return classify_free(spec_from_cumulant_table(table), K)


def classify_classical_moments(moments, K: int):
    table = moments_to_classical_cumulants(moments, K)
    return classify_classical(spec_from_cumulant_table(table), K)
