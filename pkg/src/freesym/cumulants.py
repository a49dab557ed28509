"""Moment and cumulant tables plus the partitioned functional calculus.

A table stores, per star pattern of each order, the value of a multilinear
functional applied to the variable's pattern of plain/adjoined copies.  For
scalar coefficients (dim 1) a value is a complex number.  For matrix
coefficients (dim p > 1) a value of order k is a *core tensor* of shape
(p*p,)*(k-1) + (p, p): contracting axis t with vec(c) recovers the functional
with coefficient c in slot t, where vec(c)[a*p+b] = c[a, b].  Outer
coefficients are never stored; callers multiply them in.

The free evaluation of a partitioned functional removes interval blocks one
at a time, folding each value into the neighboring argument.  That peel order
exists exactly for noncrossing partitions, which is why the classical
(all-partition) calculus here is kept to commuting scalars.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    BudgetError,
    CrossingPartitionError,
    IncompleteTableError,
    InputMismatchError,
    OrderBoundError,
    SizeLimitError,
    UnsupportedAlgebraError,
)
from .partitions import (
    ONE,
    Partition,
    StarPattern,
    all_partitions_cached,
    kernel,
    noncrossing_cached,
    refines,
)

MAX_DIM = 3
MAX_SCALAR_ORDER = 8
MAX_MATRIX_ORDER = 6
MAX_MULTI_ORDER = 6
MAX_ALPHABET = 3
TUPLE_BUDGET = 10**6


def identity_element(dim: int):
    if dim == 1:
        return 1.0 + 0.0j
    return np.eye(dim, dtype=complex)


def zero_element(dim: int):
    if dim == 1:
        return 0.0 + 0.0j
    return np.zeros((dim, dim), dtype=complex)


def pattern_sort_key(letters: str) -> tuple:
    """Deterministic pattern order: by length, then plain before adjoined."""
    return (len(letters), tuple(0 if ch == ONE else 1 for ch in letters))


def core_shape(dim: int, k: int) -> tuple[int, ...]:
    return (dim * dim,) * (k - 1) + (dim, dim)


def _require_finite(value) -> None:
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InputMismatchError("non-finite table value")


@dataclass
class _PatternTable:
    """Values of one multilinear functional family, keyed by star pattern."""

    order: int
    dim: int = 1
    data: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.order < 0:
            raise InputMismatchError("order must be nonnegative")
        if not 1 <= self.dim <= MAX_DIM:
            raise SizeLimitError(f"coefficient dimension must be 1..{MAX_DIM}")
        for pattern, value in list(self.data.items()):
            del self.data[pattern]
            self.set(pattern, value)

    def set(self, pattern, value) -> None:
        d = StarPattern.coerce(pattern)
        if not 1 <= len(d) <= self.order:
            raise OrderBoundError(
                f"pattern {d.letters!r} outside declared order {self.order}"
            )
        _require_finite(value)
        if self.dim == 1:
            self.data[d.letters] = complex(value)
        else:
            arr = np.asarray(value, dtype=complex)
            want = core_shape(self.dim, len(d))
            if arr.shape != want:
                raise InputMismatchError(
                    f"core for {d.letters!r} must have shape {want}, got {arr.shape}"
                )
            self.data[d.letters] = arr

    def get(self, pattern):
        """Stored value, or None when the entry is absent (an exact zero)."""
        return self.data.get(StarPattern.coerce(pattern).letters)

    def require_order(self, k: int) -> None:
        if k > self.order:
            raise IncompleteTableError(
                f"table declares order {self.order}, need {k}"
            )

    def patterns(self) -> list[str]:
        return sorted(self.data, key=pattern_sort_key)

    def max_abs_difference(self, other: "_PatternTable") -> float:
        keys = set(self.data) | set(other.data)
        worst = 0.0
        for key in keys:
            k = len(key)
            a = self.data.get(key)
            b = other.data.get(key)
            if a is None:
                a = 0j if self.dim == 1 else np.zeros(core_shape(self.dim, k))
            if b is None:
                b = 0j if other.dim == 1 else np.zeros(core_shape(other.dim, k))
            worst = max(worst, float(np.max(np.abs(np.asarray(a) - np.asarray(b)))))
        return worst


@dataclass
class CumulantTable(_PatternTable):
    pass


@dataclass
class MomentTable(_PatternTable):
    pass


@dataclass
class MultiCumulantTable:
    """Cumulants of an n-variable family, keyed by (index word, pattern).

    Values carry the identity interleaved-coefficient tuple; the full
    bimodule functional is infinite-dimensional and out of scope.
    """

    order: int
    n: int
    dim: int = 1
    data: dict = field(default_factory=dict)

    def set(self, word, pattern, value) -> None:
        w = tuple(int(i) for i in word)
        d = StarPattern.coerce(pattern)
        if len(w) != len(d):
            raise InputMismatchError("index word and pattern lengths differ")
        _require_finite(value)
        self.data[(w, d.letters)] = (
            complex(value) if self.dim == 1 else np.asarray(value, dtype=complex)
        )

    def get(self, word, pattern):
        key = (tuple(int(i) for i in word), StarPattern.coerce(pattern).letters)
        return self.data.get(key)

    def largest_mixed(self) -> tuple[tuple, str, float]:
        """The mixed-index entry of largest magnitude (the freeness witness)."""
        worst = ((), "", 0.0)
        for (word, pattern), value in self.data.items():
            if len(set(word)) <= 1:
                continue
            mag = float(np.max(np.abs(np.asarray(value))))
            if mag > worst[2]:
                worst = (word, pattern, mag)
        return worst


# ---------------------------------------------------------------------------
# nested evaluation of partitioned functionals


@lru_cache(maxsize=None)
def _peel_plan(blocks: tuple, k: int, rightmost: bool) -> tuple:
    """Order in which interval blocks get removed, with attachment targets.

    Each step is (block, attach, pos): after evaluating the block, its value
    multiplies rights[pos] from the right ("right"), lefts[pos] from the left
    ("left"), or is the final result ("final").  A stuck scan means some pair
    of blocks crosses.
    """
    remaining = list(range(1, k + 1))
    todo = set(blocks)
    steps = []
    while todo:
        spots = []
        for b in todo:
            i = remaining.index(b[0])
            if tuple(remaining[i:i + len(b)]) == b:
                spots.append((i, b))
        if not spots:
            raise CrossingPartitionError(
                f"no interval block left in {sorted(todo)}; partition crosses"
            )
        i, b = max(spots) if rightmost else min(spots)
        if i > 0:
            steps.append((b, "right", remaining[i - 1]))
        elif i + len(b) < len(remaining):
            steps.append((b, "left", remaining[i + len(b)]))
        else:
            steps.append((b, "final", 0))
        del remaining[i:i + len(b)]
        todo.remove(b)
    return tuple(steps)


def _run_plan(plan, block_value, lefts, rights, mul):
    lefts = dict(lefts)
    rights = dict(rights)
    result = None
    for block, attach, pos in plan:
        inners = [mul(rights[a], lefts[b]) for a, b in zip(block, block[1:])]
        val = block_value(block, inners)
        if val is None:
            return None
        val = mul(mul(lefts[block[0]], val), rights[block[-1]])
        if attach == "right":
            rights[pos] = mul(rights[pos], val)
        elif attach == "left":
            lefts[pos] = mul(val, lefts[pos])
        else:
            result = val
    return result


@lru_cache(maxsize=None)
def _block_patterns(blocks: tuple, letters: str) -> tuple[str, ...]:
    return tuple(
        "".join(letters[x - 1] for x in b) for b in blocks
    )


@lru_cache(maxsize=None)
def _slot_basis(dim: int, k: int, slot: int):
    """All dim*dim basis matrices, broadcast-shaped for coefficient slot."""
    p = dim
    basis = np.zeros((p * p, p, p), dtype=complex)
    idx = np.arange(p * p)
    basis[idx, idx // p, idx % p] = 1.0
    shape = (1,) * slot + (p * p,) + (1,) * (k - 2 - slot) + (p, p)
    return basis.reshape(shape)


def _apply_core(core: np.ndarray, inners: list, dim: int) -> np.ndarray:
    """Contract a core tensor with vec'd coefficient arrays (broadcasting)."""
    s = len(inners) + 1
    if s == 1:
        return core
    letters = "abcdefg"[: s - 1]
    operands = []
    subs = []
    for t, inner in enumerate(inners):
        v = inner.reshape(inner.shape[:-2] + (dim * dim,))
        operands.append(v)
        subs.append("..." + letters[t])
    expr = letters + "xy," + ",".join(subs) + "->...xy"
    return np.einsum(expr, core, *operands)


def _scalar_partition_value(table: _PatternTable, blocks: tuple, letters: str):
    out = 1.0 + 0.0j
    for sub in _block_patterns(blocks, letters):
        v = table.data.get(sub)
        if v is None:
            return None
        out *= v
    return out


def _core_partition_tensor(table: _PatternTable, part: Partition, letters: str):
    """Core tensor of the partitioned functional, or None when it vanishes."""
    k = part.k
    p = table.dim
    if p == 1:
        return _scalar_partition_value(table, part.blocks, letters)
    subs = _block_patterns(part.blocks, letters)
    cores = {}
    for b, sub in zip(part.blocks, subs):
        core = table.data.get(sub)
        if core is None:
            return None
        cores[b] = core

    def block_value(block, inners):
        return _apply_core(cores[block], inners, p)

    ident = np.eye(p, dtype=complex)
    lefts = {pos: ident for pos in range(1, k + 1)}
    rights = {pos: _slot_basis(p, k, pos - 1) for pos in range(1, k)}
    rights[k] = ident
    val = _run_plan(_peel_plan(part.blocks, k, False), block_value, lefts, rights, np.matmul)
    return np.broadcast_to(val, core_shape(p, k)).copy()


def _coerce_coeff(c, dim: int):
    arr = np.asarray(c, dtype=complex)
    if arr.ndim == 0:
        return complex(arr) if dim == 1 else complex(arr) * np.eye(dim, dtype=complex)
    if arr.ndim == 2 and arr.shape == (dim, dim):
        return arr
    raise InputMismatchError(
        f"coefficient must be a scalar or a {dim}x{dim} matrix, got shape {arr.shape}"
    )


def _ordered_coeff_product(coeffs) -> np.ndarray:
    """Ordered product of mixed scalar/matrix coefficients (one must be a matrix)."""
    q = None
    for c in coeffs:
        arr = np.asarray(c)
        if arr.ndim == 2:
            q = arr.shape[0]
            break
    if q is None:
        raise InputMismatchError("expected at least one matrix coefficient")
    out = np.eye(q, dtype=complex)
    for c in coeffs:
        out = out @ _coerce_coeff(c, q)
    return out


def eval_partitioned_free(table, part: Partition, pattern, coeffs=None, rightmost=False):
    """Nested evaluation of the partitioned functional on concrete arguments.

    Argument j is the variable's pattern[j] power followed by coefficient
    coeffs[j]; a missing coeffs list means identity coefficients throughout.
    Raises CrossingPartitionError when the partition admits no peel order.
    """
    d = StarPattern.coerce(pattern)
    k = part.k
    if len(d) != k:
        raise InputMismatchError("pattern length must match the partition size")
    if coeffs is None:
        coeffs = [identity_element(table.dim)] * k
    if len(coeffs) != k:
        raise InputMismatchError(f"need {k} coefficients, got {len(coeffs)}")
    table.require_order(max((len(b) for b in part.blocks), default=0))
    if k == 0:
        return identity_element(table.dim)
    p = table.dim
    subs = _block_patterns(part.blocks, d.letters)
    if p == 1 and all(np.asarray(c).ndim == 0 for c in coeffs):
        def block_value(block, inners):
            v = table.data.get(subs[block_index[block]])
            if v is None:
                return None
            for inner in inners:
                v = v * inner
            return v
        block_index = {b: i for i, b in enumerate(part.blocks)}
        lefts = {pos: 1.0 + 0.0j for pos in range(1, k + 1)}
        rights = {pos: complex(coeffs[pos - 1]) for pos in range(1, k + 1)}
        val = _run_plan(_peel_plan(part.blocks, k, rightmost), block_value, lefts, rights,
                        lambda a, b: a * b)
        return 0.0 + 0.0j if val is None else val
    if p == 1:
        raise InputMismatchError("matrix coefficients need a matrix-valued table")
    cs = [_coerce_coeff(c, p) for c in coeffs]
    block_index = {b: i for i, b in enumerate(part.blocks)}

    def block_value(block, inners):
        core = table.data.get(subs[block_index[block]])
        if core is None:
            return None
        return _apply_core(core, inners, p)

    ident = np.eye(p, dtype=complex)
    lefts = {pos: ident for pos in range(1, k + 1)}
    rights = {pos: cs[pos - 1] for pos in range(1, k + 1)}
    val = _run_plan(_peel_plan(part.blocks, k, rightmost), block_value, lefts, rights, np.matmul)
    return np.zeros((p, p), dtype=complex) if val is None else val


def eval_partitioned_classical(table, part: Partition, pattern, coeffs=None):
    """Product of per-block functional values, blocks in canonical order.

    Valid for any partition, crossing or not.  With matrix coefficients the
    product-of-blocks order is the canonical one; callers wanting commuting
    semantics should stick to scalars.
    """
    d = StarPattern.coerce(pattern)
    k = part.k
    if len(d) != k:
        raise InputMismatchError("pattern length must match the partition size")
    if coeffs is None:
        coeffs = [identity_element(table.dim)] * k
    if len(coeffs) != k:
        raise InputMismatchError(f"need {k} coefficients, got {len(coeffs)}")
    table.require_order(max((len(b) for b in part.blocks), default=0))
    if k == 0:
        return identity_element(table.dim)
    p = table.dim
    subs = _block_patterns(part.blocks, d.letters)
    if p == 1:
        out = 1.0 + 0.0j
        for sub in subs:
            v = table.data.get(sub)
            if v is None:
                return 0.0 + 0.0j
            out *= v
        for c in coeffs:
            out *= complex(c)
        return out
    cs = [_coerce_coeff(c, p) for c in coeffs]
    out = np.eye(p, dtype=complex)
    for b, sub in zip(part.blocks, subs):
        core = table.data.get(sub)
        if core is None:
            return np.zeros((p, p), dtype=complex)
        inners = [cs[pos - 1] for pos in b[:-1]]
        out = out @ _apply_core(core, inners, p) @ cs[b[-1] - 1]
    return out


# ---------------------------------------------------------------------------
# moment <-> cumulant conversions


def _check_conversion_bounds(dim: int, order: int) -> None:
    limit = MAX_SCALAR_ORDER if dim == 1 else MAX_MATRIX_ORDER
    if order > limit:
        raise OrderBoundError(
            f"conversion order {order} exceeds the dim-{dim} bound {limit}"
        )
    if order < 0:
        raise OrderBoundError("order must be nonnegative")


def _zero_value(dim: int, k: int):
    if dim == 1:
        return 0.0 + 0.0j
    return np.zeros(core_shape(dim, k), dtype=complex)


def _sum_over(table: _PatternTable, parts, k: int, letters: str, skip_whole: bool):
    acc = _zero_value(table.dim, k)
    for part in parts:
        if skip_whole and part.num_blocks == 1:
            continue
        val = _core_partition_tensor(table, part, letters)
        if val is None:
            continue
        acc = acc + val
    return acc


def free_cumulants_to_moments(table: CumulantTable, K: int) -> MomentTable:
    """Sum the partitioned cumulants over noncrossing partitions."""
    _check_conversion_bounds(table.dim, K)
    table.require_order(K)
    out = MomentTable(order=K, dim=table.dim)
    for k in range(1, K + 1):
        for d in StarPattern.all_patterns(k):
            out.set(d, _sum_over(table, noncrossing_cached(k), k, d.letters, False))
    return out


def moments_to_free_cumulants(table: MomentTable, K: int) -> CumulantTable:
    """Invert the noncrossing sum order by order."""
    _check_conversion_bounds(table.dim, K)
    table.require_order(K)
    out = CumulantTable(order=K, dim=table.dim)
    for k in range(1, K + 1):
        for d in StarPattern.all_patterns(k):
            moment = table.data.get(d.letters)
            if moment is None:
                moment = _zero_value(table.dim, k)
            lower = _sum_over(out, noncrossing_cached(k), k, d.letters, True)
            out.set(d, moment - lower)
    return out


def classical_cumulants_to_moments(table: CumulantTable, K: int) -> MomentTable:
    """Sum the partitioned cumulants over all partitions (scalars only)."""
    if table.dim != 1:
        raise UnsupportedAlgebraError("classical conversions take scalar tables")
    _check_conversion_bounds(1, K)
    table.require_order(K)
    out = MomentTable(order=K, dim=1)
    for k in range(1, K + 1):
        for d in StarPattern.all_patterns(k):
            out.set(d, _sum_over(table, all_partitions_cached(k), k, d.letters, False))
    return out


def moments_to_classical_cumulants(table: MomentTable, K: int) -> CumulantTable:
    if table.dim != 1:
        raise UnsupportedAlgebraError("classical conversions take scalar tables")
    _check_conversion_bounds(1, K)
    table.require_order(K)
    out = CumulantTable(order=K, dim=1)
    for k in range(1, K + 1):
        for d in StarPattern.all_patterns(k):
            moment = table.data.get(d.letters)
            if moment is None:
                moment = 0.0 + 0.0j
            lower = _sum_over(out, all_partitions_cached(k), k, d.letters, True)
            out.set(d, moment - lower)
    return out


# ---------------------------------------------------------------------------
# free identically distributed families


@lru_cache(maxsize=None)
def _kernel_mask(blocks: tuple, k: int, n: int) -> np.ndarray:
    """Boolean (n,)*k tensor: which index words are constant on each block."""
    grids = np.indices((n,) * k)
    mask = np.ones((n,) * k, dtype=bool)
    for b in blocks:
        for x in b[1:]:
            mask &= grids[b[0] - 1] == grids[x - 1]
    return mask


def joint_moments_free_family(table: CumulantTable, n: int, word, pattern, coeffs=None):
    """Joint moment of n free copies with one shared cumulant table.

    Mixed cumulants of free variables vanish, so only noncrossing partitions
    refining the word's kernel contribute.  coeffs is the interleaved list
    b_0..b_k (length k+1); identity when omitted.
    """
    d = StarPattern.coerce(pattern)
    idx = tuple(int(i) for i in word)
    k = len(idx)
    if len(d) != k:
        raise InputMismatchError("index word and pattern lengths differ")
    if any(not 1 <= i <= n for i in idx):
        raise InputMismatchError(f"index word entries must lie in 1..{n}")
    if coeffs is not None and len(coeffs) != k + 1:
        raise InputMismatchError(f"need {k + 1} interleaved coefficients")
    if k == 0:
        out = identity_element(table.dim)
        if coeffs is not None:
            out = coeffs[0] if np.asarray(coeffs[0]).ndim else complex(coeffs[0])
        return out
    table.require_order(k)

    scalar_coeffs = coeffs is None or all(np.asarray(c).ndim == 0 for c in coeffs)
    if table.dim == 1 and not scalar_coeffs:
        # scalar spec with matrix coefficients: the coefficients ride along
        scalar = joint_moments_free_family(table, n, word, pattern, None)
        return scalar * _ordered_coeff_product(coeffs)

    ker = kernel(idx)
    inner = None
    if coeffs is not None:
        inner = list(coeffs[1:])
    acc = _zero_value(table.dim, 1)
    for part in noncrossing_cached(k):
        if not refines(part, ker):
            continue
        val = eval_partitioned_free(table, part, d.letters, inner)
        acc = acc + val
    if coeffs is not None:
        b0 = coeffs[0]
        if table.dim == 1:
            acc = complex(b0) * acc
        else:
            acc = _coerce_coeff(b0, table.dim) @ acc
    return acc


def joint_moment_tensor(table: CumulantTable, n: int, k: int, pattern, coeffs=None):
    """All joint moments of length k at once, indexed by the word.

    Returns shape (n,)*k for scalar tables, (n,)*k+(p,p) for matrix ones.
    The kernel masks make the word dependence a sum of indicator tensors.
    """
    d = StarPattern.coerce(pattern)
    if len(d) != k:
        raise InputMismatchError("pattern length must equal k")
    if n ** k > TUPLE_BUDGET:
        raise BudgetError(f"{n}^{k} index words exceed the tuple budget")
    if k == 0:
        raise InputMismatchError("joint moment tensors need k >= 1")
    table.require_order(k)
    p = table.dim
    inner = None if coeffs is None else list(coeffs[1:])
    if coeffs is not None and len(coeffs) != k + 1:
        raise InputMismatchError(f"need {k + 1} interleaved coefficients")

    matrix_out = p > 1 or (coeffs is not None and any(np.asarray(c).ndim for c in coeffs))
    if p == 1 and matrix_out:
        scalar = joint_moment_tensor(table, n, k, pattern, None)
        return scalar[..., None, None] * _ordered_coeff_product(coeffs)
    if matrix_out:
        acc = np.zeros((n,) * k + (p, p), dtype=complex)
    else:
        acc = np.zeros((n,) * k, dtype=complex)
    for part in noncrossing_cached(k):
        val = eval_partitioned_free(table, part, d.letters, inner)
        if isinstance(val, complex) and val == 0:
            continue
        mask = _kernel_mask(part.blocks, k, n)
        if matrix_out:
            acc += mask[..., None, None] * val
        else:
            acc += mask * val
    if coeffs is not None and matrix_out:
        acc = np.einsum("ab,...bc->...ac", _coerce_coeff(coeffs[0], p), acc)
    return acc


def multivariate_cumulants_from_joint_moments(oracle, K: int) -> MultiCumulantTable:
    """Invert the multivariate moment sum, identity coefficients throughout.

    The oracle exposes .n, .dim and .moment(word, pattern); mixed entries of
    the result are the freeness certificate (zero iff the family is free).
    """
    n = int(oracle.n)
    dim = int(getattr(oracle, "dim", 1))
    if K > MAX_MULTI_ORDER:
        raise OrderBoundError(f"multivariate order bound is {MAX_MULTI_ORDER}")
    if n > MAX_ALPHABET:
        raise OrderBoundError(f"multivariate alphabet bound is {MAX_ALPHABET}")
    out = MultiCumulantTable(order=K, n=n, dim=dim)
    ident = identity_element(dim)
    mul = (lambda a, b: a * b) if dim == 1 else np.matmul

    for k in range(1, K + 1):
        for word in itertools.product(range(1, n + 1), repeat=k):
            for d in StarPattern.all_patterns(k):
                moment = oracle.moment(word, d)
                moment = complex(moment) if dim == 1 else np.asarray(moment, dtype=complex)
                acc = moment
                for part in noncrossing_cached(k):
                    if part.num_blocks == 1:
                        continue

                    def block_value(block, inners, _w=word, _d=d.letters):
                        sub_w = tuple(_w[x - 1] for x in block)
                        sub_d = "".join(_d[x - 1] for x in block)
                        v = out.get(sub_w, sub_d)
                        if v is None:
                            return None
                        for inner in inners:
                            v = mul(v, inner)
                        return v

                    lefts = {pos: ident for pos in range(1, k + 1)}
                    rights = {pos: ident for pos in range(1, k + 1)}
                    val = _run_plan(_peel_plan(part.blocks, k, False), block_value,
                                    lefts, rights, mul)
                    if val is not None:
                        acc = acc - val
                out.set(word, d, acc)
    return out


def random_cumulant_table(order: int, dim: int = 1, seed: int = 0,
                          scale: float = 0.4) -> CumulantTable:
    """Seeded dense table with magnitudes shrinking by order.

    The scale keeps round-trip conditioning sane: moments are sums over
    partitions of products of entries, so entry size ~ scale^k keeps order-6
    moments near unit scale.
    """
    rng = np.random.default_rng(seed)
    table = CumulantTable(order=order, dim=dim)
    for k in range(1, order + 1):
        for d in StarPattern.all_patterns(k):
            if dim == 1:
                value = (rng.standard_normal() + 1j * rng.standard_normal()) * scale ** k
            else:
                shape = core_shape(dim, k)
                value = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                value *= scale ** k / dim
            table.set(d, value)
    return table
