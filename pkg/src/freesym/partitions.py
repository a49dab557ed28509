"""Set partitions, noncrossing partitions, and star-decorated filtering.

Partitions of {1, ..., k} are kept in a canonical form: blocks ordered by
their least element, elements ascending inside each block.  With that
convention, equality of partition lists is plain list equality and no
set-of-frozensets juggling is needed anywhere downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import InputMismatchError, SizeLimitError

# Ground-set guards: Bell(12) ~ 4.2e6 and Catalan(16) ~ 3.5e7 partitions.
MAX_PARTITION_SIZE = 12
MAX_NONCROSSING_SIZE = 16

ONE = "1"
STAR = "*"


@dataclass(frozen=True)
class Partition:
    """A partition of the ground set {1, ..., k} into disjoint blocks."""

    k: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        if any(not b for b in blocks):
            raise InputMismatchError("partition contains an empty block")
        blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        elements = sorted(x for b in blocks for x in b)
        if elements != list(range(1, self.k + 1)):
            raise InputMismatchError(
                f"blocks {blocks} do not partition 1..{self.k}"
            )
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], k: int | None = None) -> "Partition":
        blocks = tuple(tuple(b) for b in blocks)
        if k is None:
            k = sum(len(b) for b in blocks)
        return cls(k, blocks)

    @classmethod
    def singletons(cls, k: int) -> "Partition":
        return cls(k, tuple((i,) for i in range(1, k + 1)))

    @classmethod
    def whole(cls, k: int) -> "Partition":
        if k == 0:
            return cls(0, ())
        return cls(k, (tuple(range(1, k + 1)),))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_of(self, position: int) -> tuple[int, ...]:
        for b in self.blocks:
            if position in b:
                return b
        raise InputMismatchError(f"position {position} not in 1..{self.k}")

    def block_index_map(self) -> dict[int, int]:
        """Position -> index of its block in canonical order."""
        out: dict[int, int] = {}
        for i, b in enumerate(self.blocks):
            for pos in b:
                out[pos] = i
        return out

    def to_lists(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]], k: int | None = None) -> "Partition":
        return cls.of(data, k)


@dataclass(frozen=True)
class StarPattern:
    """A word over {1, *} recording plain vs. adjoined occurrences."""

    letters: str = ""

    def __post_init__(self) -> None:
        bad = set(self.letters) - {ONE, STAR}
        if bad:
            raise InputMismatchError(f"pattern letters must be '1' or '*', got {bad}")

    @classmethod
    def coerce(cls, value) -> "StarPattern":
        if isinstance(value, StarPattern):
            return value
        if isinstance(value, str):
            return cls(value)
        return cls("".join(str(v) for v in value))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def __getitem__(self, i: int) -> str:
        return self.letters[i]

    @property
    def ones(self) -> int:
        return self.letters.count(ONE)

    @property
    def stars(self) -> int:
        return self.letters.count(STAR)

    @property
    def imbalance(self) -> int:
        """Number of stars minus number of plain letters."""
        return self.stars - self.ones

    def restrict(self, positions: Iterable[int]) -> "StarPattern":
        """Subword at the given 1-based positions, kept in increasing order."""
        pos = sorted(positions)
        if pos and (pos[0] < 1 or pos[-1] > len(self.letters)):
            raise InputMismatchError("restriction positions out of range")
        return StarPattern("".join(self.letters[p - 1] for p in pos))

    def conjugate(self) -> "StarPattern":
        flip = {ONE: STAR, STAR: ONE}
        return StarPattern("".join(flip[c] for c in reversed(self.letters)))

    def is_strictly_alternating(self) -> bool:
        return all(a != b for a, b in zip(self.letters, self.letters[1:]))

    @staticmethod
    def all_patterns(k: int) -> Iterator["StarPattern"]:
        """All 2^k patterns of length k, '1' sorted before '*'."""
        for combo in itertools.product((ONE, STAR), repeat=k):
            yield StarPattern("".join(combo))


@dataclass(frozen=True)
class IndexWord:
    """A word of variable indices, optionally checked against a bound n."""

    indices: tuple[int, ...]
    n: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(i < 1 for i in self.indices):
            raise InputMismatchError("index word entries must be >= 1")
        if self.n is not None and any(i > self.n for i in self.indices):
            raise InputMismatchError(f"index word entries must be <= {self.n}")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)


@dataclass(frozen=True)
class DecorationClass:
    """Blockwise admissibility rule for star patterns."""

    kind: str
    m: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in {"m_divisible", "inf_divisible", "alternating", "alternating_pair"}:
            raise InputMismatchError(f"unknown decoration kind {self.kind!r}")
        if self.kind == "m_divisible":
            if self.m is None or self.m < 1:
                raise InputMismatchError("m_divisible needs a modulus m >= 1")
        elif self.m is not None:
            raise InputMismatchError(f"{self.kind} takes no modulus")

    def label(self) -> str:
        if self.kind == "m_divisible":
            return f"M_DIVISIBLE({self.m})"
        return self.kind.upper()


def m_divisible(m: int) -> DecorationClass:
    return DecorationClass("m_divisible", m)


INF_DIVISIBLE = DecorationClass("inf_divisible")
ALTERNATING = DecorationClass("alternating")
ALTERNATING_PAIR = DecorationClass("alternating_pair")


def _word_indices(word) -> tuple[int, ...]:
    if isinstance(word, IndexWord):
        return word.indices
    return tuple(int(i) for i in word)


def enumerate_all_partitions(k: int) -> list[Partition]:
    """Every partition of {1..k}, canonical and deterministically ordered."""
    if not 0 <= k <= MAX_PARTITION_SIZE:
        raise SizeLimitError(f"all-partition enumeration supports 0 <= k <= {MAX_PARTITION_SIZE}")
    return list(all_partitions_cached(k))


def enumerate_noncrossing(k: int) -> list[Partition]:
    """Every noncrossing partition of {1..k}, canonical and ordered."""
    if not 0 <= k <= MAX_NONCROSSING_SIZE:
        raise SizeLimitError(f"noncrossing enumeration supports 0 <= k <= {MAX_NONCROSSING_SIZE}")
    return list(noncrossing_cached(k))


@lru_cache(maxsize=None)
def all_partitions_cached(k: int) -> tuple[Partition, ...]:
    parts = [Partition(k, blocks) for blocks in _all_blocks(k)]
    parts.sort(key=lambda p: p.blocks)
    return tuple(parts)


def _all_blocks(k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    if k == 0:
        yield ()
        return
    for blocks in _all_blocks(k - 1):
        for i in range(len(blocks)):
            yield blocks[:i] + (blocks[i] + (k,),) + blocks[i + 1:]
        yield blocks + ((k,),)


@lru_cache(maxsize=None)
def noncrossing_cached(k: int) -> tuple[Partition, ...]:
    parts = [
        Partition(k, tuple(tuple(x + 1 for x in blk) for blk in shape))
        for shape in _nc_shapes(k)
    ]
    parts.sort(key=lambda p: p.blocks)
    return tuple(parts)


@lru_cache(maxsize=None)
def _nc_shapes(length: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Noncrossing blockings of range(length).

    The block of position 0 splits the rest into independent gaps; crossing
    another gap would sandwich an element of that block.
    """
    if length == 0:
        return ((),)
    out = []
    for r in range(length):
        for choice in itertools.combinations(range(1, length), r):
            block = (0,) + choice
            gaps = []
            start = 1
            for c in choice:
                gaps.append((start, c))
                start = c + 1
            gaps.append((start, length))
            gap_shapes = [
                tuple(
                    tuple(tuple(x + a for x in blk) for blk in shape)
                    for shape in _nc_shapes(b - a)
                )
                for (a, b) in gaps
            ]
            for combo in itertools.product(*gap_shapes):
                blocks = (block,) + tuple(blk for shape in combo for blk in shape)
                out.append(blocks)
    return tuple(out)


def is_noncrossing(p: Partition) -> bool:
    """True iff no two blocks interleave as s1 < r1 < s2 < r2."""
    for a, b in itertools.combinations(p.blocks, 2):
        for s1, s2 in itertools.combinations(a, 2):
            for r1, r2 in itertools.combinations(b, 2):
                if s1 < r1 < s2 < r2 or r1 < s1 < r2 < s2:
                    return False
    return True


def kernel(word) -> Partition:
    """Partition of positions grouping equal letters of the word."""
    idx = _word_indices(word)
    if not idx:
        raise InputMismatchError("kernel of the empty word is undefined")
    groups: dict[int, list[int]] = {}
    for pos, val in enumerate(idx, start=1):
        groups.setdefault(val, []).append(pos)
    return Partition(len(idx), tuple(tuple(g) for g in groups.values()))


def refines(p: Partition, q: Partition) -> bool:
    """True iff every block of p sits inside a single block of q."""
    if p.k != q.k:
        raise InputMismatchError("refinement requires equal ground sets")
    owner = q.block_index_map()
    for b in p.blocks:
        first = owner[b[0]]
        if any(owner[x] != first for x in b[1:]):
            return False
    return True


def block_restriction(p: Partition, pattern, block_index: int) -> StarPattern:
    """Star pattern restricted to the positions of one block (0-based index)."""
    d = StarPattern.coerce(pattern)
    if len(d) != p.k:
        raise InputMismatchError("pattern length must equal the ground-set size")
    if not 0 <= block_index < p.num_blocks:
        raise IndexError(f"block index {block_index} out of range")
    return d.restrict(p.blocks[block_index])


def satisfies_decoration(restricted, cls: DecorationClass) -> bool:
    """Check one block's restricted pattern against a decoration class.

    The empty restriction is vacuously admissible except for the pair rule,
    which demands length exactly two.
    """
    d = StarPattern.coerce(restricted)
    if cls.kind == "m_divisible":
        return d.imbalance % cls.m == 0
    if cls.kind == "inf_divisible":
        return d.imbalance == 0
    if cls.kind == "alternating":
        return d.imbalance == 0 and d.is_strictly_alternating()
    # alternating_pair
    return len(d) == 2 and d.imbalance == 0


def filter_decorated(parts: Iterable[Partition], pattern, cls: DecorationClass) -> list[Partition]:
    """Partitions all of whose blocks are admissible for the given pattern.

    For the pair rule the partition must in addition be a pair partition;
    with length-2 blocks forced this is automatic, but it is checked anyway.
    """
    d = StarPattern.coerce(pattern)
    out = []
    for p in parts:
        if p.k != len(d):
            raise InputMismatchError("pattern length must equal the partition size")
        ok = all(
            satisfies_decoration(d.restrict(b), cls) for b in p.blocks
        )
        if ok and cls.kind == "alternating_pair":
            ok = all(len(b) == 2 for b in p.blocks)
        if ok:
            out.append(p)
    return out
