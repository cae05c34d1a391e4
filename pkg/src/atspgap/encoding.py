"""Bracketed cycle-cover encodings and ordered pairs of them.

A cover encoding lists the cover's cycles, longest first, each cycle
rotated so its minimal node leads, and equal-length cycles ordered by
increasing leader.  An ordered pair of encodings additionally sorts its
two covers by (partition descending-lex, then flat label sequence).  The
text grammar is `[0 1 2 3|4 5],[0 3 2 4|1 5]`: cycles separated by `|`,
labels by spaces, the two covers by `,`.

A pair is in standard form when its first cover is the identity layout
of its partition (consecutive labels per cycle).  standardize_pair
enumerates every label translation that puts a pair into standard form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import CycleCover


class EncodingError(ValueError):
    """Raised for malformed encodings; the message names the violated clause."""


@dataclass(frozen=True)
class CoverEncoding:
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.cycles:
            raise EncodingError("empty encoding")
        labels = [k for cyc in self.cycles for k in cyc]
        n = len(labels)
        seen = set()
        for k in labels:
            if not 0 <= k < n:
                raise EncodingError(f"label {k} out of range for n={n}")
            if k in seen:
                raise EncodingError(f"duplicate label {k}")
            seen.add(k)
        prev_len = None
        prev_leader = None
        for cyc in self.cycles:
            if len(cyc) < 2:
                raise EncodingError(f"cycle of length {len(cyc)}: parts must be >= 2")
            if cyc[0] != min(cyc):
                raise EncodingError(f"cycle {list(cyc)} does not lead with its minimum")
            if prev_len is not None:
                if len(cyc) > prev_len:
                    raise EncodingError("cycle lengths not in descending order")
                if len(cyc) == prev_len and cyc[0] <= prev_leader:
                    raise EncodingError(
                        "equal-length cycles must have increasing leaders"
                    )
            prev_len = len(cyc)
            prev_leader = cyc[0]

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.cycles)

    @property
    def partition(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cycles)

    def flat(self) -> tuple[int, ...]:
        return tuple(k for cyc in self.cycles for k in cyc)

    def __str__(self) -> str:
        return format_cover(self)


@dataclass(frozen=True)
class CoverPairEncoding:
    first: CoverEncoding
    second: CoverEncoding

    def __post_init__(self):
        if self.first.n != self.second.n:
            raise EncodingError("pair covers different node counts")
        if self.first.partition < self.second.partition:
            raise EncodingError("pair out of order: partitions must descend")
        if (
            self.first.partition == self.second.partition
            and self.first.flat() > self.second.flat()
        ):
            raise EncodingError("pair out of order: first must be lexicographically <=")

    @property
    def n(self) -> int:
        return self.first.n

    @property
    def standard_flag(self) -> bool:
        return self.first == identity_layout(self.first.partition)

    def __str__(self) -> str:
        return format_pair(self)


def identity_layout(partition: Sequence[int]) -> CoverEncoding:
    """The encoding whose cycle j holds consecutive labels starting at
    sum(partition[:j])."""
    cycles = []
    start = 0
    for p in partition:
        cycles.append(tuple(range(start, start + p)))
        start += p
    return CoverEncoding(tuple(cycles))


def encode_cover(cover: CycleCover) -> CoverEncoding:
    """Normal-form encoding: cycles by (length desc, minimum asc), each
    rotated to lead with its minimum."""
    cycles = []
    for cyc in cover.cycles():
        lead = cyc.index(min(cyc))
        cycles.append(tuple(cyc[lead:] + cyc[:lead]))
    cycles.sort(key=lambda c: (-len(c), c[0]))
    return CoverEncoding(tuple(cycles))


def decode(enc: CoverEncoding) -> CycleCover:
    n = enc.n
    successor = [0] * n
    for cyc in enc.cycles:
        for i, u in enumerate(cyc):
            successor[u] = cyc[(i + 1) % len(cyc)]
    return CycleCover(tuple(successor))


def apply_permutation(enc: CoverEncoding, sigma: Sequence[int]) -> CoverEncoding:
    """Relabel every node by sigma, then re-normalize.

    The result encodes a cover isomorphic to the input's.
    """
    n = enc.n
    if sorted(sigma) != list(range(n)):
        raise EncodingError(f"sigma is not a bijection on [0, {n})")
    relabeled = tuple(tuple(sigma[k] for k in cyc) for cyc in enc.cycles)
    cycles = []
    for cyc in relabeled:
        lead = cyc.index(min(cyc))
        cycles.append(tuple(cyc[lead:] + cyc[:lead]))
    cycles.sort(key=lambda c: (-len(c), c[0]))
    return CoverEncoding(tuple(cycles))


def make_pair(a: CoverEncoding, b: CoverEncoding) -> CoverPairEncoding:
    """Order two encodings into a valid pair."""
    key_a = (tuple(-p for p in a.partition), a.flat())
    key_b = (tuple(-p for p in b.partition), b.flat())
    if key_a <= key_b:
        return CoverPairEncoding(a, b)
    return CoverPairEncoding(b, a)


def translate_pair(pair: CoverPairEncoding, sigma: Sequence[int]) -> CoverPairEncoding:
    return make_pair(
        apply_permutation(pair.first, sigma), apply_permutation(pair.second, sigma)
    )


def standardize_pair(pair: CoverPairEncoding) -> list[CoverPairEncoding]:
    """All standard-form translations of a pair.

    A translation lands in standard form exactly when it maps the cycles
    of one maximal-partition cover onto the identity layout's blocks, so
    the free choices are: which maximal-partition cover, the assignment
    of its cycles to equal-length blocks, and a rotation per cycle.  The
    returned list is deduplicated and sorted.
    """
    target = pair.first.partition
    sources = [c for c in (pair.first, pair.second) if c.partition == target]
    out = set()
    for src in sources:
        for sigma in _block_permutations(src, target):
            out.add(translate_pair(pair, sigma))
    return sorted(out, key=lambda p: (p.first.flat(), p.second.flat()))


def _block_permutations(src: CoverEncoding, partition: tuple[int, ...]):
    """Permutations mapping src's cycles onto the identity blocks of
    partition, over all cycle matchings and rotations."""
    n = src.n
    offsets = [sum(partition[:j]) for j in range(len(partition))]
    slots_by_len: dict[int, list[int]] = {}
    cycles_by_len: dict[int, list[int]] = {}
    for j, p in enumerate(partition):
        slots_by_len.setdefault(p, []).append(j)
        cycles_by_len.setdefault(p, []).append(j)
    lengths = sorted(slots_by_len)
    matchings_per_len = [
        itertools.permutations(cycles_by_len[p]) for p in lengths
    ]
    for combo in itertools.product(*matchings_per_len):
        assignment = {}  # slot -> source cycle index
        for p, perm in zip(lengths, combo):
            for slot, cyc_idx in zip(slots_by_len[p], perm):
                assignment[slot] = cyc_idx
        rotation_ranges = [range(partition[j]) for j in range(len(partition))]
        for rotations in itertools.product(*rotation_ranges):
            sigma = [0] * n
            for slot, s in zip(range(len(partition)), rotations):
                cyc = src.cycles[assignment[slot]]
                p = len(cyc)
                for i, node in enumerate(cyc, start=1):
                    sigma[node] = offsets[slot] + (s + i) % p
            yield sigma


def format_cover(enc: CoverEncoding) -> str:
    return "[" + "|".join(" ".join(str(k) for k in cyc) for cyc in enc.cycles) + "]"


def format_pair(pair: CoverPairEncoding) -> str:
    return f"{format_cover(pair.first)},{format_cover(pair.second)}"


def parse_cover(text: str) -> CoverEncoding:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise EncodingError(f"expected a bracketed encoding, got {text!r}")
    body = text[1:-1]
    cycles = []
    for part in body.split("|"):
        labels = part.split()
        if not labels:
            raise EncodingError("empty cycle")
        try:
            cycles.append(tuple(int(s) for s in labels))
        except ValueError:
            raise EncodingError(f"non-integer label in {part!r}") from None
    return CoverEncoding(tuple(cycles))


def parse_pair(text: str) -> CoverPairEncoding:
    """Parse `[...],[...]` and validate every encoding and pair invariant."""
    depth = 0
    split_at = None
    for i, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            split_at = i
            break
    if split_at is None:
        raise EncodingError("expected two encodings separated by ','")
    first = parse_cover(text[:split_at])
    second = parse_cover(text[split_at + 1 :])
    return CoverPairEncoding(first, second)
