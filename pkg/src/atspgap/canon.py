"""Canonical certificates for unlabeled digraphs on <= 16 nodes.

Individualization-refinement canonical labeling.  Colors start from
(out-degree, in-degree) and are refined by the multisets of neighbour
colors, separately over out- and in-neighbourhoods, until stable.  When
the coloring is not discrete, the search individualizes each node of the
first non-singleton cell in turn; children are filtered to those whose
refined color histogram is minimal among siblings (the histogram is a
relabeling invariant, so the filter is sound), and the certificate is
the lexicographically least adjacency serialization over the surviving
leaves.  Certificate bytes are the node count followed by row-major
adjacency bits packed big-endian, so they are stable across runs and
machines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import HalfPoint, check_n, support


@dataclass(frozen=True)
class SupportDigraph:
    """Loop-free digraph given by per-node out-neighbour bitmasks."""

    n: int
    out_masks: tuple[int, ...]

    def __post_init__(self):
        check_n(self.n)
        if len(self.out_masks) != self.n:
            raise ValueError("out_masks has wrong length")
        for u, mask in enumerate(self.out_masks):
            if mask >> self.n:
                raise ValueError(f"out-neighbours of {u} out of range")
            if mask & (1 << u):
                raise ValueError(f"self-loop at node {u}")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "SupportDigraph":
        masks = [0] * n
        for u, v in arcs:
            masks[u] |= 1 << v
        return cls(n, tuple(masks))

    @classmethod
    def from_half_point(cls, x: HalfPoint) -> "SupportDigraph":
        return cls.from_arcs(x.n, support(x))

    def in_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for u, mask in enumerate(self.out_masks):
            rest = mask
            while rest:
                v = (rest & -rest).bit_length() - 1
                masks[v] |= 1 << u
                rest &= rest - 1
        return masks

    def relabel(self, sigma: Sequence[int]) -> "SupportDigraph":
        """The digraph with node u renamed sigma[u]."""
        masks = [0] * self.n
        for u, mask in enumerate(self.out_masks):
            rest = mask
            while rest:
                v = (rest & -rest).bit_length() - 1
                masks[sigma[u]] |= 1 << sigma[v]
                rest &= rest - 1
        return SupportDigraph(self.n, tuple(masks))


Certificate = bytes


def serialize(g: SupportDigraph) -> Certificate:
    """n, then row-major adjacency bits packed big-endian."""
    n = g.n
    bits = 0
    for u in range(n):
        for v in range(n):
            bits = (bits << 1) | ((g.out_masks[u] >> v) & 1)
    nbytes = (n * n + 7) // 8
    bits <<= nbytes * 8 - n * n  # pad on the right so the first bit is the MSB
    return bytes([n]) + bits.to_bytes(nbytes, "big")


def _neighbour_lists(g: SupportDigraph) -> tuple[list[list[int]], list[list[int]]]:
    outs = [[] for _ in range(g.n)]
    ins = [[] for _ in range(g.n)]
    for u, mask in enumerate(g.out_masks):
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            outs[u].append(v)
            ins[v].append(u)
            rest &= rest - 1
    return outs, ins


def _refine(colors: list[int], outs, ins) -> list[int]:
    """Iterate color refinement to a fixed point; colors are ranks, so the
    values are relabeling-invariant."""
    n = len(colors)
    classes = len(set(colors))
    while True:
        sigs = [
            (
                colors[v],
                tuple(sorted(colors[w] for w in outs[v])),
                tuple(sorted(colors[w] for w in ins[v])),
            )
            for v in range(n)
        ]
        ranking = {sig: i for i, sig in enumerate(sorted(set(sigs)))}
        colors = [ranking[sigs[v]] for v in range(n)]
        new_classes = len(set(colors))
        if new_classes == classes:
            return colors
        classes = new_classes


def _histogram(colors: list[int]) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    return tuple(sorted(counts.items()))


def certificate(g: SupportDigraph) -> Certificate:
    """Canonical certificate: equal for two digraphs iff they are
    isomorphic."""
    outs, ins = _neighbour_lists(g)
    n = g.n
    initial = [(len(outs[v]), len(ins[v])) for v in range(n)]
    ranking = {sig: i for i, sig in enumerate(sorted(set(initial)))}
    colors = _refine([ranking[initial[v]] for v in range(n)], outs, ins)

    best: Certificate | None = None

    def descend(colors: list[int]):
        nonlocal best
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            # Discrete coloring: the ranks are the canonical labels.
            leaf = serialize(g.relabel(colors))
            if best is None or leaf < best:
                best = leaf
            return
        children = []
        for v in target:
            branched = [(c, 0 if u == v else 1) for u, c in enumerate(colors)]
            ranking = {sig: i for i, sig in enumerate(sorted(set(branched)))}
            refined = _refine([ranking[s] for s in branched], outs, ins)
            children.append((_histogram(refined), refined))
        cutoff = min(inv for inv, _ in children)
        for inv, refined in children:
            if inv == cutoff:
                descend(refined)

    descend(colors)
    assert best is not None
    return best


def brute_force_certificate(g: SupportDigraph) -> Certificate:
    """Minimum serialization over all n! relabelings.  Test oracle for
    small n; independent of the search above."""
    import itertools

    if g.n > 8:
        raise ValueError("brute force oracle limited to n <= 8")
    return min(serialize(g.relabel(sigma)) for sigma in itertools.permutations(range(g.n)))


class CertificateStore:
    """Set of certificates with first-insertion detection.

    Insert order does not affect final contents, so shards merged in any
    order agree.
    """

    def __init__(self):
        self._seen: set[Certificate] = set()

    def __len__(self) -> int:
        return len(self._seen)

    def __contains__(self, cert: Certificate) -> bool:
        return cert in self._seen

    def insert(self, cert: Certificate) -> bool:
        """True iff the certificate was not already present."""
        if cert in self._seen:
            return False
        self._seen.add(cert)
        return True


def dedup_insert(store: CertificateStore, cert: Certificate) -> bool:
    return store.insert(cert)
