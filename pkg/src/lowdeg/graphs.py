"""Multigraph algebra: canonical forms, subgraph streams, class enumeration.

A multigraph with self-loops on vertices {0, ..., n-1} is stored as an
exponent vector: a map from unordered vertex pairs {i, j} (a loop when
i == j) to a positive edge multiplicity. Everything downstream is indexed
by isomorphism classes of such multigraphs, so this module provides:

  * canonicalize: a canonical labelled representative plus automorphism
    count, computed per connected component by backtracking minimisation
    over vertex orderings (edges are compared in (larger endpoint, smaller
    endpoint) order, which makes prefix pruning sound), with components
    then sorted by (edge count, vertex count, edge list);
  * sub_multigraphs: the stream of componentwise sub-vectors beta <= alpha
    with binomial multiplicities prod_e C(alpha_e, beta_e);
  * enumerate_classes: all isomorphism classes up to an edge budget, by
    augment-and-canonicalize from smaller classes;
  * labeled_copy_count / alpha_factorial: exact counting helpers.

All public values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, Iterator, List, Mapping, Tuple, Union

Pair = Tuple[int, int]
EdgeTriple = Tuple[int, int, int]  # (i, j, multiplicity), i <= j

SUBGRAPH_EDGE_LIMIT = 12
CATALOG_EDGE_LIMIT = 7


class SizeLimitError(ValueError):
    """A combinatorial operation was asked to exceed its configured budget."""


class ExponentVector:
    """A multigraph on vertices 0..n-1 given by per-pair edge multiplicities.

    Pairs are unordered (stored with i <= j); zero multiplicities are absent.
    """

    __slots__ = ("n_vertices", "multiplicities")

    def __init__(self, n_vertices: int,
                 multiplicities: Union[Mapping[Pair, int], Iterable[Tuple[Pair, int]]] = ()):
        if n_vertices < 0:
            raise ValueError("n_vertices must be nonnegative")
        items = multiplicities.items() if isinstance(multiplicities, Mapping) else multiplicities
        norm: Dict[Pair, int] = {}
        for (i, j), m in items:
            if not (0 <= i < n_vertices and 0 <= j < n_vertices):
                raise ValueError(f"vertex pair ({i},{j}) outside 0..{n_vertices - 1}")
            if m < 0 or int(m) != m:
                raise ValueError(f"multiplicity must be a nonnegative integer, got {m}")
            if m == 0:
                continue
            key = (i, j) if i <= j else (j, i)
            norm[key] = norm.get(key, 0) + int(m)
        self.n_vertices = n_vertices
        self.multiplicities = norm

    @classmethod
    def from_pairs(cls, n_vertices: int, pairs: Iterable[Pair]) -> "ExponentVector":
        """Build from an edge list with repetitions (each pair adds one edge)."""
        acc: Dict[Pair, int] = {}
        for i, j in pairs:
            key = (i, j) if i <= j else (j, i)
            acc[key] = acc.get(key, 0) + 1
        return cls(n_vertices, acc)

    @property
    def edge_count(self) -> int:
        return sum(self.multiplicities.values())

    def support(self) -> List[int]:
        """Non-isolated vertices, sorted."""
        seen = set()
        for i, j in self.multiplicities:
            seen.add(i)
            seen.add(j)
        return sorted(seen)

    def key(self) -> Tuple[int, Tuple[Tuple[Pair, int], ...]]:
        return (self.n_vertices, tuple(sorted(self.multiplicities.items())))

    def __eq__(self, other) -> bool:
        return isinstance(other, ExponentVector) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        edges = ", ".join(f"{i}-{j}x{m}" for (i, j), m in sorted(self.multiplicities.items()))
        return f"ExponentVector(n={self.n_vertices}, [{edges}])"


@dataclass(frozen=True)
class MultigraphClass:
    """Canonical isomorphism class of a multigraph (no isolated vertices).

    Construct only via canonicalize / disjoint_union / catalog loading; the
    fields are mutually consistent by construction and hashable.
    """

    v: int
    d: int
    canonical_edges: Tuple[EdgeTriple, ...]
    aut_count: int

    @cached_property
    def components(self) -> Tuple["MultigraphClass", ...]:
        groups = _connected_vertex_groups(self.v, self.canonical_edges)
        if len(groups) <= 1:
            return (self,) if self.d else ()
        out = []
        for verts in groups:
            sub = {(i, j): m for (i, j, m) in self.canonical_edges if i in verts}
            out.append(canonicalize(ExponentVector(self.v, sub)))
        return tuple(sorted(out, key=lambda c: (c.d, c.v, c.canonical_edges)))

    @property
    def is_connected(self) -> bool:
        return len(self.components) == 1

    @property
    def is_forest(self) -> bool:
        return all(c.d == c.v - 1 for c in self.components)

    @property
    def has_tree_component(self) -> bool:
        return any(c.d == c.v - 1 for c in self.components)

    @property
    def all_components_cyclic(self) -> bool:
        """Every component contains a cycle (a loop counts as a cycle)."""
        return all(c.d >= c.v for c in self.components)

    @property
    def has_loops(self) -> bool:
        return any(i == j for (i, j, _) in self.canonical_edges)

    @property
    def max_multiplicity(self) -> int:
        return max((m for (_, _, m) in self.canonical_edges), default=0)

    @property
    def is_simple_loop_free(self) -> bool:
        return not self.has_loops and self.max_multiplicity <= 1

    def representative(self) -> ExponentVector:
        return ExponentVector(self.v, {(i, j): m for (i, j, m) in self.canonical_edges})

    def edge_string(self) -> str:
        if not self.canonical_edges:
            return "-"
        return " ".join(f"{i},{j},{m}" for (i, j, m) in self.canonical_edges)

    def __repr__(self) -> str:
        return f"MultigraphClass(v={self.v}, d={self.d}, [{self.edge_string()}], aut={self.aut_count})"


def _connected_vertex_groups(n: int, edges: Iterable[EdgeTriple]) -> List[set]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    touched = set()
    for i, j, _ in edges:
        touched.add(i)
        touched.add(j)
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    groups: Dict[int, set] = {}
    for v in touched:
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def _canonical_component(verts: List[int], mult: Mapping[Pair, int]):
    """Minimal edge sequence over orderings of `verts`, plus automorphism count.

    The flattened sequence lists edges in order of (larger endpoint, smaller
    endpoint) under the candidate labelling, so each newly placed vertex only
    appends to the sequence and lexicographic prefix pruning is sound.
    """
    m = len(verts)

    def mm(a: int, b: int) -> int:
        return mult.get((a, b) if a <= b else (b, a), 0)

    d = 0
    n_pairs = 0  # distinct pairs, i.e. triples in the flattened sequence
    for a_idx in range(m):
        for b_idx in range(a_idx, m):
            k = mm(verts[a_idx], verts[b_idx])
            d += k
            n_pairs += k > 0

    INF = (m, 0, 0)  # greater than any real (s, t, mult) since s < m always
    best: List[EdgeTriple] = [INF] * n_pairs
    chosen: List[int] = []
    used = [False] * m

    def segment(cand: int, t: int) -> List[EdgeTriple]:
        seg = []
        for s in range(t):
            k = mm(chosen[s], cand)
            if k:
                seg.append((s, t, k))
        loop = mm(cand, cand)
        if loop:
            seg.append((t, t, loop))
        return seg

    def minimize(out_len: int) -> None:
        t = len(chosen)
        if t == m:
            return
        for idx in range(m):
            if used[idx]:
                continue
            seg = segment(verts[idx], t)
            sl = best[out_len:out_len + len(seg)]
            if seg > sl:
                continue
            if seg < sl:
                best[out_len:] = seg + [INF] * (n_pairs - out_len - len(seg))
            used[idx] = True
            chosen.append(verts[idx])
            minimize(out_len + len(seg))
            chosen.pop()
            used[idx] = False

    minimize(0)

    aut = 0

    def count(out_len: int) -> None:
        nonlocal aut
        t = len(chosen)
        if t == m:
            aut += 1
            return
        for idx in range(m):
            if used[idx]:
                continue
            seg = segment(verts[idx], t)
            if seg != best[out_len:out_len + len(seg)]:
                continue
            used[idx] = True
            chosen.append(verts[idx])
            count(out_len + len(seg))
            chosen.pop()
            used[idx] = False

    count(0)
    edges = tuple(sorted(best))
    return m, d, edges, aut


_CANON_CACHE: Dict[tuple, "MultigraphClass"] = {}

EMPTY_CLASS = MultigraphClass(v=0, d=0, canonical_edges=(), aut_count=1)


def canonicalize(g: ExponentVector) -> MultigraphClass:
    """Canonical class of g: isolated vertices removed, vertices relabelled.

    Two exponent vectors related by a vertex permutation map to equal classes.
    """
    key = g.key()
    hit = _CANON_CACHE.get(key)
    if hit is not None:
        return hit
    groups = _connected_vertex_groups(g.n_vertices, [(i, j, m) for (i, j), m in g.multiplicities.items()])
    parts = [_canonical_component(sorted(vs), g.multiplicities) for vs in groups]
    parts.sort(key=lambda p: (p[1], p[0], p[2]))

    aut = 1
    run_key, run_len = None, 0
    for p in parts:
        aut *= p[3]
        k = (p[0], p[1], p[2])
        if k == run_key:
            run_len += 1
        else:
            aut *= math.factorial(run_len)
            run_key, run_len = k, 1
    aut *= math.factorial(run_len)

    edges: List[EdgeTriple] = []
    off = 0
    total_d = 0
    for pv, pd, pe, _ in parts:
        edges.extend((i + off, j + off, m) for (i, j, m) in pe)
        off += pv
        total_d += pd
    cls = MultigraphClass(v=off, d=total_d, canonical_edges=tuple(sorted(edges)), aut_count=aut)
    _CANON_CACHE[key] = cls
    return cls


def disjoint_union(g1: MultigraphClass, g2: MultigraphClass) -> MultigraphClass:
    """Class of the vertex-disjoint union; edge and vertex counts add."""
    combined = {(i, j): m for (i, j, m) in g1.canonical_edges}
    for i, j, m in g2.canonical_edges:
        combined[(i + g1.v, j + g1.v)] = m
    return canonicalize(ExponentVector(g1.v + g2.v, combined))


def sub_multigraphs(alpha: ExponentVector,
                    limit: int = SUBGRAPH_EDGE_LIMIT) -> Iterator[Tuple[ExponentVector, int]]:
    """Stream of (beta, multiplicity) over all componentwise beta <= alpha.

    The multiplicity is prod_e C(alpha_e, beta_e); summing f(class(beta)) *
    multiplicity over the stream reproduces the edge-labelled subgraph sum.
    Includes beta = 0 and beta = alpha; exactly prod_e (alpha_e + 1) items.
    """
    if alpha.edge_count > limit:
        raise SizeLimitError(
            f"subgraph stream requires |alpha| <= {limit}, got |alpha| = {alpha.edge_count}")
    pairs = sorted(alpha.multiplicities)
    mults = [alpha.multiplicities[e] for e in pairs]
    for combo in product(*(range(m + 1) for m in mults)):
        weight = 1
        for m, b in zip(mults, combo):
            weight *= math.comb(m, b)
        beta = ExponentVector(alpha.n_vertices,
                              {e: b for e, b in zip(pairs, combo) if b})
        yield beta, weight


@dataclass(frozen=True)
class ClassCatalog:
    """All isomorphism classes with 1 <= d <= d_max satisfying the flags."""

    d_max: int
    allow_loops: bool
    require_cyclic_components: bool
    classes: Tuple[MultigraphClass, ...]

    def by_dv(self) -> Dict[Tuple[int, int], List[MultigraphClass]]:
        out: Dict[Tuple[int, int], List[MultigraphClass]] = {}
        for c in self.classes:
            out.setdefault((c.d, c.v), []).append(c)
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# multigraph-catalog v1 d_max={self.d_max} "
                     f"allow_loops={int(self.allow_loops)} "
                     f"require_cyclic_components={int(self.require_cyclic_components)}\n")
            for c in self.classes:
                fh.write(f"{c.d} {c.v} {c.aut_count} {c.edge_string()}\n")

    @staticmethod
    def load(path) -> "ClassCatalog":
        with open(path) as fh:
            header = fh.readline().strip()
            fields = dict(tok.split("=") for tok in header.split()[2:])
            classes = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d_s, v_s, aut_s, *edge_toks = line.split()
                edges = {}
                if edge_toks != ["-"]:
                    for tok in edge_toks:
                        i, j, m = (int(x) for x in tok.split(","))
                        edges[(i, j)] = m
                cls = canonicalize(ExponentVector(int(v_s), edges))
                if (cls.d, cls.v, cls.aut_count) != (int(d_s), int(v_s), int(aut_s)):
                    raise ValueError(f"corrupt catalog line: {line!r}")
                classes.append(cls)
        return ClassCatalog(d_max=int(fields["d_max"]),
                            allow_loops=bool(int(fields["allow_loops"])),
                            require_cyclic_components=bool(int(fields["require_cyclic_components"])),
                            classes=tuple(classes))


def enumerate_classes(d_max: int, allow_loops: bool = True,
                      require_cyclic_components: bool = False,
                      limit: int = CATALOG_EDGE_LIMIT) -> ClassCatalog:
    """Complete, duplicate-free catalog of classes with d <= d_max.

    Level d is generated by adding one edge to every class at level d-1
    (over existing vertices, one new vertex, or two new vertices) and
    canonicalizing; the cyclicity filter is applied at the end.
    """
    if d_max > limit:
        raise SizeLimitError(f"catalog requires d_max <= {limit}, got d_max = {d_max}")
    levels: List[set] = [{EMPTY_CLASS}]
    for _ in range(d_max):
        nxt = set()
        for cls in levels[-1]:
            v = cls.v
            base = {(i, j): m for (i, j, m) in cls.canonical_edges}
            candidates: List[Pair] = [(i, j) for i in range(v) for j in range(i + 1, v)]
            if allow_loops:
                candidates += [(i, i) for i in range(v)]
            candidates += [(i, v) for i in range(v)]
            if allow_loops:
                candidates.append((v, v))
            candidates.append((v, v + 1))
            for pair in candidates:
                ext = dict(base)
                ext[pair] = ext.get(pair, 0) + 1
                nxt.add(canonicalize(ExponentVector(v + 2, ext)))
        levels.append(nxt)

    classes = [c for lev in levels[1:] for c in lev]
    if require_cyclic_components:
        classes = [c for c in classes if c.all_components_cyclic]
    classes.sort(key=lambda c: (c.d, c.v, c.canonical_edges))
    return ClassCatalog(d_max=d_max, allow_loops=allow_loops,
                        require_cyclic_components=require_cyclic_components,
                        classes=tuple(classes))


def labeled_copy_count(g: MultigraphClass, n: int) -> int:
    """Number of exponent vectors on vertex set [n] whose class equals g."""
    if n < g.v:
        return 0
    falling = math.perm(n, g.v)
    assert falling % g.aut_count == 0, "automorphism count must divide the falling factorial"
    return falling // g.aut_count


def alpha_factorial(g: MultigraphClass) -> int:
    """Product of factorials of the edge multiplicities."""
    out = 1
    for _, _, m in g.canonical_edges:
        out *= math.factorial(m)
    return out
