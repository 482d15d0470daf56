"""Birooted involutive X-graphs and the folding kernel.

Only the positive-letter edge of each involutive pair is stored in
``XGraph.edges``; the inverse edge is implied. The folding workbench
``Folder`` keeps per-vertex ``letter -> target`` maps for both signs so
that reading a word in either direction is a dict lookup.
"""
from __future__ import annotations

import math
import random
from collections import deque
from typing import Iterable, Optional, Sequence

from .words import Alphabet, Word


class NondeterministicGraphError(ValueError):
    pass


class XGraph:
    """An X-graph with marked vertices ``alpha`` and ``beta``.

    ``edges`` holds ``(source, letter, target)`` triples with ``letter``
    a positive letter code. The graph is treated as immutable once built.
    """

    __slots__ = ("n", "edges", "alpha", "beta", "_adj", "_det")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, int]], alpha: int = 0, beta: int = 0):
        self.n = n
        es = set()
        for u, x, v in edges:
            if x & 1:
                u, x, v = v, x ^ 1, u
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {x}, {v}) outside vertex range {n}")
            es.add((u, x, v))
        self.edges = tuple(sorted(es))
        if not (0 <= alpha < n and 0 <= beta < n):
            raise ValueError("roots must be vertices")
        self.alpha = alpha
        self.beta = beta
        self._adj: Optional[list[dict[int, int]]] = None
        self._det: Optional[bool] = None

    @property
    def vertex_count(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"XGraph(n={self.n}, edges={len(self.edges)}, alpha={self.alpha}, beta={self.beta})"

    def is_deterministic(self) -> bool:
        if self._det is None:
            seen = set()
            ok = True
            for u, x, v in self.edges:
                if (u, x) in seen or (v, x ^ 1) in seen:
                    ok = False
                    break
                seen.add((u, x))
                seen.add((v, x ^ 1))
            self._det = ok
        return self._det

    def adjacency(self) -> list[dict[int, int]]:
        """``letter -> target`` per vertex, both signs. Deterministic graphs only."""
        if self._adj is None:
            if not self.is_deterministic():
                raise NondeterministicGraphError("graph is not deterministic")
            adj: list[dict[int, int]] = [{} for _ in range(self.n)]
            for u, x, v in self.edges:
                adj[u][x] = v
                adj[v][x ^ 1] = u
            self._adj = adj
        return self._adj

    def neighbours(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.n)]
        for u, _, v in self.edges:
            nb[u].append(v)
            nb[v].append(u)
        return nb

    def all_edges(self) -> list[tuple[int, int, int]]:
        """Every edge including the implied inverse ones."""
        out = []
        for u, x, v in self.edges:
            out.append((u, x, v))
            out.append((v, x ^ 1, u))
        return out

    def to_dot(self, alphabet: Optional[Alphabet] = None, name: str = "X") -> str:
        lines = [f"digraph {name} {{"]
        for v in range(self.n):
            attrs = []
            if v == self.alpha:
                attrs.append("shape=doublecircle")
            elif v == self.beta:
                attrs.append("shape=square")
            if v == self.beta and v == self.alpha:
                attrs.append('xlabel="beta"')
            lines.append(f"  {v}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
        for u, x, v in self.edges:
            label = alphabet.names[x >> 1] if alphabet is not None else f"x{x >> 1}"
            lines.append(f'  {u} -> {v} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class Folder:
    """Union-find folding workbench.

    Edges are folded as soon as they are added, so the represented graph
    is deterministic after every public call. Representatives are always
    the least vertex id of their class.
    """

    def __init__(self, n: int = 0):
        self.parent: list[int] = list(range(n))
        self.out: list[dict[int, int]] = [{} for _ in range(n)]
        self.live = n

    def new_vertex(self) -> int:
        v = len(self.parent)
        self.parent.append(v)
        self.out.append({})
        self.live += 1
        return v

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def follow(self, v: int, x: int) -> Optional[int]:
        t = self.out[self.find(v)].get(x)
        return None if t is None else self.find(t)

    def read(self, v: int, w: Sequence[int]) -> Optional[int]:
        find = self.find
        out = self.out
        v = find(v)
        for x in w:
            t = out[v].get(x)
            if t is None:
                return None
            v = find(t)
        return v

    def add_edge(self, u: int, x: int, v: int) -> None:
        u = self.find(u)
        v = self.find(v)
        t = self.out[u].get(x)
        if t is not None:
            self.merge(t, v)
            return
        s = self.out[v].get(x ^ 1)
        if s is not None:
            self.merge(s, u)
            return
        self.out[u][x] = v
        self.out[v][x ^ 1] = u

    def add_path(self, u: int, w: Sequence[int], v: int) -> None:
        """Sew a fresh copy of Lin(w) from ``u`` to ``v``."""
        if not w:
            self.merge(u, v)
            return
        cur = u
        for x in w[:-1]:
            nxt = self.new_vertex()
            self.add_edge(cur, x, nxt)
            cur = nxt
        self.add_edge(cur, w[-1], v)

    def merge(self, a: int, b: int) -> None:
        find = self.find
        parent = self.parent
        out = self.out
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a = find(a)
            b = find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            parent[b] = a
            self.live -= 1
            ob = out[b]
            out[b] = {}
            oa = out[a]
            for x, t in ob.items():
                t2 = oa.get(x)
                if t2 is None:
                    oa[x] = t
                else:
                    stack.append((t2, t))

    def representatives(self) -> list[int]:
        return [v for v, p in enumerate(self.parent) if p == v]

    def snapshot(self, alpha: int = 0, beta: int = 0) -> tuple[XGraph, list[int]]:
        """Freeze into an XGraph numbered in representative order.

        Returns the graph and the map from every workbench vertex id to
        its vertex in the snapshot.
        """
        reps = self.representatives()
        new = {r: i for i, r in enumerate(reps)}
        vmap = [new[self.find(v)] for v in range(len(self.parent))]
        edges = []
        for r in reps:
            for x, t in self.out[r].items():
                if not x & 1:
                    edges.append((new[r], x, vmap[t]))
        return XGraph(len(reps), edges, vmap[alpha], vmap[beta]), vmap


def linear_graph(w: Word) -> XGraph:
    edges = [(i, x, i + 1) for i, x in enumerate(w)]
    return XGraph(len(w) + 1, edges, 0, len(w))


def disjoint_union(g: XGraph, h: XGraph) -> tuple[XGraph, int]:
    """Union with ``h`` shifted by ``g.n``; roots of ``g`` kept. Returns the shift."""
    s = g.n
    edges = list(g.edges) + [(u + s, x, v + s) for u, x, v in h.edges]
    return XGraph(g.n + h.n, edges, g.alpha, g.beta), s


def wedge(g: XGraph, gv: int, h: XGraph, hv: int) -> tuple[XGraph, list[int]]:
    """Glue ``h`` onto ``g`` identifying ``gv`` with ``hv`` (no folding).

    Returns the graph (roots from ``g``) and the vertex map for ``h``.
    """
    hmap = []
    k = g.n
    for v in range(h.n):
        if v == hv:
            hmap.append(gv)
        else:
            hmap.append(k)
            k += 1
    edges = list(g.edges) + [(hmap[u], x, hmap[v]) for u, x, v in h.edges]
    return XGraph(k, edges, g.alpha, g.beta), hmap


def determinize(g: XGraph, rng: Optional[random.Random] = None) -> tuple[XGraph, list[int]]:
    """Fold ``g``; the optional ``rng`` shuffles the fold order."""
    folder = Folder(g.n)
    edges = list(g.edges)
    if rng is not None:
        rng.shuffle(edges)
        edges = [(v, x ^ 1, u) if rng.random() < 0.5 else (u, x, v) for u, x, v in edges]
    for u, x, v in edges:
        folder.add_edge(u, x, v)
    return folder.snapshot(g.alpha, g.beta)


def read(g: XGraph, start: int, w: Sequence[int]) -> Optional[int]:
    adj = g.adjacency()
    v = start
    for x in w:
        v = adj[v].get(x)
        if v is None:
            return None
    return v


def distances_from(g: XGraph, source: int, nb: Optional[list[list[int]]] = None) -> list[float]:
    if nb is None:
        nb = g.neighbours()
    dist: list[float] = [math.inf] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in nb[u]:
            if dist[v] == math.inf:
                dist[v] = du
                queue.append(v)
    return dist


def path_metric(g: XGraph, u: int, v: int) -> float:
    return distances_from(g, u)[v]


def canonical_form(g: XGraph) -> tuple:
    """A code equal for two graphs iff they are birooted-isomorphic.

    Vertices are numbered by BFS from ``alpha`` (then ``beta``), taking
    letters in increasing order; determinism makes the numbering forced.
    """
    adj = g.adjacency()
    order = {g.alpha: 0}
    queue = deque([g.alpha])
    rows = []

    def drain():
        while queue:
            u = queue.popleft()
            row = []
            for x in sorted(adj[u]):
                t = adj[u][x]
                if t not in order:
                    order[t] = len(order)
                    queue.append(t)
                row.append((x, order[t]))
            rows.append(tuple(row))

    drain()
    if g.beta not in order:
        order[g.beta] = len(order)
        queue.append(g.beta)
        drain()
    if len(order) != g.n:
        raise ValueError("rooted isomorphism needs every vertex reachable from a root")
    return (g.n, order[g.beta], tuple(rows))


def iso_rooted(g1: XGraph, g2: XGraph) -> bool:
    if g1.n != g2.n or len(g1.edges) != len(g2.edges):
        if not (g1.is_deterministic() and g2.is_deterministic()):
            raise NondeterministicGraphError("iso_rooted needs deterministic graphs")
        return False
    return canonical_form(g1) == canonical_form(g2)
