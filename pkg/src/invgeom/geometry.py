"""Schützenberger graphs inside the Cayley graph of the maximal group image.

For E-unitary monoids the Schützenberger graph of ``w`` embeds in the
Cayley graph of the group as the least subgraph containing the
``w``-path from 1 and closed under completing relation paths. Here that
closure is computed inside a finite ball, and the ``clipped`` flag says
whether any completion had to be dropped at the boundary.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .grouporacle import CayleyBall, GroupOracle
from .presentation import Presentation, is_special
from .stephen import Approximant, Budget, RightUnitTester, approximate
from .tribool import Confirmed, Refuted, TriBool, Unknown
from .words import Word, all_words, invert
from .xgraph import XGraph, distances_from


class EUnitaryRequired(ValueError):
    pass


def require_e_unitary(p: Presentation) -> None:
    if not p.e_unitary_asserted:
        raise EUnitaryRequired("presentation does not assert E-unitarity (flags: e_unitary ;)")


@dataclass
class EmbeddedApproximant:
    ball: CayleyBall
    vertices: list[int]                 # ball indices, in discovery order
    edges: set[tuple[int, int, int]]    # (ball index, positive letter, ball index)
    end: int                            # ball index of g
    clipped: bool
    rounds: int
    saturated: bool

    @property
    def forms(self) -> list[Word]:
        return [self.ball.forms[v] for v in self.vertices]

    def contains(self, nf: Word) -> bool:
        i = self.ball.index.get(nf)
        return i is not None and i in self._vset

    @property
    def _vset(self) -> set[int]:
        return set(self.vertices)

    def graph(self) -> XGraph:
        local = {v: i for i, v in enumerate(self.vertices)}
        return XGraph(len(self.vertices), [(local[u], x, local[v]) for u, x, v in self.edges],
                      local[0], local[self.end])


def _walk(adj: list[dict[int, int]], start: int, w: Sequence[int]) -> Optional[list[int]]:
    """Ball indices along the ``w``-path from ``start``; None if it leaves the ball."""
    path = [start]
    v = start
    for x in w:
        v = adj[v].get(x)
        if v is None:
            return None
        path.append(v)
    return path


def embedded_closure(p: Presentation, w: Sequence[int], o: GroupOracle, radius: int,
                     b: Budget = Budget()) -> EmbeddedApproximant:
    require_e_unitary(p)
    o.check_geometric()
    w = tuple(w)
    ball = o.ball(radius)
    cadj = ball.graph.adjacency()
    start = _walk(cadj, 0, w)
    if start is None:
        raise ValueError(f"the path of w leaves the ball of radius {radius}")

    vertices: list[int] = []
    vset: set[int] = set()
    out: dict[int, dict[int, int]] = {}

    def add_path(path, word):
        for v in path:
            if v not in vset:
                vset.add(v)
                vertices.append(v)
                out[v] = {}
        for i, x in enumerate(word):
            out[path[i]][x] = path[i + 1]
            out[path[i + 1]][x ^ 1] = path[i]

    add_path(start, w)
    clipped = False
    if is_special(p):
        sides = [(u or v, ()) for u, v in p.relations]
        sides = [((), r) for r, _ in sides]
    else:
        sides = []
        for u, v in p.relations:
            sides += [(u, v), (v, u)]
    done: list[set[int]] = [set() for _ in sides]
    rounds = 0
    saturated = False
    while True:
        tasks = []
        for k, (u, v) in enumerate(sides):
            for x in vertices:
                if x in done[k]:
                    continue
                q = _walk(out, x, u)  # readable inside the current graph?
                if q is not None:
                    tasks.append((k, x))
        if not tasks:
            saturated = True
            break
        if rounds >= b.max_rounds or len(vertices) >= b.max_vertices:
            break
        for k, x in tasks:
            done[k].add(x)
            path = _walk(cadj, x, sides[k][1])
            if path is None:
                clipped = True
            else:
                add_path(path, sides[k][1])
        rounds += 1
    edges = set()
    for u, nb in out.items():
        for x, v in nb.items():
            if not x & 1:
                edges.add((u, x, v))
    return EmbeddedApproximant(ball, vertices, edges, start[-1], clipped, rounds, saturated)


# ---------------------------------------------------------------- distortion

@dataclass
class DistortionRow:
    r: int
    phi_hat: int          # max approximant distance over pairs at group distance <= r
    pairs: int            # pairs at group distance exactly r
    witness: tuple[int, int]
    witness_nf: tuple[Word, Word]


@dataclass
class DistortionTable:
    rows: list[DistortionRow]
    radius: int
    budget: Budget
    clipped: bool          # some pair lay beyond the radius and was not measured
    saturated: bool
    vertex_count: int
    approximant: Approximant = field(repr=False)
    sigma: list[Word] = field(repr=False, default_factory=list)

    def phi(self, r: int) -> Optional[int]:
        best = None
        for row in self.rows:
            if row.r <= r:
                best = row.phi_hat
        return best

    def to_json(self, alphabet=None) -> str:
        fmt = alphabet.format if alphabet is not None else list
        doc = {
            "radius": self.radius,
            "budget": {"max_rounds": self.budget.max_rounds, "max_vertices": self.budget.max_vertices},
            "clipped": self.clipped,
            "saturated": self.saturated,
            "vertices": self.vertex_count,
            "rows": [{"r": row.r, "phi_hat": row.phi_hat, "pairs": row.pairs,
                      "witness": [fmt(row.witness_nf[0]), fmt(row.witness_nf[1])]} for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self, alphabet=None) -> str:
        fmt = alphabet.format if alphabet is not None else str
        head = ("r", "phi_hat", "pairs", "witness x", "witness y")
        body = [(str(row.r), str(row.phi_hat), str(row.pairs), fmt(row.witness_nf[0]), fmt(row.witness_nf[1]))
                for row in self.rows]
        widths = [max(len(c) for c in col) for col in zip(head, *body)]
        lines = ["  ".join(c.ljust(wd) for c, wd in zip(line, widths)).rstrip() for line in [head] + body]
        lines.append(f"# radius={self.radius} rounds<={self.budget.max_rounds} vertices={self.vertex_count} "
                     f"saturated={self.saturated} clipped={self.clipped}")
        return "\n".join(lines) + "\n"


def sigma_labels(g: XGraph, o: GroupOracle) -> list[Word]:
    """Group normal form of the label of any alpha -> v path, per vertex v."""
    adj = g.adjacency()
    sigma: list[Optional[Word]] = [None] * g.n
    sigma[g.alpha] = ()
    order = [g.alpha]
    for v in order:
        for x, t in adj[v].items():
            if sigma[t] is None:
                sigma[t] = o.product(sigma[v], (x,))
                order.append(t)
    if any(s is None for s in sigma):
        raise ValueError("approximant is not connected")
    return sigma  # type: ignore[return-value]


def distortion_profile(p: Presentation, w: Sequence[int], o: GroupOracle, b: Budget = Budget(),
                       radius: int = 4) -> DistortionTable:
    require_e_unitary(p)
    o.check_geometric()
    approx = approximate(p, w, b)
    g = approx.graph
    sigma = sigma_labels(g, o)
    by_form: dict[Word, list[int]] = {}
    for v, s in enumerate(sigma):
        by_form.setdefault(s, []).append(v)
    ball = o.ball(radius)
    nb = g.neighbours()
    best: dict[int, tuple[int, int, int]] = {}   # r -> (max d_S, x, y) at group distance exactly r
    counts: dict[int, int] = {}
    measured = 0
    for x in range(g.n):
        targets = []
        for h, dg in zip(ball.forms, ball.dist):
            for y in by_form.get(o.product(sigma[x], h), ()):
                targets.append((y, dg))
        measured += len(targets)
        dist = distances_from(g, x, nb)
        for y, dg in targets:
            ds = dist[y]
            counts[dg] = counts.get(dg, 0) + 1
            cur = best.get(dg)
            if cur is None or ds > cur[0] or (ds == cur[0] and (x, y) < cur[1:]):
                best[dg] = (int(ds), x, y)
    rows = []
    running: Optional[tuple[int, int, int]] = None
    for r in range(radius + 1):
        if r not in best:
            continue
        if running is None or best[r][0] > running[0]:
            running = best[r]
        ds, x, y = running
        rows.append(DistortionRow(r, ds, counts[r], (x, y), (sigma[x], sigma[y])))
    clipped = measured < g.n * g.n
    return DistortionTable(rows, radius, b, clipped, approx.saturated, g.n, approx, sigma)


def verify_row(table: DistortionTable, row: DistortionRow, o: GroupOracle) -> bool:
    """Recompute both distances for a row's witness pair."""
    g = table.approximant.graph
    x, y = row.witness
    ds = distances_from(g, x)[y]
    dg = o.length(invert(table.sigma[x]) + table.sigma[y])
    return ds == row.phi_hat and dg <= row.r and table.sigma[x] == row.witness_nf[0] \
        and table.sigma[y] == row.witness_nf[1]


# ---------------------------------------------------------------- prefix monoid

def prefix_membership(p: Presentation, g_word: Sequence[int], o: GroupOracle,
                      phi: Optional[Callable[[int], int]] = None,
                      right_unit: Optional[RightUnitTester] = None,
                      b: Budget = Budget(), radius: Optional[int] = None) -> TriBool:
    """Is the element ``g`` of the group a vertex of the Schützenberger graph of 1?"""
    if not is_special(p):
        raise ValueError("prefix monoid membership needs a special presentation")
    if not o.exact:
        raise ValueError("prefix membership needs an exact oracle")
    g_word = tuple(g_word)
    g = o.require_nf(g_word)
    if not g:
        return Confirmed
    if p.e_unitary_asserted:
        if radius is None:
            longest = max((len(u) + len(v) for u, v in p.relations), default=0)
            radius = len(g_word) + longest
        if embedded_closure(p, (), o, radius, b).contains(g):
            return Confirmed
    if phi is None:
        return Unknown
    n = phi(o.length(g_word))
    if right_unit is None:
        return Unknown
    all_refuted = True
    for w in all_words(p.rank, n):
        if o.require_nf(w) != g:
            continue
        ans = right_unit(w)
        if ans is Confirmed:
            return Confirmed
        if ans is not Refuted:
            all_refuted = False
    return Refuted if all_refuted and right_unit.total else Unknown


PHI_PRESETS: dict[str, Callable[[int], int]] = {
    "linear": lambda n: n,
    "double": lambda n: 2 * n,
    "square": lambda n: n * n,
}
