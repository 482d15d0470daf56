"""Budgeted Stephen's procedure and semi-decision of the natural order.

A run starts from the folded linear graph of ``w`` and proceeds in
rounds. Each round scans every (relation side, vertex) pair against the
graph as it stood at the start of the round, then sews every missing
parallel path it found, folding as it goes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from .grouporacle import GroupOracle, RewritingOracle
from .presentation import Presentation, is_special, relators
from .tribool import Confirmed, Refuted, TriBool, Unknown
from .words import Word, invert
from .xgraph import Folder, XGraph, determinize, iso_rooted, linear_graph


@dataclass(frozen=True)
class Budget:
    max_rounds: int = 10
    max_vertices: int = 200_000

    def __post_init__(self):
        if self.max_rounds < 1 or self.max_vertices < 1:
            raise ValueError("budget limits must be at least 1")

    def doubled(self) -> "Budget":
        return Budget(2 * self.max_rounds, 2 * self.max_vertices)


@dataclass
class Approximant:
    graph: XGraph
    rounds_done: int
    saturated: bool
    source_word: Word
    limit_hit: Optional[str] = None  # "rounds", "vertices" or None
    origin: list[int] = field(default_factory=list, repr=False)  # workbench id of each vertex

    def to_dot(self, alphabet=None) -> str:
        return self.graph.to_dot(alphabet, "approximant")


class StephenRun:
    """Incremental Stephen run for one word; rounds can be resumed."""

    def __init__(self, p: Presentation, w: Sequence[int], reverse: bool = False):
        w = tuple(w)
        self.reverse = reverse  # scan relations and vertices back to front
        p.alphabet.check(w)
        self.p = p
        self.w = w
        self.folder = Folder(1)
        self.alpha = 0
        self.beta = 0
        if w:
            self.beta = self.folder.new_vertex()
            self.folder.add_path(0, w, self.beta)
        self.rounds_done = 0
        self.saturated = False
        self.limit_hit: Optional[str] = None
        self._special = is_special(p)
        if self._special:
            self._relators = relators(p)
            self._done: list[set[int]] = [set() for _ in self._relators]
        else:
            self._sides = []
            for u, v in p.relations:
                self._sides.append((u, v))
                self._sides.append((v, u))

    def scan(self) -> list[tuple[int, Word, int]]:
        """Missing parallel paths ``(start, label, end)`` in the current graph."""
        folder = self.folder
        reps = folder.representatives()
        if self.reverse:
            reps.reverse()
        tasks = []
        if self._special:
            pairs = list(zip(self._relators, self._done))
            for r, done in reversed(pairs) if self.reverse else pairs:
                for v in reps:
                    if v in done:
                        continue
                    if folder.read(v, r) == v:
                        done.add(v)
                    else:
                        tasks.append((v, r, v))
        else:
            for u, v in reversed(self._sides) if self.reverse else self._sides:
                for x in reps:
                    y = folder.read(x, u)
                    if y is not None and folder.read(x, v) != y:
                        tasks.append((x, v, y))
        return tasks

    def step(self, max_vertices: int) -> bool:
        """One round; False when saturated or the vertex limit stops it."""
        tasks = self.scan()
        if not tasks:
            self.saturated = True
            return False
        folder = self.folder
        if folder.live >= max_vertices:
            self.limit_hit = "vertices"
            return False
        for x, label, y in tasks:
            if folder.live >= max_vertices:
                self.limit_hit = "vertices"
                self.rounds_done += 1
                return False
            if folder.read(x, label) != folder.find(y):
                folder.add_path(x, label, y)
        self.rounds_done += 1
        return True

    def run(self, b: Budget, until: Optional[Callable[["StephenRun"], bool]] = None) -> "StephenRun":
        """Advance to saturation or the budget; ``until`` may stop early."""
        if until is not None and until(self):
            return self
        while not self.saturated and self.limit_hit is None:
            if self.rounds_done >= b.max_rounds:
                # one more scan so that `saturated` is accurate
                if not self.scan():
                    self.saturated = True
                else:
                    self.limit_hit = "rounds"
                break
            if not self.step(b.max_vertices):
                break
            if until is not None and until(self):
                break
        return self

    def accepts(self, u: Sequence[int]) -> bool:
        """Does ``u`` label an alpha -> beta path?"""
        return self.folder.read(self.alpha, u) == self.folder.find(self.beta)

    def approximant(self) -> Approximant:
        g, vmap = self.folder.snapshot(self.alpha, self.beta)
        origin = self.folder.representatives()
        return Approximant(g, self.rounds_done, self.saturated, self.w, self.limit_hit, origin)


def approximate(p: Presentation, w: Sequence[int], b: Budget = Budget(), reverse: bool = False) -> Approximant:
    return StephenRun(p, w, reverse).run(b).approximant()


def iter_rounds(p: Presentation, w: Sequence[int], b: Budget = Budget()) -> Iterator[tuple[Approximant, list[int]]]:
    """Yield the approximant after each round (round 0 first) with its vertex map.

    The vertex map sends every workbench id to a vertex of that round's
    graph, so composing with ``origin`` of an earlier round gives the
    round-to-round graph morphism.
    """
    run = StephenRun(p, w)
    while True:
        if not run.saturated and run.limit_hit is None:
            if not run.scan():
                run.saturated = True
            elif run.rounds_done >= b.max_rounds:
                run.limit_hit = "rounds"
        g, vmap = run.folder.snapshot(run.alpha, run.beta)
        yield Approximant(g, run.rounds_done, run.saturated, run.w, run.limit_hit,
                          run.folder.representatives()), vmap
        if run.saturated or run.limit_hit is not None:
            return
        run.step(b.max_vertices)


def test_geq(p: Presentation, u: Sequence[int], w: Sequence[int], b: Budget = Budget()) -> TriBool:
    """Semi-decide ``[u] >= [w]``: Confirmed or Unknown, never Refuted."""
    u = tuple(u)
    p.alphabet.check(u)
    run = StephenRun(p, w).run(b, until=lambda r: r.accepts(u))
    return Confirmed if run.accepts(u) else Unknown


Refuter = Callable[[Word, Word], TriBool]


def test_equal(p: Presentation, u: Sequence[int], w: Sequence[int], b: Budget = Budget(),
               oracle: Optional[GroupOracle] = None, refuter: Optional[Refuter] = None) -> TriBool:
    """Confirmed by mutual ``>=``; Refuted only via the oracle or refuter."""
    u, w = tuple(u), tuple(w)
    if oracle is not None and oracle.equal(u, w) is Refuted:
        return Refuted
    if refuter is not None and refuter(u, w) is Refuted:
        return Refuted
    if test_geq(p, u, w, b) is Confirmed and test_geq(p, w, u, b) is Confirmed:
        return Confirmed
    return Unknown


def test_right_unit(p: Presentation, w: Sequence[int], b: Budget = Budget(),
                    oracle: Optional[GroupOracle] = None, refuter: Optional[Refuter] = None) -> TriBool:
    w = tuple(w)
    return test_equal(p, w + invert(w), (), b, oracle, refuter)


def test_idempotent(p: Presentation, w: Sequence[int], b: Budget = Budget(),
                    oracle: Optional[GroupOracle] = None, refuter: Optional[Refuter] = None) -> TriBool:
    w = tuple(w)
    return test_equal(p, w + w, w, b, oracle, refuter)


for _f in (test_geq, test_equal, test_right_unit, test_idempotent):
    _f.__test__ = False  # keep pytest from collecting these when imported


def munn_graph(w: Sequence[int]) -> XGraph:
    return determinize(linear_graph(tuple(w)))[0]


def munn_equal(u: Sequence[int], w: Sequence[int]) -> TriBool:
    """Exact equality in the free inverse monoid."""
    return Confirmed if iso_rooted(munn_graph(u), munn_graph(w)) else Refuted


def munn_refuter(p: Presentation) -> Refuter:
    if p.relations:
        raise ValueError("Munn trees decide equality only for the presentation without relations")
    return munn_equal


class RightUnitTester:
    """Callable ``w -> TriBool`` deciding ``w w^-1 = 1``.

    ``total`` promises the tester never answers Unknown.
    """

    total = False

    def __call__(self, w: Sequence[int]) -> TriBool:
        raise NotImplementedError


class StephenRightUnitTester(RightUnitTester):
    def __init__(self, p: Presentation, b: Budget = Budget(), oracle: Optional[GroupOracle] = None,
                 refuter: Optional[Refuter] = None):
        self.p, self.b, self.oracle, self.refuter = p, b, oracle, refuter
        # with no relations Stephen saturates at once and Munn trees refute
        self.total = not p.relations and refuter is not None

    def __call__(self, w):
        return test_right_unit(self.p, w, self.b, self.oracle, self.refuter)


class RewritingRightUnitTester(RightUnitTester):
    """Right units via a monoid rewriting system for the inverse monoid itself.

    With a confluent terminating system every answer is exact.
    """

    def __init__(self, system: RewritingOracle):
        if system.free_reduction:
            raise ValueError("right-unit rewriting must act on monoid words, without free reduction")
        self.system = system
        self.total = system.confluent_terminating

    def __call__(self, w):
        w = tuple(w)
        nf = self.system.rewrite(w + invert(w))
        if nf is None:
            return Unknown
        if not nf:
            return Confirmed
        return Refuted if self.total else Unknown


def bicyclic_right_unit_tester() -> RewritingRightUnitTester:
    """``a a^-1 -> 1`` is confluent and terminating for the bicyclic monoid."""
    from .presentation import bicyclic

    alpha = bicyclic().alphabet
    system = RewritingOracle(alpha, [(alpha.parse("a a^-1"), ())], confluent_terminating=True, free_reduction=False)
    return RewritingRightUnitTester(system)
