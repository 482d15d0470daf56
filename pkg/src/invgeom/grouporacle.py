"""Word-problem oracles for maximal group images, and Cayley balls."""
from __future__ import annotations

import re
from itertools import groupby
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .presentation import GroupPresentation, translate
from .tribool import Confirmed, Refuted, TriBool, Unknown
from .words import Alphabet, Word, free_reduce, invert
from .xgraph import XGraph


class OracleUnknownError(RuntimeError):
    pass


class GroupOracle:
    """Base class: subclasses provide ``normal_form`` or override ``is_identity``.

    ``exact`` means a non-empty normal form proves the element is not the
    identity; inexact oracles can only confirm.
    """

    exact = True
    has_normal_form = True

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def normal_form(self, w: Sequence[int]) -> Optional[Word]:
        raise NotImplementedError

    def is_identity(self, w: Sequence[int]) -> TriBool:
        nf = self.normal_form(w)
        if nf is None:
            return Unknown
        if not nf:
            return Confirmed
        return Refuted if self.exact else Unknown

    def equal(self, u: Sequence[int], v: Sequence[int]) -> TriBool:
        return self.is_identity(tuple(u) + invert(v))

    def require_nf(self, w: Sequence[int]) -> Word:
        nf = self.normal_form(w)
        if nf is None:
            raise OracleUnknownError(f"oracle gave no normal form for {self.alphabet.format(w)}")
        return nf

    def product(self, g: Word, w: Sequence[int]) -> Word:
        """Normal form of ``g * w`` for a normal form ``g``."""
        return self.require_nf(g + tuple(w))

    def ball(self, r: int) -> "CayleyBall":
        """Cached Cayley ball of radius ``r``."""
        cache = self.__dict__.setdefault("_balls", {})
        if r not in cache:
            cache[r] = cayley_ball(self, r)
        return cache[r]

    def length(self, w: Sequence[int]) -> int:
        """Word length of the element represented by ``w``."""
        nf = self.require_nf(w)
        r = min(len(nf), len(w))
        i = self.ball(r).index.get(nf)
        assert i is not None, "element must lie in the ball of radius |w|"
        return self.ball(r).dist[i]

    def check_geometric(self) -> None:
        if not (self.has_normal_form and self.exact):
            raise ValueError(f"{type(self).__name__} has no exact normal forms; geometry needs them")


class FreeGroupOracle(GroupOracle):
    def normal_form(self, w):
        return free_reduce(w)

    def product(self, g, w):
        return free_reduce(g + tuple(w))

    def __repr__(self):
        return f"FreeGroupOracle({' '.join(self.alphabet.names)})"


def free_group_oracle(rank_or_names) -> FreeGroupOracle:
    if isinstance(rank_or_names, int):
        if rank_or_names < 0:
            raise ValueError("rank must be non-negative")
        names = [chr(ord("a") + i) for i in range(rank_or_names)] if rank_or_names <= 26 else \
            [f"x{i}" for i in range(rank_or_names)]
    else:
        names = list(rank_or_names)
    return FreeGroupOracle(Alphabet(names))


class IdentityOracle(GroupOracle):
    """Wraps a bare identity test; usable for refutation, not for geometry."""

    has_normal_form = False

    def __init__(self, alphabet: Alphabet, test: Callable[[Word], TriBool]):
        super().__init__(alphabet)
        self._test = test

    def normal_form(self, w):
        raise ValueError("identity-only oracle has no normal forms")

    def is_identity(self, w):
        return self._test(tuple(w))


class FreeProductOracle(GroupOracle):
    def __init__(self, first: GroupOracle, second: GroupOracle):
        overlap = set(first.alphabet.names) & set(second.alphabet.names)
        if overlap:
            raise ValueError(f"free product factors share generators {sorted(overlap)}")
        for o in (first, second):
            if not o.has_normal_form:
                raise ValueError("free product factors need normal forms")
        super().__init__(Alphabet(first.alphabet.names + second.alphabet.names))
        self.factors = (first, second)
        self.exact = first.exact and second.exact
        self._split = 2 * len(first.alphabet)

    def blocks(self, w: Sequence[int]) -> list[tuple[int, Word]]:
        """Maximal single-factor blocks, in factor-local letter codes."""
        out: list[tuple[int, list[int]]] = []
        for x in w:
            f = 0 if x < self._split else 1
            local = x if f == 0 else x - self._split
            if out and out[-1][0] == f:
                out[-1][1].append(local)
            else:
                out.append((f, [local]))
        return [(f, tuple(b)) for f, b in out]

    def reduce_blocks(self, blocks: list[tuple[int, Word]]) -> Optional[list[tuple[int, Word]]]:
        while True:
            changed = False
            new: list[tuple[int, Word]] = []
            for f, b in blocks:
                nf = self.factors[f].normal_form(b)
                if nf is None:
                    return None
                if not nf:
                    changed = True
                    continue
                if new and new[-1][0] == f:
                    new[-1] = (f, new[-1][1] + nf)
                    changed = True
                else:
                    new.append((f, nf))
            blocks = new
            if not changed:
                return blocks

    def globalize(self, f: int, b: Word) -> Word:
        return b if f == 0 else tuple(x + self._split for x in b)

    def normal_form(self, w):
        blocks = self.reduce_blocks(self.blocks(w))
        if blocks is None:
            return None
        out: list[int] = []
        for f, b in blocks:
            out.extend(self.globalize(f, b))
        return tuple(out)


def free_product_oracle(o1: GroupOracle, o2: GroupOracle) -> FreeProductOracle:
    return FreeProductOracle(o1, o2)


class RewritingOracle(GroupOracle):
    """Leftmost application of caller-supplied rules, with free reduction.

    Refuted answers are only given when the caller asserts the system is
    confluent and terminating; otherwise a non-empty fixpoint is Unknown.
    With ``free_reduction=False`` the rules act on plain monoid words.
    """

    def __init__(self, alphabet: Alphabet, rules: Iterable[tuple[Word, Word]], step_budget: int = 10_000,
                 confluent_terminating: bool = False, free_reduction: bool = True):
        super().__init__(alphabet)
        self.rules = [(tuple(l), tuple(r)) for l, r in rules]
        for l, r in self.rules:
            if not l:
                raise ValueError("rule with empty left-hand side")
            alphabet.check(l)
            alphabet.check(r)
        self.step_budget = step_budget
        self.confluent_terminating = confluent_terminating
        self.exact = confluent_terminating
        self.has_normal_form = confluent_terminating
        self.free_reduction = free_reduction
        self._by_first: dict[int, list[tuple[Word, Word]]] = {}
        for l, r in self.rules:
            self._by_first.setdefault(l[0], []).append((l, r))

    def rewrite(self, w: Sequence[int]) -> Optional[Word]:
        """The fixpoint reached within the step budget, or None."""
        w = free_reduce(w) if self.free_reduction else tuple(w)
        steps = 0
        while True:
            hit = None
            for i, x in enumerate(w):
                for l, r in self._by_first.get(x, ()):
                    if w[i:i + len(l)] == l:
                        hit = (i, l, r)
                        break
                if hit:
                    break
            if hit is None:
                return w
            steps += 1
            if steps > self.step_budget:
                return None
            i, l, r = hit
            w = w[:i] + r + w[i + len(l):]
            if self.free_reduction:
                w = free_reduce(w)

    def normal_form(self, w):
        return self.rewrite(w)

    def is_identity(self, w):
        nf = self.rewrite(w)
        if nf is None:
            return Unknown
        if not nf:
            return Confirmed
        return Refuted if self.confluent_terminating else Unknown


def rewriting_oracle(alphabet: Alphabet, rules, step_budget: int = 10_000,
                     confluent_terminating: bool = False, free_reduction: bool = True) -> RewritingOracle:
    return RewritingOracle(alphabet, rules, step_budget, confluent_terminating, free_reduction)


_RULE = re.compile(r"^\s*rule\s*:(.*)->(.*);\s*$")


def parse_rules(text: str, alphabet: Optional[Alphabet] = None) -> tuple[Alphabet, list[tuple[Word, Word]], bool]:
    """Parse a rules file: ``gens: ...;``, ``rule: lhs -> rhs ;`` and ``confluent_terminating`` lines."""
    rules_text: list[tuple[int, str, str]] = []
    confluent = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "confluent_terminating":
            confluent = True
        elif line.startswith("gens"):
            body = line.split(":", 1)[1].rstrip(";")
            alphabet = Alphabet(body.split())
        else:
            m = _RULE.match(line)
            if not m:
                raise ValueError(f"line {lineno}: cannot parse {raw.strip()!r}")
            rules_text.append((lineno, m.group(1), m.group(2)))
    if alphabet is None:
        raise ValueError("rules file needs a 'gens:' line or a caller-supplied alphabet")
    rules = []
    for lineno, l, r in rules_text:
        try:
            rules.append((alphabet.parse(l), alphabet.parse(r)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return alphabet, rules, confluent


def format_rules(alphabet: Alphabet, rules, confluent: bool) -> str:
    lines = [f"gens: {' '.join(alphabet.names)} ;"]
    lines += [f"rule: {alphabet.format(l)} -> {alphabet.format(r)} ;" for l, r in rules]
    if confluent:
        lines.append("confluent_terminating")
    return "\n".join(lines) + "\n"


def bs_reduction_rules(n: int, alphabet: Alphabet = Alphabet("ab")) -> list[tuple[Word, Word]]:
    """``a^-1 b -> b a^-n`` and ``b^-1 a -> a^n b^-1``.

    These bring every word to the shape u v^-1 with u, v positive, but
    do not give unique normal forms.
    """
    a, b = alphabet.gen("a"), alphabet.gen("b")
    return [((a ^ 1, b), (b,) + (a ^ 1,) * n), ((b ^ 1, a), (a,) * n + (b ^ 1,))]


class BSOracle(GroupOracle):
    """Exact oracle for ``Gp<a, b | a b a^-n b^-1>`` via its affine action.

    ``a`` is x -> x + 1 and ``b`` is x -> x / n; an element is the pair
    (k, q) for x -> n^-k x + q. The normal form is ``b^i a^m b^-j`` with
    i >= 0 least possible.
    """

    def __init__(self, n: int, alphabet: Alphabet = Alphabet("ab")):
        if n < 1:
            raise ValueError("n must be at least 1")
        super().__init__(alphabet)
        self.n = n
        self._a = alphabet.gen("a")
        self._b = alphabet.gen("b")

    def evaluate(self, w: Sequence[int]) -> tuple[int, Fraction]:
        k, q = 0, Fraction(0)
        a = self._a
        for x, run in groupby(w):
            m = sum(1 for _ in run)
            if x == a:
                q += Fraction(m) / self.n ** k if k >= 0 else m * self.n ** -k
            elif x == a ^ 1:
                q -= Fraction(m) / self.n ** k if k >= 0 else m * self.n ** -k
            elif x & 1:
                k -= m
            else:
                k += m
        return k, q

    def word_of(self, k: int, q: Fraction) -> Word:
        n = self.n
        i = max(0, k)
        if n > 1:
            while (q * n ** i).denominator != 1:
                i += 1
        m = q * n ** i
        assert m.denominator == 1
        m = int(m)
        j = i - k
        a = self._a if m >= 0 else self._a ^ 1
        return (self._b,) * i + (a,) * abs(m) + (self._b ^ 1,) * j

    def normal_form(self, w):
        return self.word_of(*self.evaluate(w))


def bs_oracle(n: int, alphabet: Alphabet = Alphabet("ab")) -> BSOracle:
    return BSOracle(n, alphabet)


class SubstitutionOracle(GroupOracle):
    """A group presented on ``alphabet`` identified with a group with exact oracle ``base``.

    ``images`` sends each generator to a word over the base alphabet and
    ``preimages`` sends each base generator back, so that normal forms are
    words over ``alphabet``.
    """

    def __init__(self, alphabet: Alphabet, base: GroupOracle,
                 images: Mapping[str, Word], preimages: Mapping[str, Word]):
        super().__init__(alphabet)
        self.base = base
        self.exact = base.exact
        self.has_normal_form = base.has_normal_form
        self._img = []
        for name in alphabet.names:
            img = tuple(images[name])
            base.alphabet.check(img)
            self._img.append(img)
        self._pre = []
        for name in base.alphabet.names:
            pre = tuple(preimages[name])
            alphabet.check(pre)
            self._pre.append(pre)

    def to_base(self, w: Sequence[int]) -> Word:
        out: list[int] = []
        for x in w:
            img = self._img[x >> 1]
            out.extend(invert(img) if x & 1 else img)
        return tuple(out)

    def from_base(self, w: Sequence[int]) -> Word:
        out: list[int] = []
        for x in w:
            pre = self._pre[x >> 1]
            out.extend(invert(pre) if x & 1 else pre)
        return tuple(out)

    def normal_form(self, w):
        nf = self.base.normal_form(self.to_base(w))
        return None if nf is None else self.from_base(nf)

    def is_identity(self, w):
        return self.base.is_identity(self.to_base(w))


def scary_oracle() -> SubstitutionOracle:
    """Gp<a,b,c,d | bcb^-1ad^-1a^-1> identified with FG(a, b, u), u = bcb^-1."""
    pres = Alphabet("abcd")
    base = Alphabet("abu")
    images = {"a": base.parse("a"), "b": base.parse("b"),
              "c": base.parse("b^-1 u b"), "d": base.parse("a^-1 u a")}
    preimages = {"a": pres.parse("a"), "b": pres.parse("b"), "u": pres.parse("b c b^-1")}
    return SubstitutionOracle(pres, FreeGroupOracle(base), images, preimages)


def eliminate_generator_oracle(g: GroupPresentation) -> Optional[SubstitutionOracle]:
    """Free-group oracle for a one-relator group whose reduced relator uses some generator once.

    Returns None when the presentation is not of that shape.
    """
    rels = [free_reduce(r) for r in g.relators]
    rels = [r for r in rels if r]
    if len(rels) != 1:
        return None
    r = rels[0]
    counts: dict[int, int] = {}
    for x in r:
        counts[x >> 1] = counts.get(x >> 1, 0) + 1
    once = [gen for gen in range(len(g.generators)) if counts.get(gen) == 1]
    if not once:
        return None
    gen = once[0]
    i = next(i for i, x in enumerate(r) if x >> 1 == gen)
    before, after = r[:i], r[i + 1:]
    # before . c^e . after = 1  =>  c^e = before^-1 after^-1
    value = free_reduce(invert(before) + invert(after))
    if r[i] & 1:
        value = invert(value)
    rest = [name for k, name in enumerate(g.generators) if k != gen]
    base_alpha = Alphabet(rest)
    images = {name: (base_alpha.gen(name),) for name in rest}
    images[g.generators[gen]] = translate(value, g.alphabet, base_alpha)
    preimages = {name: (g.alphabet.gen(name),) for name in rest}
    return SubstitutionOracle(g.alphabet, FreeGroupOracle(base_alpha), images, preimages)


@dataclass
class CayleyBall:
    """The induced subgraph of the Cayley graph on the ball of radius r about 1."""

    oracle: GroupOracle
    radius: int
    forms: list[Word]
    index: dict[Word, int]
    dist: list[int]
    graph: XGraph

    def __len__(self) -> int:
        return len(self.forms)

    def length(self, w: Sequence[int]) -> Optional[int]:
        """Word length of the element, or None if it lies outside the ball."""
        i = self.index.get(self.oracle.require_nf(w))
        return None if i is None else self.dist[i]

    def distance(self, g: Word, h: Word) -> Optional[int]:
        return self.length(invert(g) + tuple(h))

    def contains(self, nf: Word) -> bool:
        return nf in self.index


def cayley_ball(o: GroupOracle, r: int) -> CayleyBall:
    o.check_geometric()
    rank = len(o.alphabet)
    forms: list[Word] = [()]
    index: dict[Word, int] = {(): 0}
    dist = [0]
    frontier = [0]
    edges: set[tuple[int, int, int]] = set()
    for d in range(1, r + 1):
        nxt = []
        for v in frontier:
            g = forms[v]
            for x in range(2 * rank):
                h = o.product(g, (x,))
                t = index.get(h)
                if t is None:
                    t = len(forms)
                    forms.append(h)
                    index[h] = t
                    dist.append(d)
                    nxt.append(t)
                edges.add((v, x, t))
        frontier = nxt
    for v in frontier:
        g = forms[v]
        for x in range(2 * rank):
            t = index.get(o.product(g, (x,)))
            if t is not None:
                edges.add((v, x, t))
    return CayleyBall(o, r, forms, index, dist, XGraph(len(forms), edges, 0, 0))
