"""Inverse monoid presentations, their text format, and the named fixtures.

File format::

    gens: a b c ;
    rels: a b a^-1 b^-1 = 1 , a a^-1 = 1 ;
    flags: e_unitary ;

``#`` starts a comment running to the end of the line.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .words import Alphabet, Word, WordSyntaxError, free_reduce, invert, is_cyclically_reduced

log = logging.getLogger(__name__)

Relation = tuple[Word, Word]
WordLike = Union[str, Sequence[int]]

_CLAUSE = re.compile(r"([A-Za-z_]+)\s*:")


class PresentationSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relations: tuple[Relation, ...] = ()
    e_unitary_asserted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relations", tuple((tuple(u), tuple(v)) for u, v in self.relations))
        alphabet = Alphabet(self.generators)
        for u, v in self.relations:
            alphabet.check(u)
            alphabet.check(v)

    @cached_property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.generators)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def word(self, text: str) -> Word:
        return self.alphabet.parse(text)

    def format(self) -> str:
        return format_presentation(self)


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(tuple(r) for r in self.relators))
        alphabet = Alphabet(self.generators)
        for r in self.relators:
            alphabet.check(r)

    @cached_property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.generators)


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _blank_comments(text: str) -> str:
    return re.sub(r"#[^\n]*", lambda m: " " * len(m.group(0)), text)


def parse(text: str) -> Presentation:
    src = _blank_comments(text)
    pos = 0
    n = len(src)
    generators: Optional[list[str]] = None
    relations: list[Relation] = []
    flags: set[str] = set()

    def fail(msg: str, at: int):
        raise PresentationSyntaxError(msg, *_line_col(text, at))

    while True:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _CLAUSE.match(src, pos)
        if not m:
            fail(f"expected 'gens:', 'rels:' or 'flags:', found {src[pos]!r}", pos)
        keyword = m.group(1)
        body_start = m.end()
        end = src.find(";", body_start)
        if end < 0:
            fail(f"missing ';' after '{keyword}:' clause", n)
        body = src[body_start:end]
        if keyword == "gens":
            if generators is not None:
                fail("duplicate 'gens:' clause", pos)
            generators = body.split()
            try:
                Alphabet(generators)
            except ValueError as exc:
                fail(str(exc), body_start)
        elif keyword == "rels":
            if generators is None:
                fail("'rels:' before 'gens:'", pos)
            alphabet = Alphabet(generators)
            offset = body_start
            for chunk in body.split(","):
                if chunk.strip():
                    relations.append(_parse_relation(text, alphabet, chunk, offset))
                offset += len(chunk) + 1
        elif keyword == "flags":
            for flag in body.split():
                if flag != "e_unitary":
                    fail(f"unknown flag {flag!r}", body_start + body.find(flag))
                flags.add(flag)
        else:
            fail(f"unknown clause {keyword!r}", pos)
        pos = end + 1
    if generators is None:
        fail("missing 'gens:' clause", 0)
    return Presentation(tuple(generators), tuple(relations), "e_unitary" in flags)


def _parse_relation(text: str, alphabet: Alphabet, chunk: str, offset: int) -> Relation:
    if chunk.count("=") != 1:
        raise PresentationSyntaxError("relation must have exactly one '='", *_line_col(text, offset))
    split = chunk.index("=")
    sides = []
    for part, start in ((chunk[:split], offset), (chunk[split + 1:], offset + split + 1)):
        try:
            sides.append(alphabet.parse(part))
        except WordSyntaxError as exc:
            raise PresentationSyntaxError(str(exc), *_line_col(text, start + exc.pos)) from None
    return sides[0], sides[1]


def format_presentation(p: Presentation) -> str:
    a = p.alphabet
    lines = [f"gens: {' '.join(p.generators)} ;"]
    if p.relations:
        rels = " , ".join(f"{a.format(u)} = {a.format(v)}" for u, v in p.relations)
        lines.append(f"rels: {rels} ;")
    if p.e_unitary_asserted:
        lines.append("flags: e_unitary ;")
    return "\n".join(lines) + "\n"


def load(path) -> Presentation:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def is_special(p: Presentation) -> bool:
    return all(not u or not v for u, v in p.relations)


def relators(p: Presentation) -> list[Word]:
    """The relator ``w`` of each relation of a special presentation."""
    if not is_special(p):
        raise ValueError("presentation is not special")
    return [u or v for u, v in p.relations]


def group_image(p: Presentation) -> GroupPresentation:
    return GroupPresentation(p.generators, tuple(u + invert(v) for u, v in p.relations))


def split_generators(p: Presentation) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Generators occurring in some relation, and the rest (both in order)."""
    used = set()
    for u, v in p.relations:
        used.update(x >> 1 for x in u)
        used.update(x >> 1 for x in v)
    z = tuple(g for i, g in enumerate(p.generators) if i in used)
    y = tuple(g for i, g in enumerate(p.generators) if i not in used)
    return z, y


def translate(w: Sequence[int], src: Alphabet, dst: Alphabet) -> Word:
    """Re-index a word between alphabets sharing generator names."""
    return tuple(2 * dst.index[src.names[x >> 1]] + (x & 1) for x in w)


def fragment(p: Presentation, names: Iterable[str]) -> Presentation:
    """The presentation on ``names`` carrying every relation of ``p``."""
    names = tuple(names)
    dst = Alphabet(names)
    rels = []
    for u, v in p.relations:
        try:
            rels.append((translate(u, p.alphabet, dst), translate(v, p.alphabet, dst)))
        except KeyError as exc:
            raise ValueError(f"relation uses generator {exc.args[0]} outside the fragment") from None
    return Presentation(names, tuple(rels), p.e_unitary_asserted)


def cyclically_reduced_hint(p: Presentation) -> bool:
    """True when ``p`` is special with one cyclically reduced relator.

    That is a known sufficient condition for E-unitarity; it is only a
    hint, and a presentation asserting E-unitarity without it gets a
    warning, not an error.
    """
    hint = is_special(p) and len(p.relations) == 1 and is_cyclically_reduced(relators(p)[0])
    if p.e_unitary_asserted and not hint:
        log.warning("E-unitarity asserted without the one-relator cyclically reduced hint")
    return hint


def _as_word(alphabet: Alphabet, w: WordLike) -> Word:
    if isinstance(w, str):
        return alphabet.parse(w)
    w = tuple(w)
    alphabet.check(w)
    return w


def fixture_onerelator_scary() -> Presentation:
    a = Alphabet("abcd")
    r = a.parse("b c b^-1 a d^-1 a^-1 c^-1 c d^-1 d")
    return Presentation(a.names, ((r, ()),), e_unitary_asserted=True)


def fixture_bs(n: int) -> Presentation:
    if n < 1:
        raise ValueError("n must be at least 1")
    a = Alphabet("ab")
    r = a.parse(f"a b a^-{n} b^-1")
    return Presentation(a.names, ((r, ()),), e_unitary_asserted=True)


def gray_idempotent(rank: int, t: int, s_words: Sequence[Word]) -> Word:
    """The word e built from the x-letters, the s-words and the letter ``t``."""
    t_pos, t_neg = 2 * t, 2 * t + 1
    e: list[int] = []
    for i in range(rank):
        e += [2 * i, 2 * i + 1]
    for s in s_words:
        conj = (t_pos,) + tuple(s) + (t_neg,)
        e += conj + invert(conj)
    for i in range(rank):
        e += [2 * i + 1, 2 * i]
    return tuple(e)


def fixture_gray(
    x_names: Sequence[str],
    group_relators: Sequence[WordLike],
    s_words: Sequence[WordLike],
    t_name: str = "t",
) -> Presentation:
    x_names = tuple(x_names)
    if t_name in x_names:
        raise ValueError(f"letter {t_name!r} may not be one of the x generators")
    xa = Alphabet(x_names)
    try:
        rs = [_as_word(xa, r) for r in group_relators]
        ss = [_as_word(xa, s) for s in s_words]
    except (WordSyntaxError, ValueError) as exc:
        raise ValueError(f"relators and s-words must be over the x generators: {exc}") from None
    e = gray_idempotent(len(x_names), len(x_names), ss)
    first = rs[0] if rs else ()
    rels = [(e + first, ())] + [(r, ()) for r in rs[1:]]
    return Presentation(x_names + (t_name,), tuple(rels), e_unitary_asserted=True)


def fixture_clifford(
    g_pres: GroupPresentation,
    h_pres: GroupPresentation,
    embedding: Mapping[str, str],
    e_name: str = "e",
) -> Presentation:
    """Clifford monoid glueing H' onto G along ``embedding`` (x' -> x).

    Generators are X' then Y then ``e``; the relations come in the order
    x'x'^-1 = 1, x'^-1 x' = 1; ee = e; ex' = x, x'e = x; yy^-1 = e,
    y^-1 y = e; u_i u_i = u_i; w_i w_i = w_i.
    """
    xs = tuple(h_pres.generators)
    ys = tuple(g_pres.generators)
    names = xs + ys + (e_name,)
    if len(set(names)) != len(names):
        raise ValueError(f"generator name clash among {names}")
    for xp in xs:
        if embedding.get(xp) not in ys:
            raise ValueError(f"{xp!r} must map to a generator of G")
    a = Alphabet(names)
    e = (a.gen(e_name),)
    rels: list[Relation] = []
    for xp in xs:
        g = a.gen(xp)
        rels.append(((g, g ^ 1), ()))
        rels.append(((g ^ 1, g), ()))
    rels.append((e + e, e))
    for xp in xs:
        g = a.gen(xp)
        x = (a.gen(embedding[xp]),)
        rels.append((e + (g,), x))
        rels.append(((g,) + e, x))
    for y in ys:
        g = a.gen(y)
        rels.append(((g, g ^ 1), e))
        rels.append(((g ^ 1, g), e))
    for u in h_pres.relators:
        u = translate(u, h_pres.alphabet, a)
        rels.append((u + u, u))
    for w in g_pres.relators:
        w = translate(w, g_pres.alphabet, a)
        rels.append((w + w, w))
    return Presentation(names, tuple(rels))


def bicyclic() -> Presentation:
    a = Alphabet("a")
    return Presentation(a.names, ((a.parse("a a^-1"), ()),), e_unitary_asserted=True)


def free_inverse_monoid(rank: int) -> Presentation:
    names = "abcdefghijklmnopqrstuvwxyz"[:rank] if rank <= 26 else [f"x{i}" for i in range(rank)]
    return Presentation(tuple(names), (), e_unitary_asserted=True)


def freely_trivial(p: Presentation) -> bool:
    """True when every relation of ``p`` holds in the free group."""
    return all(not free_reduce(r) for r in group_image(p).relators)
