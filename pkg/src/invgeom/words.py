"""Words over X ∪ X⁻¹.

A letter is packed into a single int: ``2*g`` for the generator ``g`` and
``2*g + 1`` for its inverse, so formal inversion of a letter is ``x ^ 1``.
A word is a plain tuple of such ints; the empty tuple is the identity.
"""
from __future__ import annotations

import re
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

Word = tuple[int, ...]

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_TOKEN = re.compile(r"\s*(?:([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?)")


class Letter(NamedTuple):
    generator: int
    sign: int


def letter(generator: int, sign: int = 1) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return 2 * generator + (sign < 0)


def decode(x: int) -> Letter:
    return Letter(x >> 1, -1 if x & 1 else 1)


def inverse_letter(x: int) -> int:
    return x ^ 1


def invert(w: Sequence[int]) -> Word:
    return tuple(x ^ 1 for x in reversed(w))


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_freely_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != w[i + 1] ^ 1 for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    w = tuple(w)
    return is_freely_reduced(w) and (len(w) < 2 or w[0] != w[-1] ^ 1)


def letters(rank: int) -> range:
    """All letter codes over ``rank`` generators, positive before inverse."""
    return range(2 * rank)


def all_words(rank: int, max_length: int, min_length: int = 0) -> Iterator[Word]:
    """Every word (reduced or not) of the given lengths, shortlex order."""
    alphabet = letters(rank)
    for n in range(min_length, max_length + 1):
        yield from product(alphabet, repeat=n)


class WordSyntaxError(ValueError):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.pos = pos


class Alphabet:
    """Interned generator names and the word syntax over them.

    Words are written as generator names separated by whitespace, each
    optionally followed by ``^k`` (``^-1`` for the inverse). When every
    generator name is a single character, juxtaposition works too:
    ``"aba^-1"`` reads as ``a b a^-1``. ``"1"`` and ``""`` both denote
    the empty word.
    """

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        for name in self.names:
            if not _NAME.fullmatch(name):
                raise ValueError(f"invalid generator name {name!r}")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate generator names in {self.names}")
        self.index = {name: i for i, name in enumerate(self.names)}
        self._single_chars = all(len(n) == 1 for n in self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({' '.join(self.names)})"

    @property
    def rank(self) -> int:
        return len(self.names)

    def gen(self, name: str, sign: int = 1) -> int:
        return letter(self.index[name], sign)

    def parse(self, text: str) -> Word:
        stripped = text.strip()
        if stripped in ("", "1"):
            return ()
        out: list[int] = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos or not m.group(1):
                raise WordSyntaxError(f"unexpected character {text[pos]!r}", pos)
            name, exp = m.group(1), m.group(2)
            start = m.start(1)
            power = int(exp) if exp is not None else 1
            if name in self.index:
                gens = [self.index[name]]
            elif self._single_chars and all(ch in self.index for ch in name):
                gens = [self.index[ch] for ch in name]
            else:
                bad = name if not self._single_chars else next(ch for ch in name if ch not in self.index)
                raise WordSyntaxError(f"unknown generator {bad!r}", start)
            for g in gens[:-1]:
                out.append(letter(g))
            last = gens[-1]
            out.extend([letter(last, 1 if power > 0 else -1)] * abs(power))
            pos = m.end()
        return tuple(out)

    def format(self, w: Sequence[int]) -> str:
        if not w:
            return "1"
        parts = []
        for x in w:
            name = self.names[x >> 1]
            parts.append(name + "^-1" if x & 1 else name)
        return " ".join(parts)

    def check(self, w: Sequence[int]) -> None:
        bound = 2 * len(self.names)
        for x in w:
            if not 0 <= x < bound:
                raise ValueError(f"letter {x} outside alphabet of rank {len(self.names)}")
