"""Finite extended metric spaces and Property-A witnesses.

A witness assigns to each point x a probability vector ``xi[x]`` on the
points, supported in the ball B(x, S), whose l1 variation is at most eps
between points at distance <= R. Weak contractions that are boundedly
many-to-one on each component pull witnesses back, with support radius
S' = k c R where c is the largest S-ball of the target.

Weights may be floats or ``Fraction``; with fractions every identity
is checked exactly.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping, Optional, Sequence, Union

INF = math.inf
Number = Union[int, float, Fraction]


def ext_add(a: Number, b: Number) -> Number:
    """Addition on [0, inf]."""
    return INF if a == INF or b == INF else a + b


class MetricError(ValueError):
    pass


class FinExtMetric:
    """Extended metric on points ``0 .. n-1``; ``math.inf`` separates components."""

    def __init__(self, d: Sequence[Sequence[Optional[Number]]], check: bool = True):
        self.d = [[INF if v is None else v for v in row] for row in d]
        self.n = len(self.d)
        if check:
            self.validate()
        self._comp = self._components()

    def validate(self) -> None:
        d, n = self.d, self.n
        for x in range(n):
            if len(d[x]) != n:
                raise MetricError(f"row {x} has length {len(d[x])}, expected {n}")
            if d[x][x] != 0:
                raise MetricError(f"d({x},{x}) = {d[x][x]} is not 0")
            for y in range(n):
                v = d[x][y]
                if not isinstance(v, Real) or v != v:
                    raise MetricError(f"d({x},{y}) = {v!r} is not a number")
                if v < 0:
                    raise MetricError(f"d({x},{y}) is negative")
                if v != d[y][x]:
                    raise MetricError(f"d({x},{y}) != d({y},{x})")
                if x != y and v == 0:
                    raise MetricError(f"distinct points {x}, {y} at distance 0")
        for x in range(n):
            for y in range(n):
                if d[x][y] == INF:
                    continue
                for z in range(n):
                    if d[x][z] > ext_add(d[x][y], d[y][z]):
                        raise MetricError(f"triangle inequality fails for ({x}, {y}, {z})")

    def _components(self) -> list[int]:
        comp = [-1] * self.n
        c = 0
        for x in range(self.n):
            if comp[x] < 0:
                for y in range(self.n):
                    if self.d[x][y] != INF:
                        comp[y] = c
                c += 1
        return comp

    def __len__(self) -> int:
        return self.n

    def component(self, x: int) -> int:
        return self._comp[x]

    def components(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for x, c in enumerate(self._comp):
            out.setdefault(c, []).append(x)
        return list(out.values())

    def ball(self, x: int, r: Number) -> list[int]:
        return [y for y in range(self.n) if self.d[x][y] <= r]

    def min_positive(self) -> Number:
        vals = [v for row in self.d for v in row if 0 < v < INF]
        return min(vals) if vals else INF

    def to_json(self) -> str:
        rows = [[None if v == INF else _num_out(v) for v in row] for row in self.d]
        return json.dumps({"points": self.n, "distance": rows}, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FinExtMetric":
        doc = json.loads(text)
        rows = doc["distance"] if isinstance(doc, dict) else doc
        return cls([[None if v is None else _num_in(v) for v in row] for row in rows])


def _num_out(v: Number):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def _num_in(v) -> Number:
    return Fraction(v) if isinstance(v, str) else v


@dataclass
class Witness:
    xi: list[dict[int, Number]]
    eps: Number
    R: Number
    S: Number

    def to_json(self) -> str:
        doc = {"eps": _num_out(self.eps), "R": _num_out(self.R), "S": _num_out(self.S),
               "xi": {str(x): {str(q): _num_out(v) for q, v in sorted(vec.items())}
                      for x, vec in enumerate(self.xi)}}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Witness":
        doc = json.loads(text)
        xi_doc = doc["xi"]
        n = len(xi_doc)
        xi = [{int(q): _num_in(v) for q, v in xi_doc[str(x)].items()} for x in range(n)]
        return cls(xi, _num_in(doc["eps"]), _num_in(doc["R"]), _num_in(doc["S"]))


def l1(u: Mapping[int, Number], v: Mapping[int, Number]) -> Number:
    return sum(abs(u.get(q, 0) - v.get(q, 0)) for q in set(u) | set(v))


@dataclass
class WitnessReport:
    violations: list[tuple] = field(default_factory=list)
    max_norm_error: Number = 0
    max_variation: Number = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return f"ok (norm error {float(self.max_norm_error):.3g}, max variation {float(self.max_variation):.6g})"
        return "\n".join(" ".join(str(part) for part in v) for v in self.violations)


def check_witness(space: FinExtMetric, w: Witness, tol: float = 1e-9) -> WitnessReport:
    """Every violation of the four witness conditions, with the offending point or pair."""
    rep = WitnessReport()
    if len(w.xi) != space.n:
        rep.violations.append(("size", len(w.xi), space.n))
        return rep
    for x, vec in enumerate(w.xi):
        for q, v in vec.items():
            if not 0 <= q < space.n:
                rep.violations.append(("support-point", x, q))
                continue
            if v < 0:
                rep.violations.append(("negative", x, q, v))
            if v != 0 and space.d[x][q] > w.S:
                rep.violations.append(("support", x, q, space.d[x][q]))
        err = abs(sum(vec.values()) - 1)
        rep.max_norm_error = max(rep.max_norm_error, err)
        if err > tol:
            rep.violations.append(("norm", x, sum(vec.values())))
    for x in range(space.n):
        for y in range(x + 1, space.n):
            if space.d[x][y] <= w.R:
                var = l1(w.xi[x], w.xi[y])
                rep.max_variation = max(rep.max_variation, var)
                if var > w.eps + tol:
                    rep.violations.append(("variation", x, y, var))
    return rep


class ContractionError(ValueError):
    def __init__(self, x: int, z: int, dx, dy):
        super().__init__(f"map is not a weak contraction: d_X({x},{z}) = {dx} < d_Y = {dy}")
        self.pair = (x, z)


@dataclass
class ContractionMap:
    X: FinExtMetric
    Y: FinExtMetric
    f: list[int]
    k: int


def analyze_contraction(X: FinExtMetric, Y: FinExtMetric, f: Sequence[int]) -> ContractionMap:
    f = list(f)
    if len(f) != X.n or any(not 0 <= y < Y.n for y in f):
        raise ValueError("map must send each point of X to a point of Y")
    for x in range(X.n):
        for z in range(x + 1, X.n):
            if Y.d[f[x]][f[z]] > X.d[x][z]:
                raise ContractionError(x, z, X.d[x][z], Y.d[f[x]][f[z]])
    fibres: dict[tuple[int, int], int] = {}
    for x, y in enumerate(f):
        key = (X.component(x), y)
        fibres[key] = fibres.get(key, 0) + 1
    return ContractionMap(X, Y, f, max(fibres.values(), default=0))


@dataclass
class ClassInfo:
    p: int
    members: list[int]
    diameter: Number
    bound: Number   # |C_p within the component| * R


@dataclass
class Transport:
    witness: Witness
    c: int
    classes: list[ClassInfo]
    h: list[dict[int, int]]   # h[p][x] for x in C_p


def _classes(X: FinExtMetric, members: list[int], R: Number) -> dict[int, int]:
    """Least index of the class of each member under the chain relation at scale R."""
    parent = {x: x for x in members}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, x in enumerate(members):
        for z in members[i + 1:]:
            if X.d[x][z] <= R:
                a, b = find(x), find(z)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    return {x: find(x) for x in members}


def transport(cm: ContractionMap, wY: Witness, exact: bool = False, tol: float = 1e-9) -> Transport:
    """Pull ``wY`` back along ``cm``; keeps the class data for inspection."""
    X, Y, f = cm.X, cm.Y, cm.f
    report = check_witness(Y, wY, tol)
    if not report.ok:
        raise ValueError("witness on Y fails its own check:\n" + report.summary())
    num = Fraction if exact else float
    xi = [{q: num(v) for q, v in vec.items()} for vec in wY.xi]
    R, S = wY.R, wY.S
    c = max((len(Y.ball(y, S)) for y in range(Y.n)), default=0)
    s_prime = cm.k * c * R
    h: list[dict[int, int]] = []
    classes: list[ClassInfo] = []
    for p in range(Y.n):
        near = set(Y.ball(p, S))
        cp = [x for x in range(X.n) if f[x] in near]
        hp = _classes(X, cp, R)
        h.append(hp)
        groups: dict[int, list[int]] = {}
        for x, rep in hp.items():
            groups.setdefault(rep, []).append(x)
        for rep, members in groups.items():
            diam = max(X.d[a][b] for a in members for b in members)
            same_comp = sum(1 for x in cp if X.component(x) == X.component(rep))
            classes.append(ClassInfo(p, members, diam, same_comp * R))
    zeta: list[dict[int, Number]] = []
    for x in range(X.n):
        vec: dict[int, Number] = {}
        for p, weight in xi[f[x]].items():
            q = h[p][x]
            if X.d[x][q] <= s_prime:
                vec[q] = vec.get(q, 0) + weight
        zeta.append(vec)
    return Transport(Witness(zeta, wY.eps, R, s_prime), c, classes, h)


def transport_witness(cm: ContractionMap, wY: Witness, exact: bool = False) -> Witness:
    return transport(cm, wY, exact).witness


# ---------------------------------------------------------------- random instances

def _random_metric(rng: random.Random, comps: list[list[int]], n: int, max_d: int) -> list[list[Number]]:
    """Integer metric with values <= max_d on each component, inf across."""
    d: list[list[Number]] = [[INF] * n for _ in range(n)]
    for comp in comps:
        if len(comp) > max_d + 1 or rng.random() < 0.5:
            lo = rng.randint(1, max_d // 2)
            for i, x in enumerate(comp):
                d[x][x] = 0
                for z in comp[i + 1:]:
                    d[x][z] = d[z][x] = rng.randint(lo, 2 * lo)
        else:
            pos = rng.sample(range(max_d + 1), len(comp))
            for x, px in zip(comp, pos):
                for z, pz in zip(comp, pos):
                    d[x][z] = abs(px - pz)
    return d


def _split(rng: random.Random, points: list[int], parts: int) -> list[list[int]]:
    rng.shuffle(points)
    cuts = sorted(rng.sample(range(1, len(points)), min(parts, len(points)) - 1)) if len(points) > 1 else []
    out, prev = [], 0
    for c in cuts + [len(points)]:
        out.append(sorted(points[prev:c]))
        prev = c
    return [c for c in out if c]


def random_instance(rng: random.Random, max_y: int = 12, max_x: int = 30, max_k: int = 3, max_d: int = 10,
                    exact: bool = False):
    """A weak contraction X -> Y with a valid witness on Y.

    Returns ``(X, Y, f, wY)``. Distances are integers <= ``max_d``;
    d_X is the pointwise max of d_Y(f-, f-) and an independent metric,
    which keeps it a metric and makes f a weak contraction.
    """
    ny = rng.randint(1, max_y)
    ycomps = _split(rng, list(range(ny)), rng.randint(1, 3))
    Y = FinExtMetric(_random_metric(rng, ycomps, ny, max_d))
    k = rng.randint(1, max_k)
    # each X component lands inside one Y component, at most k points per fibre
    f: list[int] = []
    xcomps: list[list[int]] = []
    budget = rng.randint(1, max_x)
    while len(f) < budget:
        target = rng.choice(ycomps)
        size = rng.randint(1, min(budget - len(f), k * len(target)))
        slots = [y for y in target for _ in range(k)]
        chosen = rng.sample(slots, size)
        xcomps.append(list(range(len(f), len(f) + size)))
        f.extend(chosen)
    nx = len(f)
    base = _random_metric(rng, xcomps, nx, max_d)
    dx = [[max(base[x][z], Y.d[f[x]][f[z]]) if base[x][z] != INF else INF for z in range(nx)] for x in range(nx)]
    X = FinExtMetric(dx)
    R = rng.randint(1, max_d)
    S = rng.randint(0, max_d)
    xi: list[dict[int, Number]] = []
    for y in range(ny):
        ball = Y.ball(y, S)
        weights = [rng.randint(1, 9) for _ in ball]
        total = sum(weights)
        if exact:
            xi.append({q: Fraction(wt, total) for q, wt in zip(ball, weights)})
        else:
            xi.append({q: wt / total for q, wt in zip(ball, weights)})
    eps = max((l1(xi[a], xi[b]) for a in range(ny) for b in range(ny) if Y.d[a][b] <= R), default=0)
    return X, Y, f, Witness(xi, eps, R, S)
