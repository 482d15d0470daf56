"""Maximum elements of sigma-classes in F-inverse monoids."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .geometry import embedded_closure, require_e_unitary
from .grouporacle import FreeGroupOracle, FreeProductOracle, GroupOracle
from .presentation import Presentation, fragment, is_special, split_generators, translate
from .stephen import Budget, StephenRun
from .tribool import Confirmed
from .words import Alphabet, Word, all_words, free_reduce, invert


@dataclass
class MaxResult:
    sigma_class: Word          # group normal form
    representative: Word
    certificate: list[Word] = field(default_factory=list)  # group elements visited by the path
    radius: int = 0


def _lex_shortest(adj: dict[Word, dict[int, Word]], src: Word, dst: Word) -> Optional[Word]:
    """Lexicographically least among the shortest src -> dst labels."""
    if src == dst:
        return ()
    dist = {dst: 0}
    queue = deque([dst])
    while queue and src not in dist:
        v = queue.popleft()
        for t in adj.get(v, {}).values():
            if t not in dist:
                dist[t] = dist[v] + 1
                queue.append(t)
    if src not in dist:
        return None
    label = []
    v = src
    while v != dst:
        x, v = min((x, t) for x, t in adj[v].items() if dist.get(t) == dist[v] - 1)
        label.append(x)
    return tuple(label)


def sprawling_max(p: Presentation, g_word: Sequence[int], o: GroupOracle, b: Budget = Budget(),
                  max_radius: Optional[int] = None) -> Optional[MaxResult]:
    """Label of a shortest 1 -> g path in the union of the graph of 1 and its g-translate.

    Grows the ball radius from 1 until that union connects 1 and g.
    The answer is the maximum of its class when the graph of 1 is
    sprawling and the monoid is E-unitary; neither is checked.
    """
    require_e_unitary(p)
    o.check_geometric()
    g_word = tuple(g_word)
    g = o.require_nf(g_word)
    if not g:
        return MaxResult((), (), [()], 0)
    if max_radius is None:
        max_radius = 2 * len(g_word) + 4
    for radius in range(1, max_radius + 1):
        omega = embedded_closure(p, (), o, radius, b)
        forms = omega.ball.forms
        adj: dict[Word, dict[int, Word]] = {}
        for u, x, v in omega.edges:
            for shift in ((), g):
                su = o.product(shift, forms[u]) if shift else forms[u]
                sv = o.product(shift, forms[v]) if shift else forms[v]
                adj.setdefault(su, {})[x] = sv
                adj.setdefault(sv, {})[x ^ 1] = su
        label = _lex_shortest(adj, (), g)
        if label is not None:
            cert = [()]
            for x in label:
                cert.append(o.product(cert[-1], (x,)))
            return MaxResult(g, label, cert, radius)
    return None


def free_product_max(p: Presentation, w: Sequence[int], o: Optional[GroupOracle], b: Budget = Budget(),
                     max_radius: Optional[int] = None) -> Optional[MaxResult]:
    """Maximum of the class of ``w`` when ``p`` is a Z-fragment plus free generators Y.

    ``o`` is an oracle for the group of the fragment on the generators
    that occur in relations (it is unused when there are none).
    """
    z, y = split_generators(p)
    w = tuple(w)
    p.alphabet.check(w)
    fy = FreeGroupOracle(Alphabet(y))
    if not z:
        nf = free_reduce(w)
        return MaxResult(nf, nf, [], 0)
    if o is None or tuple(o.alphabet.names) != z:
        raise ValueError(f"oracle must be over the related generators {' '.join(z)}")
    if not y:
        return sprawling_max(p, w, o, b, max_radius)
    zy = Alphabet(z + y)
    fp = FreeProductOracle(o, fy)
    blocks = fp.reduce_blocks(fp.blocks(translate(w, p.alphabet, zy)))
    if blocks is None:
        return None
    zpres = fragment(p, z)
    rep: list[int] = []
    for f, block in blocks:
        if f == 0:
            res = sprawling_max(zpres, block, o, b, max_radius)
            if res is None:
                return None
            rep.extend(translate(res.representative, zpres.alphabet, p.alphabet))
        else:
            rep.extend(translate(block, fy.alphabet, p.alphabet))
    nf = fp.normal_form(translate(w, p.alphabet, zy))
    return MaxResult(translate(nf, zy, p.alphabet), tuple(rep), [], 0)


def wedge_upper_bound(p: Presentation, s_word: Sequence[int], t_word: Sequence[int], o: GroupOracle,
                      b: Budget = Budget()) -> Optional[Word]:
    """A common upper bound of [s] and [t] in the natural order, for sigma(s) = sigma(t).

    Looks for a word reading s -> ss^-1 in the graph of s and
    t^-1 t -> t^-1 in the graph of t^-1; its inverse bounds both.
    """
    if not is_special(p):
        raise ValueError("wedge upper bounds need a special presentation")
    require_e_unitary(p)
    s, t = tuple(s_word), tuple(t_word)
    if o.equal(s, t) is not Confirmed:
        raise ValueError("s and t must have the same image in the group")
    rs = StephenRun(p, s)
    rt = StephenRun(p, invert(t))
    rounds = 0
    while True:
        w = _product_search(rs, rt)
        if w is not None:
            return invert(w)
        if rounds >= b.max_rounds or (rs.saturated and rt.saturated):
            return None
        progressed = False
        for run in (rs, rt):
            if not run.saturated and run.limit_hit is None:
                progressed |= run.step(b.max_vertices)
        rounds += 1
        if not progressed and (rs.limit_hit or rt.limit_hit):
            return None


def _product_search(rs: StephenRun, rt: StephenRun) -> Optional[Word]:
    fs, ft = rs.folder, rt.folder
    start = (fs.find(rs.beta), ft.find(rt.alpha))
    goal = (fs.find(rs.alpha), ft.find(rt.beta))
    prev = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if state == goal:
            label = []
            while prev[state] is not None:
                state, x = prev[state]
                label.append(x)
            return tuple(reversed(label))
        a, c = state
        oa, oc = fs.out[a], ft.out[c]
        for x in sorted(oa.keys() & oc.keys()):
            nxt = (fs.find(oa[x]), ft.find(oc[x]))
            if nxt not in prev:
                prev[nxt] = (state, x)
                queue.append(nxt)
    return None


def phi_from_max(p: Presentation, max_fn: Callable[[Word], Optional[Word]], n: int) -> int:
    """Largest maximum-representative length over words of length <= n."""
    best = 0
    for w in all_words(p.rank, n):
        m = max_fn(w)
        if m is None:
            raise RuntimeError(f"no maximum found for {p.alphabet.format(w)} within budget")
        best = max(best, len(m))
    return best


def gray_normal_max(fixture: Presentation, w: Sequence[int], o: FreeProductOracle) -> Word:
    """``t^k1 w1 t^k2 ... wl t^k(l+1)`` form of ``w`` via the free-product oracle."""
    if set(o.alphabet.names) != set(fixture.generators):
        raise ValueError("oracle alphabet must match the fixture generators")
    nf = o.normal_form(translate(w, fixture.alphabet, o.alphabet))
    if nf is None:
        raise RuntimeError("group oracle could not normalize a block")
    return translate(nf, o.alphabet, fixture.alphabet)
