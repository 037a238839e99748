"""Burning procedures on ladder windows.

The one-sided burning rule generalizes the usual recurrence test: a site
may burn only when enough of its neighbourhood already belongs to the
*left-infinite* connected component of the complement of the unburnt
set.  Burning from the right is the mirror image, and counting every
complement component recovers the ordinary burning test for recurrence.

Burnability under any of the three rules is order-free: burning a site
never disables another candidate, so a greedy maximal burn reaches the
same verdict as any other.  Traces are made deterministic by burning the
lowest ``(rung, vertex)`` candidate first.

The module also provides the rung-at-a-time schedule used by the coding
construction, and the one-rung primitives it is built from:

* :func:`rung_burn` burns a single rung between two pre-declared burnt
  vertex sets (the right-hand set only participates once the burning
  wave actually reaches a site above it);
* :func:`first_rung_state` and :func:`advance_rung_state` propagate the
  pair (burnt set, influence map) that makes the per-rung burning data
  a Markov chain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from heapq import heappush, heappop
from typing import Iterable, Mapping, Optional, Sequence

from .errors import InternalInvariantError, ValidationError
from .graphs import Graph, Site

RungConfig = tuple[int, ...]
InfluenceMap = tuple[int, ...]  # table indexed by vertex-subset mask


@dataclass(frozen=True)
class BurnTrace:
    """Outcome of a burning run over a finite set of ladder sites."""

    success: bool
    order: tuple[Site, ...]
    unburnt: tuple[Site, ...]

    def burnt_by_rung(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for x, k in self.order:
            out.setdefault(k, []).append(x)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "order": [list(s) for s in self.order],
            "unburnt": [list(s) for s in self.unburnt],
        }


def _burn(graph: Graph, heights: Mapping[Site, int], seed_side: str,
          order: str = "canonical", rng: Optional[random.Random] = None,
          allowed: Optional[frozenset[Site]] = None) -> BurnTrace:
    """Run one burning pass.

    ``seed_side`` selects which complement components count as burnt
    territory from the start: ``"left"`` (the component reaching the
    left-infinite part of the ladder), ``"right"``, or ``"both"`` (every
    component; the ordinary burning rule).  Components that the burning
    wave touches are absorbed as it goes.  ``allowed`` optionally
    restricts which sites may burn; others are held fixed.
    """
    if not heights:
        return BurnTrace(success=True, order=(), unburnt=())
    n = graph.n
    lo = min(k for _, k in heights)
    hi = max(k for _, k in heights)
    width = hi - lo + 3  # region covers rungs lo-1 .. hi+1
    total = width * n

    def sid(x: int, k: int) -> int:
        return (k - lo + 1) * n + x

    def site_of(i: int) -> Site:
        return (i % n, i // n + lo - 1)

    in_v = bytearray(total)
    height = [0] * total
    for (x, k), h in heights.items():
        if not (0 <= x < n):
            raise ValidationError(f"vertex {x} outside base graph")
        if not (1 <= h <= graph.max_height[x]):
            raise ValidationError(
                f"height {h} at site ({x},{k}) outside stable range "
                f"1..{graph.max_height[x]}")
        i = sid(x, k)
        in_v[i] = 1
        height[i] = h

    nbr: list[list[int]] = [[] for _ in range(total)]
    for r in range(width):
        base = r * n
        for x in range(n):
            i = base + x
            for y in graph.neighbors[x]:
                nbr[i].append(base + y)
            if r > 0:
                nbr[i].append(i - n)
            if r < width - 1:
                nbr[i].append(i + n)

    # Component labels on the static complement.  All sites of the rung
    # below lo are one component (they join through rungs further left);
    # same for the rung above hi.  Other complement sites are grouped by
    # ordinary adjacency inside the region.
    comp = [-1] * total
    members: list[list[int]] = []

    def flood_into(seeds: Iterable[int], cid: int) -> None:
        stack = [s for s in seeds if comp[s] == -1]
        for s in stack:
            comp[s] = cid
        while stack:
            i = stack.pop()
            members[cid].append(i)
            for j in nbr[i]:
                if not in_v[j] and comp[j] == -1:
                    comp[j] = cid
                    stack.append(j)

    def new_comp(seeds: Iterable[int]) -> int:
        cid = len(members)
        members.append([])
        flood_into(seeds, cid)
        return cid

    left_seeds = [sid(x, lo - 1) for x in range(n)]
    right_seeds = [sid(x, hi + 1) for x in range(n)]
    left_comp = new_comp(left_seeds)
    if any(comp[s] == left_comp for s in right_seeds):
        right_comp = left_comp
        flood_into(right_seeds, left_comp)
    else:
        right_comp = new_comp(right_seeds)
    for i in range(total):
        if not in_v[i] and comp[i] == -1:
            new_comp([i])

    active = [seed_side == "both"] * len(members)
    if seed_side == "left":
        active[left_comp] = True
    elif seed_side == "right":
        active[right_comp] = True
    elif seed_side != "both":
        raise ValueError(f"bad seed_side {seed_side!r}")

    burnt = bytearray(total)
    cnt = [0] * total
    need = [0] * total
    if allowed is not None:
        allow = bytearray(total)
        for s in allowed:
            i = sid(*s)
            if not (0 <= i < total and in_v[i]):
                raise ValidationError(f"allowed site {s} is not in the site set")
            allow[i] = 1
    else:
        allow = None

    vsites = [i for i in range(total) if in_v[i]]
    for i in vsites:
        x = i % n
        need[i] = graph.degree[x] + 2 - height[i] + 1
        c = 0
        for j in nbr[i]:
            if not in_v[j] and active[comp[j]]:
                c += 1
        cnt[i] = c

    canonical = order == "canonical"
    if order == "random" and rng is None:
        rng = random.Random(0)
    heap: list[tuple[int, int, int]] = []
    pool: list[int] = []

    def enqueue(i: int) -> None:
        if allow is not None and not allow[i]:
            return
        if canonical:
            heappush(heap, (i // n, i % n, i))
        else:
            pool.append(i)

    for i in vsites:
        if cnt[i] >= need[i]:
            enqueue(i)

    trace: list[Site] = []

    def activate(cid: int) -> None:
        active[cid] = True
        for s in members[cid]:
            for j in nbr[s]:
                if in_v[j] and not burnt[j]:
                    cnt[j] += 1
                    if cnt[j] == need[j]:
                        enqueue(j)

    while True:
        if canonical:
            if not heap:
                break
            _, _, i = heappop(heap)
        else:
            if not pool:
                break
            i = pool.pop(rng.randrange(len(pool)))
        if burnt[i]:
            continue
        burnt[i] = 1
        trace.append(site_of(i))
        for j in nbr[i]:
            if in_v[j]:
                if not burnt[j]:
                    cnt[j] += 1
                    if cnt[j] == need[j]:
                        enqueue(j)
            elif not active[comp[j]]:
                activate(comp[j])

    unburnt = tuple(sorted((site_of(i) for i in vsites if not burnt[i]),
                           key=lambda s: (s[1], s[0])))
    target = vsites if allow is None else [i for i in vsites if allow[i]]
    success = all(burnt[i] for i in target)
    return BurnTrace(success=success, order=tuple(trace), unburnt=unburnt)


def left_burnable(graph: Graph, heights: Mapping[Site, int], *,
                  order: str = "canonical",
                  rng: Optional[random.Random] = None) -> BurnTrace:
    """Burning restricted to the left boundary; success certifies the
    configuration lies in the left-burnable class of its site set."""
    return _burn(graph, heights, "left", order=order, rng=rng)


def right_burnable(graph: Graph, heights: Mapping[Site, int], *,
                   order: str = "canonical",
                   rng: Optional[random.Random] = None) -> BurnTrace:
    return _burn(graph, heights, "right", order=order, rng=rng)


def full_burnable(graph: Graph, heights: Mapping[Site, int], *,
                  order: str = "canonical",
                  rng: Optional[random.Random] = None) -> BurnTrace:
    """Ordinary burning: success is exactly recurrence of the configuration."""
    return _burn(graph, heights, "both", order=order, rng=rng)


def window_heights(rungs: Sequence[RungConfig], start: int = 1) -> dict[Site, int]:
    """Lay out a rung sequence as a height mapping on rungs start, start+1, ..."""
    out: dict[Site, int] = {}
    for off, rung in enumerate(rungs):
        for x, h in enumerate(rung):
            out[(x, start + off)] = h
    return out


def reflect_heights(heights: Mapping[Site, int]) -> dict[Site, int]:
    """Mirror a configuration through rung 0 (k -> -k)."""
    return {(x, -k): h for (x, k), h in heights.items()}


@lru_cache(maxsize=None)
def is_rung_symbol(graph: Graph, rung: RungConfig) -> bool:
    """Whether a height vector is admissible as a rung of a left-burnable
    configuration (equivalently: left-burnable on a one-rung window)."""
    if len(rung) != graph.n:
        return False
    if any(not (1 <= h <= graph.max_height[x]) for x, h in enumerate(rung)):
        return False
    return left_burnable(graph, window_heights([rung], start=0)).success


def max_rung(graph: Graph) -> RungConfig:
    """The all-maximal rung; the renewal symbol."""
    return graph.max_height


# ---------------------------------------------------------------------------
# Rung-at-a-time schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeftmostResult:
    """Outcome of the leftmost-rung burning schedule.

    ``burnt_sets[k-1]`` is the burnt vertex mask of rung ``k`` at the
    moment burning first enters rung ``k+1`` (the phase boundary), and
    ``times[k-1]`` the number of sites burnt by then.  ``times[-1]`` is
    the total burn count on success.  Entries stay ``None`` when the
    schedule deadlocks before reaching the phase.
    """

    success: bool
    burnt_sets: tuple[Optional[int], ...]
    times: tuple[Optional[int], ...]


def leftmost_schedule(graph: Graph, rungs: Sequence[RungConfig]) -> LeftmostResult:
    """Burn one rung at a time, always returning to the leftmost rung
    with a burnable site; an auxiliary all-maximal rung is appended on
    the right and burnt only once everything else deadlocks.

    The verdict agrees with :func:`left_burnable` on the same window.
    """
    m = len(rungs)
    if m == 0:
        raise ValidationError("need at least one rung")
    for rung in rungs:
        if not is_rung_symbol(graph, tuple(rung)):
            raise ValidationError(f"rung {tuple(rung)} is not a valid rung symbol")
    n = graph.n
    maxh = graph.max_height
    heights = [tuple(r) for r in rungs] + [maxh]  # index k-1; last is the ghost
    full = graph.full_mask

    burnt = [0] * (m + 1)
    cnt = [[0] * n for _ in range(m + 1)]
    need = [[maxh[x] - heights[k][x] + 1 for x in range(n)] for k in range(m + 1)]
    for x in range(n):
        cnt[0][x] = 1  # rung 1 borders the left-infinite region

    T: list[Optional[int]] = [None] * (m + 1)
    B: list[Optional[int]] = [None] * m
    entered = [False] * (m + 1)
    time = 0
    ghost_done = False

    def bump(k: int, x: int, queue: list[int], k_active: int) -> None:
        cnt[k][x] += 1
        if k == k_active and not (burnt[k] >> x) & 1 and cnt[k][x] >= need[k][x]:
            queue.append(x)

    def burn_site(k: int, x: int, queue: list[int]) -> None:
        nonlocal time
        burnt[k] |= 1 << x
        time += 1
        for y in graph.neighbors[x]:
            bump(k, y, queue, k)
        if k > 0:
            bump(k - 1, x, queue, k)
        if k < m:
            bump(k + 1, x, queue, k)

    def burnable_in(k: int) -> list[int]:
        bm = burnt[k]
        return [x for x in range(n)
                if not (bm >> x) & 1 and cnt[k][x] >= need[k][x]]

    def mark_entry(k: int) -> None:
        # first burn in rung k+1 closes phase k
        if not entered[k]:
            entered[k] = True
            if k > 0:
                T[k - 1] = time
                B[k - 1] = burnt[k - 1]

    while True:
        k = next((k for k in range(m) if burnable_in(k)), None)
        if k is not None:
            mark_entry(k)
            queue = burnable_in(k)
            queue.sort(reverse=True)
            while queue:
                x = queue.pop()
                if not (burnt[k] >> x) & 1 and cnt[k][x] >= need[k][x]:
                    burn_site(k, x, queue)
            continue
        if ghost_done:
            break
        if burnt[m - 1] == 0:
            break  # the auxiliary rung cannot ignite; deadlock
        mark_entry(m)
        # flood the all-maximal rung from the vertices burnt below it
        seeds = [x for x in range(n) if (burnt[m - 1] >> x) & 1]
        reach = set(seeds)
        stack = list(seeds)
        while stack:
            x = stack.pop()
            for y in graph.neighbors[x]:
                if y not in reach:
                    reach.add(y)
                    stack.append(y)
        if len(reach) != n:
            raise InternalInvariantError("auxiliary rung flood incomplete")
        for x in sorted(reach):
            burnt[m] |= 1 << x
            time += 1
            cnt[m - 1][x] += 1
        ghost_done = True

    success = all(burnt[k] == full for k in range(m + 1))
    if success or ghost_done:
        T[m] = time
    return LeftmostResult(success=success, burnt_sets=tuple(B), times=tuple(T))


# ---------------------------------------------------------------------------
# One-rung primitives and influence maps
# ---------------------------------------------------------------------------

@lru_cache(maxsize=2 ** 22)
def rung_burn(graph: Graph, left_burnt: int, rung: RungConfig,
              right_burnt: int) -> int:
    """Maximal burn inside a single rung given pre-declared burnt vertex
    copies on the left (``left_burnt``) and right (``right_burnt``).

    Left copies count as burnt territory outright.  Right copies sit on
    the far side of the rung: they only start counting once some burnt
    vertex of the rung itself touches one, at which point they all do
    (they are mutually connected beyond the rung).  Cached: the advance
    loops of the coding construction revisit the same arguments heavily.
    """
    n = graph.n
    maxh = graph.max_height
    burnt = 0
    merged = False
    changed = True
    while changed:
        changed = False
        for x in range(n):
            bit = 1 << x
            if burnt & bit:
                continue
            c = (left_burnt >> x) & 1
            if merged:
                c += (right_burnt >> x) & 1
            nb = graph.neighbors[x]
            bm = burnt
            for y in nb:
                c += (bm >> y) & 1
            if c >= maxh[x] - rung[x] + 1:
                burnt |= bit
                changed = True
                if not merged and (right_burnt >> x) & 1:
                    merged = True
    return burnt


class InfluenceInterner:
    """Structural deduplication of influence-map tables, so equal maps
    share one tuple and automaton states compare fast."""

    def __init__(self) -> None:
        self._table: dict[InfluenceMap, InfluenceMap] = {}

    def intern(self, table: InfluenceMap) -> InfluenceMap:
        return self._table.setdefault(table, table)

    def __len__(self) -> int:
        return len(self._table)


def first_rung_state(graph: Graph, rung: RungConfig,
                     interner: Optional[InfluenceInterner] = None
                     ) -> tuple[int, InfluenceMap]:
    """Burnt set and influence map of the leftmost rung of a window:
    the left side is fully open, so the burnt set is the left-assisted
    closure and the influence map records how any burnt set declared on
    the next rung feeds back."""
    full = graph.full_mask
    table = tuple(rung_burn(graph, full, rung, a) for a in range(full + 1))
    if interner is not None:
        table = interner.intern(table)
    return table[0], table


def advance_rung_state(graph: Graph, burnt: int, rung: RungConfig,
                       influence: InfluenceMap,
                       interner: Optional[InfluenceInterner] = None
                       ) -> tuple[int, InfluenceMap]:
    """Advance the (burnt set, influence map) pair across one rung.

    Both components are fixed points of alternating the one-rung burn
    with the previous influence map; the alternation grows the burnt
    sets monotonically, so it must settle within ``2**|G|`` rounds.
    """
    full = graph.full_mask
    cap = (1 << graph.n) + 2

    a = rung_burn(graph, burnt, rung, 0)
    for _ in range(cap):
        a2 = rung_burn(graph, influence[a], rung, 0)
        if a2 == a:
            break
        a = a2
    else:
        raise InternalInvariantError("burnt-set alternation failed to settle")
    new_burnt = a

    base = influence[new_burnt]
    table = []
    for target in range(full + 1):
        abar = rung_burn(graph, base, rung, target)
        for _ in range(cap):
            abar2 = rung_burn(graph, influence[abar], rung, target)
            if abar2 == abar:
                break
            abar = abar2
        else:
            raise InternalInvariantError("influence alternation failed to settle")
        table.append(abar)
    out = tuple(table)
    if interner is not None:
        out = interner.intern(out)
    return new_burnt, out


# ---------------------------------------------------------------------------
# Closed-form characterization for the two-vertex path
# ---------------------------------------------------------------------------

def path2_characterization(graph: Graph, rungs: Sequence[RungConfig]) -> bool:
    """Left-burnability test for the two-vertex path by pattern rules:
    every rung holds a maximal height, and a one-sided deficient rung
    (3,1) may only be followed by (3,2)s until a (3,3) arrives (the
    (3,3) may be missing at the right edge); mirrored for (1,3)/(2,3).
    """
    if graph.degree != (1, 1):
        raise ValidationError("characterization applies to the 2-path only")
    seq = [tuple(r) for r in rungs]
    for rung in seq:
        if len(rung) != 2:
            raise ValidationError(f"rung {rung} is not a 2-vector")
        if not all(1 <= h <= 3 for h in rung):
            raise ValidationError(f"rung {rung} outside stable range")
    for rung in seq:
        if 3 not in rung:
            return False
    for i, rung in enumerate(seq):
        if rung == (3, 1):
            filler, closer = (3, 2), (3, 3)
        elif rung == (1, 3):
            filler, closer = (2, 3), (3, 3)
        else:
            continue
        for later in seq[i + 1:]:
            if later == closer:
                break
            if later != filler:
                return False
    return True


__all__ = [
    "BurnTrace", "InfluenceInterner", "InfluenceMap", "LeftmostResult",
    "RungConfig", "advance_rung_state", "first_rung_state", "full_burnable",
    "is_rung_symbol", "left_burnable", "leftmost_schedule", "max_rung",
    "path2_characterization", "reflect_heights", "right_burnable",
    "rung_burn", "window_heights",
]
