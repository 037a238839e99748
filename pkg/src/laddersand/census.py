"""Exact enumeration and counting of burnable-configuration classes.

Counts are exact integers.  The brute-force route enumerates rung
sequences depth-first, maintaining the burning state of the prefix
incrementally: every rung of a left-burnable configuration is a valid
rung symbol, a prefix whose burning cannot ignite its last rung has no
burnable extension, and a prefix is itself left-burnable exactly when
appending an all-maximal rung lets the burning finish.  These prunes
keep the tree close to the set being counted.

The recurrent-configuration count (variant ``REC``) has no symbol
alphabet; it enumerates raw stable height vectors, discarding rungs
that already contain a forbidden subconfiguration on their own and
pruning prefixes that fail the ordinary burning test.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Optional, Sequence

from .burning import (RungConfig, full_burnable, is_rung_symbol,
                      leftmost_schedule, max_rung, window_heights)
from .errors import FeasibilityError, ValidationError
from .graphs import Graph

VARIANTS = ("L", "L0", "S", "S0", "REC")

DEFAULT_MAX_ENUM = 10 ** 7


@dataclass(frozen=True)
class RungAlphabet:
    """All admissible single-rung height vectors, sorted."""

    graph: Graph
    rungs: tuple[RungConfig, ...]

    def __len__(self) -> int:
        return len(self.rungs)

    def __iter__(self):
        return iter(self.rungs)

    def index(self, rung: RungConfig) -> int:
        return self.rungs.index(tuple(rung))

    def __contains__(self, rung) -> bool:
        return tuple(rung) in self.rungs


@dataclass(frozen=True)
class CountSeries:
    """Exact counts indexed by window length (``values[i]`` is n = i+1)."""

    variant: str
    values: tuple[int, ...]
    provenance: str
    graph_name: str = "custom"

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= len(self.values):
            raise IndexError(f"n={n} outside computed range 1..{len(self.values)}")
        return self.values[n - 1]

    def with_zero(self) -> tuple[int, ...]:
        """The sequence with the conventional count 1 prepended at n=0."""
        return (1,) + self.values


@lru_cache(maxsize=None)
def enum_rungs(graph: Graph) -> RungAlphabet:
    """Enumerate the rung alphabet by testing one-rung left-burnability
    over all stable height vectors."""
    rungs = [h for h in product(*[range(1, m + 1) for m in graph.max_height])
             if is_rung_symbol(graph, h)]
    return RungAlphabet(graph=graph, rungs=tuple(sorted(rungs)))


@lru_cache(maxsize=None)
def single_rung_recurrent(graph: Graph) -> tuple[RungConfig, ...]:
    """Stable rungs with no forbidden subconfiguration of their own."""
    out = [h for h in product(*[range(1, m + 1) for m in graph.max_height])
           if full_burnable(graph, window_heights([h], start=0)).success]
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Depth-first enumeration with an incremental burning state
# ---------------------------------------------------------------------------

# Per-rung row tables are affordable up to this many base vertices:
# each table holds 2**(3n) precomputed within-row burn fixpoints.
_TABLE_MAX_VERTICES = 4


def _row_fixpoint(n: int, nbrm: tuple[int, ...], nr: tuple[int, ...],
                  below: int, above: int, row: int) -> int:
    progress = True
    while progress:
        progress = False
        for x in range(n):
            bit = 1 << x
            if row & bit:
                continue
            c = ((row & nbrm[x]).bit_count()
                 + ((below >> x) & 1) + ((above >> x) & 1))
            if c >= nr[x]:
                row |= bit
                progress = True
    return row


def _close(burnt: list[int], tbls: Sequence, dirty: int, full: int, n: int) -> None:
    """Burning closure over burnt-row masks: reprocess dirty rows (a
    bitmask of row indices) until nothing new burns.  ``tbls[j]`` maps
    ``(below, above, row)`` of row ``j`` to its within-row fixpoint; a
    row's candidates see burnt vertices beside them and the open left
    end below row 0."""
    top = len(burnt) - 1
    n2 = 2 * n
    while dirty:
        jbit = dirty & -dirty
        dirty ^= jbit
        j = jbit.bit_length() - 1
        row = burnt[j]
        if row == full:
            continue
        below = burnt[j - 1] if j else full
        above = burnt[j + 1] if j < top else 0
        new = tbls[j][(below << n2) | (above << n) | row]
        if new != row:
            burnt[j] = new
            if j:
                dirty |= jbit >> 1
            if j < top:
                dirty |= jbit << 1


class _SequenceDFS:
    """Shared machinery for the pruned depth-first walks over rung
    sequences.  A prefix is represented by its resting burnt-row masks;
    the per-rung tables along the path are managed by the caller so
    pushes stay allocation-light."""

    def __init__(self, graph: Graph):
        self.graph = graph
        self.n = graph.n
        self.alphabet = enum_rungs(graph)
        self.cmax = max_rung(graph)
        self.full = graph.full_mask
        self.nbr_masks = tuple(graph.neighbor_mask(x) for x in range(graph.n))
        self.maxmask = {
            c: sum(1 << x for x in range(graph.n) if c[x] == graph.max_height[x])
            for c in self.alphabet
        }
        self.need_row = {
            c: tuple(graph.max_height[x] - c[x] + 1 for x in range(graph.n))
            for c in self.alphabet
        }
        self.row_table = {c: self._build_row_table(c) for c in self.alphabet}
        maxh = graph.max_height
        self.ghost_table = self._build_row_table(maxh)

    def _build_row_table(self, rung: RungConfig):
        n, nbrm = self.n, self.nbr_masks
        nr = tuple(self.graph.max_height[x] - rung[x] + 1 for x in range(n))
        if n > _TABLE_MAX_VERTICES:
            # too wide to tabulate; fall back to direct evaluation
            class _Lazy:
                __slots__ = ()

                def __getitem__(_, key: int) -> int:
                    below, rest = divmod(key, 1 << (2 * n))
                    above, row = divmod(rest, 1 << n)
                    return _row_fixpoint(n, nbrm, nr, below, above, row)

            return _Lazy()
        size = 1 << n
        tbl = [0] * (size * size * size)
        for below in range(size):
            for above in range(size):
                base = (below << (2 * n)) | (above << n)
                for row in range(size):
                    tbl[base | row] = _row_fixpoint(n, nbrm, nr, below, above, row)
        return tbl

    def push(self, burnt: list[int], tbls: list, rung: RungConfig
             ) -> Optional[list[int]]:
        """Resting state after appending ``rung``; None when the new rung
        cannot ignite, in which case no extension is burnable either.
        ``tbls`` must already include the new rung's table."""
        k = len(burnt)
        if k and not burnt[-1] & self.maxmask[rung]:
            return None
        child = burnt + [0]
        _close(child, tbls, 1 << k, self.full, self.n)
        if child[k] == 0:
            return None
        return child

    def is_burnable(self, burnt: list[int], tbls: list) -> bool:
        """Left-burnability of the prefix: a fully burnt all-maximal row
        stands in for the open right half; the prefix is burnable iff
        the closure then finishes everything."""
        probe = burnt + [self.full]
        tbls.append(self.ghost_table)
        _close(probe, tbls, 1 << (len(burnt) - 1), self.full, self.n)
        tbls.pop()
        full = self.full
        return all(row == full for row in probe)


def _right_burnable_sequence(graph: Graph, seq: Sequence[RungConfig]) -> bool:
    return leftmost_schedule(graph, list(reversed(seq))).success


def _count_burnable(graph: Graph, n_max: int, *, include_max: bool,
                    symmetric: bool, first_symbols=None) -> list[int]:
    dfs = _SequenceDFS(graph)
    cmax = dfs.cmax
    symbols = [c for c in dfs.alphabet if include_max or c != cmax]
    sym_data = [(c, dfs.maxmask[c], dfs.row_table[c], c == cmax) for c in symbols]
    counts = [0] * (n_max + 1)
    path: list[RungConfig] = []
    tbls: list = []

    def visit(burnt: list[int], depth: int) -> None:
        if not symmetric or _right_burnable_sequence(graph, path):
            counts[depth] += 1
        if depth == n_max:
            return
        last = burnt[-1]
        for c, mm, tbl, is_max in sym_data:
            if not last & mm:
                continue
            tbls.append(tbl)
            child = dfs.push(burnt, tbls, c)
            # appending a maximal rung preserves burnability outright
            if child is not None and (is_max or dfs.is_burnable(child, tbls)):
                path.append(c)
                visit(child, depth + 1)
                path.pop()
            tbls.pop()

    for c in (first_symbols if first_symbols is not None else symbols):
        tbls.append(dfs.row_table[c])
        child = dfs.push([], tbls, c)
        if child is not None:  # every symbol opens a window
            path.append(c)
            visit(child, 1)
            path.pop()
        tbls.pop()
    return counts[1:]


def iter_left_burnable(graph: Graph, n: int) -> Iterator[tuple[RungConfig, ...]]:
    """All left-burnable rung sequences of length exactly ``n``."""
    dfs = _SequenceDFS(graph)
    cmax = dfs.cmax
    path: list[RungConfig] = []
    tbls: list = []

    def walk(burnt: list[int], depth: int):
        if depth == n:
            yield tuple(path)
            return
        for c in dfs.alphabet:
            tbls.append(dfs.row_table[c])
            child = dfs.push(burnt, tbls, c) if (depth == 0 or burnt[-1] & dfs.maxmask[c]) else None
            if child is not None and (c == cmax or dfs.is_burnable(child, tbls)):
                path.append(c)
                yield from walk(child, depth + 1)
                path.pop()
            tbls.pop()

    yield from walk([], 0)


def iter_recurrent(graph: Graph, n: int) -> Iterator[tuple[RungConfig, ...]]:
    """All recurrent raw configurations on a window of ``n`` rungs."""
    rungs = single_rung_recurrent(graph)
    path: list[RungConfig] = []

    def walk(depth: int):
        if depth == n:
            yield tuple(path)
            return
        for c in rungs:
            path.append(c)
            if full_burnable(graph, window_heights(path)).success:
                yield from walk(depth + 1)
            path.pop()

    yield from walk(0)


def _count_recurrent(graph: Graph, n_max: int) -> list[int]:
    rungs = single_rung_recurrent(graph)
    counts = [0] * (n_max + 1)
    path: list[RungConfig] = []

    def walk(depth: int) -> None:
        counts[depth] += 1
        if depth == n_max:
            return
        for c in rungs:
            path.append(c)
            if full_burnable(graph, window_heights(path)).success:
                walk(depth + 1)
            path.pop()

    walk(0)
    return counts[1:]


def count_series(graph: Graph, variant: str, n_max: int,
                 method: str = "brute", *,
                 max_enum: int = DEFAULT_MAX_ENUM,
                 threads: int = 1) -> CountSeries:
    """Exact counts of the window classes: ``L`` left-burnable, ``L0``
    left-burnable without maximal rungs, ``S`` two-sided burnable, ``S0``
    two-sided without maximal rungs, ``REC`` all recurrent.

    ``method="automaton"`` counts accepted words of the rung-coding
    automaton instead of enumerating; it exists for ``L`` and ``L0``
    only (no automaton is built for the symmetric or recurrent classes).
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; pick from {VARIANTS}")
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    if method == "automaton":
        if variant not in ("L", "L0"):
            raise ValidationError(
                f"variant {variant!r} has no automaton; use method='brute'")
        from .coding import build_coding, restrict
        auto = build_coding(graph)
        if variant == "L0":
            cmax = max_rung(graph)
            auto = restrict(auto, lambda c: c != cmax)
        values = tuple(auto.count_words(n) for n in range(1, n_max + 1))
        return CountSeries(variant=variant, values=values,
                           provenance="automaton", graph_name=graph.name)
    if method != "brute":
        raise ValidationError(f"unknown method {method!r}")

    if variant == "REC":
        base = len(single_rung_recurrent(graph))
        if base ** n_max > max_enum:
            raise FeasibilityError(
                f"raw enumeration needs {base}**{n_max} > max_enum={max_enum}")
        return CountSeries(variant="REC", values=tuple(_count_recurrent(graph, n_max)),
                           provenance="brute", graph_name=graph.name)

    alphabet = enum_rungs(graph)
    if len(alphabet) ** n_max > max_enum:
        raise FeasibilityError(
            f"brute enumeration needs {len(alphabet)}**{n_max} "
            f"> max_enum={max_enum}; raise max_enum or use method='automaton'")
    include_max = variant in ("L", "S")
    symmetric = variant in ("S", "S0")
    cmax = max_rung(graph)
    firsts = [c for c in alphabet if include_max or c != cmax]
    if threads > 1 and len(firsts) > 1:
        # partition by first rung; totals are order-independent sums
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda c: _count_burnable(graph, n_max, include_max=include_max,
                                          symmetric=symmetric, first_symbols=[c]),
                firsts))
        values = tuple(sum(p[i] for p in parts) for i in range(n_max))
    else:
        values = tuple(_count_burnable(graph, n_max, include_max=include_max,
                                       symmetric=symmetric, first_symbols=firsts))
    return CountSeries(variant=variant, values=values, provenance="brute",
                       graph_name=graph.name)


def renewal_identity_check(a: CountSeries, b: CountSeries, n_max: int) -> bool:
    """Exact check that the full counts decompose over the position of
    the first maximal rung: a_n = b_n + sum_{k=1..n} b_{k-1} a_{n-k}."""
    if a.variant != "L" or b.variant != "L0":
        raise ValidationError("needs the L series and the L0 series")
    av, bv = a.with_zero(), b.with_zero()
    if n_max >= min(len(av), len(bv)):
        raise ValidationError(f"series too short for n_max={n_max}")
    for n in range(1, n_max + 1):
        if av[n] != bv[n] + sum(bv[k - 1] * av[n - k] for k in range(1, n + 1)):
            return False
    return True


@dataclass(frozen=True)
class EntropyBounds:
    """Per-window-length bounds on the exponential growth rate."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    estimate: float


def entropy_bounds(series: CountSeries, exact_rate: Optional[float] = None
                   ) -> EntropyBounds:
    """Growth-rate bounds from the exact counts.

    Upper bounds come from submultiplicativity (restriction), lower
    bounds from concatenating across an inserted maximal rung, which
    gives ``a_{p+q+1} >= a_p a_q``.
    """
    if not series.values:
        raise ValidationError("empty series")
    upper = tuple(math.log(v) / n for n, v in enumerate(series.values, start=1))
    lower = tuple(math.log(v) / (n + 1) for n, v in enumerate(series.values, start=1))
    estimate = exact_rate if exact_rate is not None else min(upper)
    return EntropyBounds(lower=lower, upper=upper, estimate=estimate)


__all__ = [
    "CountSeries", "EntropyBounds", "RungAlphabet", "count_series",
    "entropy_bounds", "enum_rungs", "iter_left_burnable", "iter_recurrent",
    "renewal_identity_check", "single_rung_recurrent", "DEFAULT_MAX_ENUM",
]
