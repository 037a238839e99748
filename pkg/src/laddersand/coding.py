"""The rung-coding automaton and its maximal-entropy Markov chain.

Left-burnable configurations are coded rung by rung.  The state carried
across a rung boundary is the triple (rung heights, burnt set at the
phase boundary, influence map), which is exactly the information the
burning process needs about everything to its left.  States are closed
under the one-rung advance; reading a rung from a state either yields a
unique successor or is impossible, so the word coding a configuration
is determined by its rungs and the correspondence is one-to-one.

The transition matrix is transitive, its Perron data give the per-rung
growth rate, and the associated stochastic matrix (the maximal-entropy
chain on the shift) is what the measure samplers draw from.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .burning import (InfluenceInterner, InfluenceMap, RungConfig,
                      advance_rung_state, first_rung_state)
from .census import enum_rungs
from .errors import ConvergenceError, FeasibilityError, ValidationError
from .graphs import Graph, mask_to_vertices

DEFAULT_MAX_STATES = 10 ** 6


@dataclass(frozen=True)
class CodeSymbol:
    """One automaton state: the rung heights, the vertex set burnt when
    the next rung is first entered, and the influence map recording how
    burnt sets declared on the next rung feed back through this one."""

    rung: RungConfig
    burnt: int
    influence: InfluenceMap

    def key(self) -> tuple:
        return (self.rung, self.burnt, self.influence)

    def to_json(self) -> dict:
        return {
            "rung": list(self.rung),
            "burnt": list(mask_to_vertices(self.burnt)),
            "influence": [list(mask_to_vertices(v)) for v in self.influence],
        }


@dataclass
class CodingAutomaton:
    """Deterministic presentation of the left-burnable rung sequences."""

    graph: Graph
    alphabet: tuple[RungConfig, ...]
    states: tuple[CodeSymbol, ...]
    inclusion: dict[RungConfig, int]
    delta: tuple[dict[RungConfig, int], ...]
    targets: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        self.targets = tuple(tuple(sorted(d.values())) for d in self.delta)

    def __len__(self) -> int:
        return len(self.states)

    def matrix(self) -> np.ndarray:
        t = np.zeros((len(self.states), len(self.states)), dtype=np.int64)
        for i, d in enumerate(self.delta):
            for j in d.values():
                t[i, j] = 1
        return t

    def start_states(self) -> tuple[int, ...]:
        return tuple(sorted(self.inclusion.values()))

    def count_words(self, n: int) -> int:
        """Exact number of accepted words of length ``n`` (equivalently,
        of left-burnable rung sequences of that length)."""
        if n < 1:
            raise ValidationError("word length must be >= 1")
        vec = [1] * len(self.states)
        for _ in range(n - 1):
            vec = [sum(vec[t] for t in row) for row in self.targets]
        return sum(vec[i] for i in self.start_states())

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "alphabet": [list(c) for c in self.alphabet],
            "states": [s.to_json() for s in self.states],
            "inclusion": {",".join(map(str, c)): i for c, i in self.inclusion.items()},
            "matrix": [list(row) for row in self.targets],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def build_coding(graph: Graph, *, max_states: int = DEFAULT_MAX_STATES
                 ) -> CodingAutomaton:
    """Breadth-first closure of the one-rung advance, seeded with the
    states a window's first rung can take.

    A successor exists for a rung exactly when the burning can enter it
    (the burnt set below touches one of its maximal-height vertices) and
    the advanced influence map still maps the full vertex set to itself;
    states failing that cannot occur in any burnable sequence.
    """
    alphabet = enum_rungs(graph).rungs
    full = graph.full_mask
    interner = InfluenceInterner()
    maxmask = {c: sum(1 << x for x in range(graph.n)
                      if c[x] == graph.max_height[x]) for c in alphabet}

    states: list[CodeSymbol] = []
    index: dict[tuple, int] = {}
    inclusion: dict[RungConfig, int] = {}

    def add(sym: CodeSymbol) -> int:
        key = sym.key()
        found = index.get(key)
        if found is not None:
            return found
        if len(states) >= max_states:
            raise FeasibilityError(
                f"automaton exceeded max_states={max_states}")
        index[key] = len(states)
        states.append(sym)
        return index[key]

    queue: deque[int] = deque()
    for c in alphabet:
        burnt, infl = first_rung_state(graph, c, interner)
        if infl[full] != full:  # pragma: no cover - alphabet rungs self-burn
            continue
        inclusion[c] = add(CodeSymbol(c, burnt, infl))
        queue.append(inclusion[c])

    # many states share (burnt set, influence map); their outgoing
    # advances are identical, so compute each advance once
    advance_cache: dict[tuple, Optional[tuple[int, InfluenceMap]]] = {}

    def advanced(burnt: int, infl: InfluenceMap, c: RungConfig):
        key = (burnt, infl, c)
        if key not in advance_cache:
            burnt2, infl2 = advance_rung_state(graph, burnt, c, infl, interner)
            advance_cache[key] = (burnt2, infl2) if infl2[full] == full else None
        return advance_cache[key]

    delta: dict[int, dict[RungConfig, int]] = {}
    seen_from: set[int] = set()
    while queue:
        i = queue.popleft()
        if i in seen_from:
            continue
        seen_from.add(i)
        sym = states[i]
        row: dict[RungConfig, int] = {}
        for c in alphabet:
            if not sym.burnt & maxmask[c]:
                continue  # burning cannot enter the next rung
            nxt = advanced(sym.burnt, sym.influence, c)
            if nxt is None:
                continue  # the extended window cannot finish burning
            j = add(CodeSymbol(c, nxt[0], nxt[1]))
            row[c] = j
            if j not in seen_from:
                queue.append(j)
        delta[i] = row

    return CodingAutomaton(
        graph=graph,
        alphabet=alphabet,
        states=tuple(states),
        inclusion=inclusion,
        delta=tuple(delta[i] for i in range(len(states))),
    )


def encode(automaton: CodingAutomaton, rungs: Sequence[RungConfig]
           ) -> Optional[list[int]]:
    """The state word coding a rung sequence, or None when the sequence
    is not left-burnable.  Projecting the word back onto rungs recovers
    the input exactly."""
    seq = [tuple(r) for r in rungs]
    if not seq:
        raise ValidationError("need at least one rung")
    for r in seq:
        if r not in automaton.inclusion and r not in automaton.alphabet:
            raise ValidationError(f"rung {r} is not a valid rung symbol")
    state = automaton.inclusion.get(seq[0])
    if state is None:  # pragma: no cover - every alphabet rung starts a word
        return None
    word = [state]
    for r in seq[1:]:
        state = automaton.delta[state].get(r)
        if state is None:
            return None
        word.append(state)
    return word


def decode(automaton: CodingAutomaton, word: Sequence[int]
           ) -> tuple[RungConfig, ...]:
    """Coordinatewise projection of a state word onto rung heights."""
    return tuple(automaton.states[i].rung for i in word)


def check_transitive(automaton: CodingAutomaton
                     ) -> tuple[bool, Optional[int]]:
    """Strong connectivity plus the smallest power of the transition
    matrix with all entries positive (None if reducible or imprimitive
    within the Wielandt bound)."""
    size = len(automaton)
    fwd = [set(row) for row in automaton.targets]
    bwd = [set() for _ in range(size)]
    for i, row in enumerate(automaton.targets):
        for j in row:
            bwd[j].add(i)

    def reach(adj, start=0):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    irreducible = len(reach(fwd)) == size and len(reach(bwd)) == size
    if not irreducible:
        return False, None
    m = automaton.matrix() > 0
    power = m.copy()
    cap = (size - 1) ** 2 + 1 if size > 1 else 1
    for p in range(1, cap + 1):
        if power.all():
            return True, p
        power = (power.astype(np.int64) @ m.astype(np.int64)) > 0
    return True, None


@dataclass(frozen=True)
class SpectralData:
    """Perron data of the transition matrix."""

    rho: float
    right: np.ndarray
    left: np.ndarray
    residual_right: float
    residual_left: float
    iterations: int
    strictly_positive: bool

    @property
    def entropy(self) -> float:
        return math.log(self.rho)


def _power_iteration(t: np.ndarray, tol: float, max_iter: int
                     ) -> tuple[float, np.ndarray, float, int]:
    size = t.shape[0]
    x = np.full(size, 1.0 / size)
    rho = 1.0
    for it in range(1, max_iter + 1):
        y = t @ x
        total = y.sum()
        if total <= 0:
            raise ConvergenceError("iteration collapsed to zero vector")
        rho = total / x.sum()
        x = y / total
        resid = float(np.abs(t @ x - rho * x).max())
        if resid < tol:
            return float(rho), x, resid, it
    raise ConvergenceError(
        f"power iteration residual above {tol} after {max_iter} rounds")


def spectral(automaton: CodingAutomaton, tol: float = 1e-12,
             max_iter: int = 1_000_000) -> SpectralData:
    """Perron value and left/right vectors by power iteration with a
    residual certificate."""
    t = automaton.matrix().astype(float)
    rho, right, res_r, it_r = _power_iteration(t, tol, max_iter)
    rho_l, left, res_l, it_l = _power_iteration(t.T, tol, max_iter)
    rho = 0.5 * (rho + rho_l)
    positive = bool((right > tol).all() and (left > tol).all())
    return SpectralData(rho=rho, right=right, left=left,
                        residual_right=res_r, residual_left=res_l,
                        iterations=max(it_r, it_l),
                        strictly_positive=positive)


def restrict(automaton: CodingAutomaton,
             keep: Callable[[RungConfig], bool]) -> CodingAutomaton:
    """Subautomaton over the states whose rung satisfies the predicate."""
    kept = [i for i, s in enumerate(automaton.states) if keep(s.rung)]
    if not kept:
        raise ValidationError("restriction keeps no states")
    remap = {old: new for new, old in enumerate(kept)}
    states = tuple(automaton.states[i] for i in kept)
    delta = tuple(
        {c: remap[j] for c, j in automaton.delta[i].items() if j in remap}
        for i in kept)
    inclusion = {c: remap[i] for c, i in automaton.inclusion.items()
                 if i in remap and keep(c)}
    alphabet = tuple(c for c in automaton.alphabet if keep(c))
    return CodingAutomaton(graph=automaton.graph, alphabet=alphabet,
                           states=states, inclusion=inclusion, delta=delta)


@dataclass(frozen=True)
class ParryChain:
    """The maximal-entropy Markov chain on the automaton: transition
    probabilities scaled out of the Perron vectors, and its stationary
    distribution."""

    automaton: CodingAutomaton
    matrix: np.ndarray
    stationary: np.ndarray
    rho: float

    def entropy_rate(self) -> float:
        p = self.matrix
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)
        return float(-(self.stationary @ (p * logs).sum(axis=1)))


def parry_chain(automaton: CodingAutomaton,
                spec: Optional[SpectralData] = None) -> ParryChain:
    if spec is None:
        spec = spectral(automaton)
    if not spec.strictly_positive:
        raise ValidationError(
            "maximal-entropy chain needs strictly positive Perron vectors "
            "(is the automaton transitive?)")
    t = automaton.matrix().astype(float)
    v = spec.right
    p = t * v[None, :] / (spec.rho * v[:, None])
    pi = spec.left * v
    pi = pi / pi.sum()
    return ParryChain(automaton=automaton, matrix=p, stationary=pi,
                      rho=spec.rho)


def influence_maps_monotone(automaton: CodingAutomaton) -> bool:
    """Empirical check that every reachable influence map is monotone
    (larger declared set, larger feedback).  Reported as data; nothing
    in the construction assumes it."""
    n = automaton.graph.n
    full = automaton.graph.full_mask
    for s in automaton.states:
        f = s.influence
        for a in range(full + 1):
            fa = f[a]
            for x in range(n):
                b = a | (1 << x)
                if fa & ~f[b]:
                    return False
    return True


__all__ = [
    "CodeSymbol", "CodingAutomaton", "ParryChain", "SpectralData",
    "build_coding", "check_transitive", "decode", "encode",
    "influence_maps_monotone", "parry_chain", "restrict", "spectral",
    "DEFAULT_MAX_STATES",
]
