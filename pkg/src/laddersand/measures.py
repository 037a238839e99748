"""Limit measures of the one-sided burning classes.

The uniform measures on left-burnable windows converge as the window
grows; maximal rungs are renewal points, so the limit is governed by a
renewal process whose step distribution comes from the counts of
windows with no maximal rung.  Cylinder probabilities under the limit
are computed three independent ways:

* ``renewal``  - the renewal representation: sum over the nearest
  renewal on each side of the event window, with geometric tails;
* ``parry``    - the stationary marginal of the maximal-entropy chain
  on the coding automaton;
* ``finite_dp`` - exact rational probability on a large finite window
  by integer path counting.

The right-sided measure is the reflection of the left-sided one, so all
right-sided quantities are computed by reflecting events and samples.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .burning import (RungConfig, full_burnable, left_burnable, max_rung,
                      right_burnable)
from .census import enum_rungs, iter_recurrent, single_rung_recurrent
from .coding import (CodingAutomaton, build_coding, parry_chain, restrict,
                     spectral)
from .errors import FeasibilityError, ValidationError
from .graphs import Graph, Window
from .toppling import LadderConfig

DEFAULT_RENEWAL_ORDER = 48
DEFAULT_TAIL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Renewal quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RenewalData:
    """Root of the counting generating function and the renewal-step
    distribution it induces.

    ``p[k-1]`` is the probability that consecutive maximal rungs sit
    ``k`` apart; ``alpha`` rescales the counts so that the number of
    left-burnable windows of length ``n`` grows like ``alpha / lam**n``.
    """

    lam: float
    order: int
    p: tuple[float, ...]
    tail_bound: float
    mean_gap: float
    alpha: float

    @property
    def total_mass(self) -> float:
        return sum(self.p)

    @property
    def renewal_density(self) -> float:
        return 1.0 / self.mean_gap


class _AutomatonBundle:
    """Per-graph cache of the automaton, its restriction to non-maximal
    rungs, and both spectral data."""

    _cache: dict[Graph, "_AutomatonBundle"] = {}

    def __init__(self, graph: Graph):
        self.graph = graph
        self.automaton = build_coding(graph)
        cmax = max_rung(graph)
        self.cmax = cmax
        if len(self.automaton.alphabet) > 1:
            self.nonmax = restrict(self.automaton, lambda c: c != cmax)
        else:
            self.nonmax = None
        self.spec = spectral(self.automaton)
        self.chain = parry_chain(self.automaton, self.spec)

    @classmethod
    def get(cls, graph: Graph) -> "_AutomatonBundle":
        if graph not in cls._cache:
            cls._cache[graph] = cls(graph)
        return cls._cache[graph]


def renewal_quantities(graph: Graph, order: int = DEFAULT_RENEWAL_ORDER, *,
                       tail_tol: float = DEFAULT_TAIL_TOL) -> RenewalData:
    """Solve for the root of the truncated counting series and derive
    the renewal-step distribution, with a certified geometric tail.

    The no-maximal-rung counts are taken from the restricted automaton;
    their growth rate bounds the truncation tail.  If the bound cannot
    be pushed below ``tail_tol`` at this order, a larger order is
    requested via :class:`FeasibilityError`.
    """
    if order < 4:
        raise ValidationError("order must be >= 4")
    bundle = _AutomatonBundle.get(graph)
    if bundle.nonmax is None:
        # one admissible rung only: every window is a run of renewals
        return RenewalData(lam=1.0, order=order, p=(1.0,), tail_bound=0.0,
                           mean_gap=1.0, alpha=1.0)
    b = [1] + [bundle.nonmax.count_words(n) for n in range(1, order)]
    rho0 = spectral(bundle.nonmax).rho
    growth_const = max(bn / rho0 ** n for n, bn in enumerate(b))

    def truncated(z: float) -> float:
        acc = 0.0
        zp = z
        for bn in b:
            acc += bn * zp
            zp *= z
        return acc

    z_hi = 1.0 / rho0 - 1e-12
    if truncated(z_hi) < 1.0:
        raise FeasibilityError(
            f"truncated series stays below 1 up to 1/{rho0:.6g}; "
            f"increase order beyond {order}")
    z_lo = 0.0
    for _ in range(200):
        mid = 0.5 * (z_lo + z_hi)
        if truncated(mid) < 1.0:
            z_lo = mid
        else:
            z_hi = mid
    lam = 0.5 * (z_lo + z_hi)

    ratio = rho0 * lam
    if ratio >= 1.0:  # pragma: no cover - root lies below 1/rho0
        raise FeasibilityError("root estimate not below the tail radius")
    tail = growth_const * lam * ratio ** order / (1.0 - ratio)
    if tail > tail_tol:
        raise FeasibilityError(
            f"tail bound {tail:.3g} above {tail_tol:.3g}; "
            f"increase order beyond {order}")

    p = tuple(lam ** k * b[k - 1] for k in range(1, order + 1))
    mean_gap = sum(k * pk for k, pk in enumerate(p, start=1))
    alpha = 1.0 / (lam * mean_gap)
    return RenewalData(lam=lam, order=order, p=p, tail_bound=tail,
                       mean_gap=mean_gap, alpha=alpha)


# ---------------------------------------------------------------------------
# Cylinder events and probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderEvent:
    """A fixed assignment of rungs on the positions ``lo..lo+len-1``."""

    rungs: tuple[RungConfig, ...]
    lo: int = 0

    @classmethod
    def centered(cls, rungs: Sequence[Sequence[int]]) -> "CylinderEvent":
        """Place an odd-length assignment symmetrically around rung 0."""
        rungs = tuple(tuple(r) for r in rungs)
        if len(rungs) % 2 == 0:
            raise ValidationError("centered event needs odd length")
        return cls(rungs=rungs, lo=-(len(rungs) // 2))

    @classmethod
    def single(cls, rung: Sequence[int], at: int = 0) -> "CylinderEvent":
        return cls(rungs=(tuple(rung),), lo=at)

    def __post_init__(self):
        object.__setattr__(self, "rungs", tuple(tuple(r) for r in self.rungs))

    def __len__(self) -> int:
        return len(self.rungs)

    @property
    def hi(self) -> int:
        return self.lo + len(self.rungs) - 1

    def reflected(self) -> "CylinderEvent":
        return CylinderEvent(rungs=tuple(reversed(self.rungs)), lo=-self.hi)

    def shifted(self, by: int) -> "CylinderEvent":
        return CylinderEvent(rungs=self.rungs, lo=self.lo + by)

    def in_alphabet(self, graph: Graph) -> bool:
        alpha = enum_rungs(graph)
        return all(r in alpha for r in self.rungs)


@dataclass(frozen=True)
class CylinderProbability:
    value: float
    method: str
    valid: bool  # False when an event rung is not an admissible symbol
    detail: dict


def _state_rung_masks(automaton: CodingAutomaton) -> dict[RungConfig, np.ndarray]:
    masks: dict[RungConfig, np.ndarray] = {}
    for c in automaton.alphabet:
        masks[c] = np.array([1.0 if s.rung == c else 0.0
                             for s in automaton.states])
    return masks


def _parry_prob(bundle: _AutomatonBundle, event: CylinderEvent) -> float:
    chain = bundle.chain
    masks = _state_rung_masks(bundle.automaton)
    vec = chain.stationary * masks[event.rungs[0]]
    for c in event.rungs[1:]:
        vec = (vec @ chain.matrix) * masks[c]
    return float(vec.sum())


def _renewal_prob(bundle: _AutomatonBundle, event: CylinderEvent,
                  data: RenewalData, cut: float = 1e-14,
                  max_flank: int = 4096) -> float:
    """Sum of the renewal representation over the positions of the
    nearest maximal rung strictly left and right of the event window.

    Counting configurations between those renewals factorizes into a
    left flank with no maximal rung, the fixed event block, and a right
    flank with no maximal rung; the two flank sums are geometric in the
    root and truncated to ``cut``.
    """
    auto = bundle.automaton
    lam = data.lam
    nonmax = np.array([s.rung != bundle.cmax for s in auto.states])
    t = auto.matrix().astype(float)
    t0 = t * nonmax[None, :] * nonmax[:, None]
    start = np.array([0.0] * len(auto))
    for i in auto.start_states():
        start[i] = 1.0

    # forward: lam-weighted flank prefixes ending at a non-maximal state
    acc_f = np.zeros(len(auto))
    cur = lam * (start * nonmax)
    for _ in range(max_flank):
        acc_f += cur
        cur = lam * (cur @ t0)
        if cur.sum() < cut:
            break
    else:  # pragma: no cover
        raise FeasibilityError("left flank sum did not converge")
    # entering the event block: either no left flank (the block starts
    # the window) or one transition out of the flank
    masks = _state_rung_masks(auto)
    vec = (start + acc_f @ t) * masks[event.rungs[0]]
    for c in event.rungs[1:]:
        vec = (vec @ t) * masks[c]

    # backward: lam-weighted flank suffixes, including the empty one
    acc_b = np.ones(len(auto))
    cur = lam * (t0 @ np.ones(len(auto)))
    for _ in range(max_flank):
        acc_b += cur
        cur = lam * (t0 @ cur)
        if cur.sum() < cut:
            break
    else:  # pragma: no cover
        raise FeasibilityError("right flank sum did not converge")
    tail = np.ones(len(auto)) + lam * (t @ (acc_b * nonmax))
    # with ell_s = ell_t = 0 the nearest renewals hug the event block,
    # sitting len(event)+2 rungs apart
    base = lam ** (len(event.rungs) + 2)
    return float(data.alpha * base * (vec @ tail))


def _finite_dp_prob(bundle: _AutomatonBundle, event: CylinderEvent,
                    halfwidth: int, exact: bool
                    ) -> tuple[float, Optional[Fraction]]:
    """Exact probability of the event under the uniform measure on
    left-burnable windows ``[-halfwidth, halfwidth]``."""
    auto = bundle.automaton
    size = len(auto)
    window = Window(-halfwidth, halfwidth)
    if event.lo < window.n or event.hi > window.m:
        raise ValidationError("event window larger than the DP window")
    rung_states = {c: frozenset(i for i, s in enumerate(auto.states)
                                if s.rung == c) for c in auto.alphabet}
    starts = set(auto.start_states())
    fixed = {event.lo + j: rung_states[c]
             for j, c in enumerate(event.rungs)}

    vec = [1 if i in starts else 0 for i in range(size)]
    if window.n in fixed:
        vec = [v if i in fixed[window.n] else 0 for i, v in enumerate(vec)]
    for k in range(window.n + 1, window.m + 1):
        nxt = [0] * size
        for i, v in enumerate(vec):
            if v:
                for c, j in auto.delta[i].items():
                    nxt[j] += v
        if k in fixed:
            keep = fixed[k]
            nxt = [v if i in keep else 0 for i, v in enumerate(nxt)]
        vec = nxt
    numerator = sum(vec)
    denominator = auto.count_words(len(window))
    frac = Fraction(numerator, denominator)
    return float(frac), (frac if exact else None)


def cylinder_prob(graph: Graph, event: CylinderEvent, method: str = "parry", *,
                  renewal_order: int = DEFAULT_RENEWAL_ORDER,
                  dp_halfwidth: int = 32,
                  exact: bool = False) -> CylinderProbability:
    """Probability of a fixed rung assignment under the left-sided limit
    measure, by the chosen method.  Events containing an inadmissible
    rung have probability zero (flagged, not an error); an empty event
    is the full space."""
    if not event.rungs:
        return CylinderProbability(1.0, method, True, {})
    for r in event.rungs:
        if len(r) != graph.n:
            raise ValidationError(f"event rung {r} does not fit the base graph")
    if not event.in_alphabet(graph):
        return CylinderProbability(0.0, method, False,
                                   {"reason": "rung outside alphabet"})
    bundle = _AutomatonBundle.get(graph)
    if method == "parry":
        return CylinderProbability(_parry_prob(bundle, event), method, True, {})
    if method == "renewal":
        data = renewal_quantities(graph, renewal_order)
        value = _renewal_prob(bundle, event, data)
        return CylinderProbability(value, method, True,
                                   {"tail_bound": data.tail_bound})
    if method == "finite_dp":
        value, frac = _finite_dp_prob(bundle, event, dp_halfwidth, exact)
        detail = {"halfwidth": dp_halfwidth}
        if frac is not None:
            detail["exact"] = frac
        return CylinderProbability(value, method, True, detail)
    raise ValidationError(f"unknown method {method!r}")


def right_cylinder_prob(graph: Graph, event: CylinderEvent,
                        method: str = "parry", **kw) -> CylinderProbability:
    """Probability under the right-sided limit measure: the left-sided
    probability of the reflected event, exactly by construction."""
    return cylinder_prob(graph, event.reflected(), method, **kw)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_chain_windows(graph: Graph, width: int, count: int, seed: int
                         ) -> list[tuple[RungConfig, ...]]:
    """Draw rung windows from the stationary maximal-entropy chain and
    project states onto their rungs; deterministic per seed."""
    if width < 1 or count < 1:
        raise ValidationError("width and count must be >= 1")
    bundle = _AutomatonBundle.get(graph)
    chain = bundle.chain
    rng = np.random.default_rng(seed)
    size = len(bundle.automaton)
    cum_rows = np.cumsum(chain.matrix, axis=1)
    cum_rows[:, -1] = 1.0
    states = np.empty((count, width), dtype=np.int64)
    states[:, 0] = rng.choice(size, size=count, p=chain.stationary)
    u = rng.random((count, width))
    for j in range(1, width):
        rows = cum_rows[states[:, j - 1]]
        states[:, j] = (rows < u[:, j][:, None]).sum(axis=1)
    rungs = [s.rung for s in bundle.automaton.states]
    return [tuple(rungs[i] for i in row) for row in states]


def sample_window_config(graph: Graph, halfwidth: int, seed: int
                         ) -> LadderConfig:
    """One stationary-chain sample laid out on ``[-halfwidth, halfwidth]``."""
    rows = sample_chain_windows(graph, 2 * halfwidth + 1, 1, seed)[0]
    return LadderConfig.from_rungs(rows, start=-halfwidth)


def sample_finite_exact(graph: Graph, n: int, m: int, seed: int,
                        count: int = 1) -> list[LadderConfig]:
    """Exactly uniform samples of the left-burnable configurations on
    the window ``[n, m]``, by sequential draws proportional to integer
    suffix path counts in the automaton."""
    window = Window(n, m)
    length = len(window)
    bundle = _AutomatonBundle.get(graph)
    auto = bundle.automaton
    size = len(auto)
    # suffix[l][s]: words of length l starting at s
    suffix = [[1] * size]
    for _ in range(length - 1):
        prev = suffix[-1]
        suffix.append([sum(prev[t] for t in row) for row in auto.targets])
    rng = random.Random(seed)
    starts = auto.start_states()
    out = []
    for _ in range(count):
        weights = [(suffix[length - 1][s], s) for s in starts]
        state = _weighted_pick(rng, weights)
        word = [state]
        for step in range(1, length):
            rem = length - 1 - step
            weights = [(suffix[rem][t], t) for t in sorted(auto.delta[word[-1]].values())]
            state = _weighted_pick(rng, weights)
            word.append(state)
        rows = [auto.states[i].rung for i in word]
        out.append(LadderConfig.from_rungs(rows, start=n))
    return out


def _weighted_pick(rng: random.Random, weights: list[tuple[int, int]]) -> int:
    total = sum(w for w, _ in weights)
    if total <= 0:
        raise ValidationError("no admissible continuation")
    r = rng.randrange(total)
    acc = 0
    for w, item in weights:
        acc += w
        if r < acc:
            return item
    raise AssertionError("unreachable")  # pragma: no cover


# ---------------------------------------------------------------------------
# Boundary layers and the finite-window mixture
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryLayers:
    """Positions splitting a recurrent window into a left-burnable part
    and a right-burnable part, with the hatted variants skipping the
    extreme maximal rung.  Sentinels ``n-1`` / ``m+1`` mean "none"."""

    sigma_left: int
    sigma_right: int
    hat_left: int
    hat_right: int
    overlap: bool  # the two one-sided parts overlap (sigma_left >= sigma_right)


def boundary_layer(graph: Graph, config: LadderConfig) -> BoundaryLayers:
    window = config.window
    heights = config.heights_map()
    if not full_burnable(graph, heights).success:
        raise ValidationError("configuration is not recurrent")
    cmax = max_rung(graph)
    rungs = {k: tuple(int(h) for h in config.heights[k - window.n])
             for k in window.rungs}
    max_positions = [k for k in window.rungs if rungs[k] == cmax]

    def prefix(k: int) -> dict:
        return {(x, j): h for (x, j), h in heights.items() if j <= k}

    def suffix(k: int) -> dict:
        return {(x, j): h for (x, j), h in heights.items() if j >= k}

    sigma_left = window.n - 1
    for k in reversed(max_positions):
        if left_burnable(graph, prefix(k)).success:
            sigma_left = k
            break
    sigma_right = window.m + 1
    for k in max_positions:
        if right_burnable(graph, suffix(k)).success:
            sigma_right = k
            break
    hat_right = window.n - 1
    for k in reversed(max_positions):
        if k < sigma_right:
            hat_right = k
            break
    hat_left = window.m + 1
    for k in max_positions:
        if k > sigma_left:
            hat_left = k
            break
    return BoundaryLayers(sigma_left=sigma_left, sigma_right=sigma_right,
                          hat_left=hat_left, hat_right=hat_right,
                          overlap=sigma_left >= sigma_right)


@dataclass(frozen=True)
class MixtureRow:
    window: Window
    weight_left: float
    measured: float
    predicted: float
    gap: float
    total_configs: int


def mixture_experiment(graph: Graph, windows: Iterable[Window],
                       event: CylinderEvent, mode: str = "enumerate", *,
                       samples: int = 10000, seed: int = 0,
                       max_enum: int = 10 ** 7) -> list[MixtureRow]:
    """Compare the uniform-recurrent probability of an event on finite
    windows against the convex mixture of the two one-sided limits.

    The split point between the left-burnable and right-burnable parts
    of a recurrent window is close to uniform, and an event sees the
    left-sided measure exactly when the split lands to its right; the
    left weight is therefore the fraction of the window to the event's
    right.  (For an event centered in a symmetric window both
    orientations of the weight agree at one half; the asymmetric cases
    here were checked against exact enumeration.)

    ``enumerate`` computes the finite-window probability exactly;
    ``sample`` draws uniformly from the same exhaustive enumeration.
    """
    mu_l = cylinder_prob(graph, event, "parry").value
    mu_r = right_cylinder_prob(graph, event, "parry").value
    rows = []
    for window in windows:
        length = len(window)
        if event.lo < window.n or event.hi > window.m:
            raise ValidationError(f"event does not fit window {window}")
        base = len(single_rung_recurrent(graph))
        if base ** length > max_enum:
            raise FeasibilityError(
                f"enumeration needs {base}**{length} > max_enum={max_enum}")
        offset = event.lo - window.n
        block = event.rungs
        matches = 0
        total = 0
        matched_list = []
        for cfg in iter_recurrent(graph, length):
            total += 1
            hit = cfg[offset:offset + len(block)] == block
            matches += hit
            if mode == "sample":
                matched_list.append(hit)
        if mode == "enumerate":
            measured = matches / total
        elif mode == "sample":
            rng = random.Random(seed)
            draws = rng.choices(matched_list, k=samples)
            measured = sum(draws) / samples
        else:
            raise ValidationError(f"unknown mode {mode!r}")
        if window.m == window.n:
            weight = 0.5
        else:
            center = 0.5 * (event.lo + event.hi)
            weight = (window.m - center) / (window.m - window.n)
            weight = min(1.0, max(0.0, weight))
        predicted = weight * mu_l + (1 - weight) * mu_r
        rows.append(MixtureRow(window=window, weight_left=weight,
                               measured=measured, predicted=predicted,
                               gap=abs(measured - predicted),
                               total_configs=total))
    return rows


__all__ = [
    "BoundaryLayers", "CylinderEvent", "CylinderProbability", "MixtureRow",
    "RenewalData", "boundary_layer", "cylinder_prob", "mixture_experiment",
    "renewal_quantities", "right_cylinder_prob", "sample_chain_windows",
    "sample_finite_exact", "sample_window_config",
    "DEFAULT_RENEWAL_ORDER",
]
