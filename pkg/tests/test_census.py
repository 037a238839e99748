import itertools
import math

import pytest

from laddersand.burning import (full_burnable, max_rung, right_burnable,
                                window_heights)
from laddersand.census import (count_series, entropy_bounds, enum_rungs,
                               iter_left_burnable, iter_recurrent,
                               renewal_identity_check, single_rung_recurrent)
from laddersand.errors import FeasibilityError, ValidationError

I01_A = (5, 19, 71, 265, 989, 3691, 13775, 51409)
I01_B = (4, 10, 22, 46, 94, 190, 382, 766)


def test_alphabet_path2(path2):
    assert enum_rungs(path2).rungs == ((1, 3), (2, 3), (3, 1), (3, 2), (3, 3))


def test_alphabet_point(point):
    assert enum_rungs(point).rungs == ((2,),)


def test_alphabet_cycle3(cycle3):
    rungs = enum_rungs(cycle3)
    assert (4, 4, 4) in rungs
    # the one-deficit rungs exist for every vertex
    for x in range(3):
        c = tuple(3 if z == x else 4 for z in range(3))
        assert c in rungs
    assert len(rungs) == 34


@pytest.mark.parametrize("name", ["path2", "path3"])
def test_alphabet_is_recurrent_with_max(name, request):
    # admissible rungs = single-rung recurrent vectors holding a maximal
    # height somewhere
    graph = request.getfixturevalue(name)
    alpha = set(enum_rungs(graph).rungs)
    expected = set()
    for h in itertools.product(*[range(1, m + 1) for m in graph.max_height]):
        if not full_burnable(graph, window_heights([h], start=0)).success:
            continue
        if any(h[x] == graph.max_height[x] for x in range(graph.n)):
            expected.add(h)
    assert alpha == expected


def test_counts_path2(path2):
    a = count_series(path2, "L", 8)
    b = count_series(path2, "L0", 8)
    assert a.values == I01_A
    assert b.values == I01_B
    assert a[1] == 5 and a[2] == 19 and b[1] == 4 and b[2] == 10


def test_counts_point(point):
    assert count_series(point, "L", 6).values == (1,) * 6
    assert count_series(point, "L0", 4).values == (0,) * 4


def test_count_series_validation(path2):
    with pytest.raises(ValidationError):
        count_series(path2, "X", 3)
    with pytest.raises(ValidationError):
        count_series(path2, "L", 0)
    with pytest.raises(ValidationError):
        count_series(path2, "L", 3, method="guess")
    with pytest.raises(ValidationError):
        count_series(path2, "S", 3, method="automaton")
    with pytest.raises(ValidationError):
        count_series(path2, "REC", 3, method="automaton")


def test_brute_cap(path2):
    with pytest.raises(FeasibilityError, match="max_enum"):
        count_series(path2, "L", 12)  # 5**12 over the default cap


def test_renewal_identity_small(path2, point):
    a = count_series(path2, "L", 8)
    b = count_series(path2, "L0", 8)
    assert renewal_identity_check(a, b, 8)
    # degenerate graph: identity collapses to a_n = a_{n-1}
    ap = count_series(point, "L", 5)
    bp = count_series(point, "L0", 5)
    assert renewal_identity_check(ap, bp, 5)


def test_renewal_identity_guards(path2):
    a = count_series(path2, "L", 4)
    b = count_series(path2, "L0", 4)
    with pytest.raises(ValidationError):
        renewal_identity_check(b, a, 4)
    with pytest.raises(ValidationError):
        renewal_identity_check(a, b, 9)


def test_submultiplicative(path2):
    a = count_series(path2, "L", 8).values
    for n in range(1, 9):
        for m in range(1, 9 - n):
            assert a[n + m - 1] <= a[n - 1] * a[m - 1]


def test_superadditive_with_renewal_gap(path2):
    a = count_series(path2, "L", 8).values
    for n in range(1, 8):
        for m in range(1, 8 - n):
            assert a[n + m] >= a[n - 1] * a[m - 1]


def test_renewal_factorization(path2):
    # windows whose rung k is maximal factor into independent halves
    cmax = max_rung(path2)
    a = (1,) + count_series(path2, "L", 6).values
    for n in range(1, 7):
        seqs = list(iter_left_burnable(path2, n))
        assert len(seqs) == a[n]
        for k in range(1, n + 1):
            hits = sum(1 for s in seqs if s[k - 1] == cmax)
            assert hits == a[k - 1] * a[n - k], (n, k)


def test_reflection_set_equality(path2):
    # reflecting every left-burnable window yields exactly the
    # right-burnable windows
    n = 4
    lefts = {tuple(reversed(s)) for s in iter_left_burnable(path2, n)}
    alphabet = enum_rungs(path2).rungs
    rights = {s for s in itertools.product(alphabet, repeat=n)
              if right_burnable(path2, window_heights(s)).success}
    assert lefts == rights


def test_variant_chain(path2):
    a = count_series(path2, "L", 6).values
    b = count_series(path2, "L0", 6).values
    s = count_series(path2, "S", 6).values
    r = count_series(path2, "S0", 6).values
    for i in range(6):
        assert r[i] <= s[i] <= a[i]
        assert b[i] <= a[i]


def test_recurrent_counts(path2):
    rec = count_series(path2, "REC", 4)
    assert rec.values[0] == 8  # stable minus the mutually-starved pair
    a = count_series(path2, "L", 4).values
    assert all(x <= y for x, y in zip(a, rec.values))
    assert sum(1 for _ in iter_recurrent(path2, 3)) == rec.values[2]


def test_single_rung_recurrent_point(point):
    assert single_rung_recurrent(point) == ((1,), (2,))


def test_brute_matches_automaton(path2, path3):
    for graph, nmax in ((path2, 6), (path3, 4)):
        brute = count_series(graph, "L", nmax, max_enum=10 ** 8)
        auto = count_series(graph, "L", nmax, method="automaton")
        assert brute.values == auto.values
        brute0 = count_series(graph, "L0", nmax, max_enum=10 ** 8)
        auto0 = count_series(graph, "L0", nmax, method="automaton")
        assert brute0.values == auto0.values


def test_brute_matches_automaton_wider_graphs():
    from laddersand.graphs import builtin_graph
    for name, nmax in (("path4", 3), ("cycle4", 2)):
        graph = builtin_graph(name)
        brute = count_series(graph, "L", nmax, max_enum=10 ** 8)
        auto = count_series(graph, "L", nmax, method="automaton")
        assert brute.values == auto.values


def test_threads_partition_agrees(path2):
    seq = count_series(path2, "L", 6)
    par = count_series(path2, "L", 6, threads=4)
    assert seq.values == par.values


def test_entropy_bounds(path2, point):
    a = count_series(path2, "L", 8)
    bounds = entropy_bounds(a)
    target = math.log(2 + math.sqrt(3))
    # uppers decrease toward the growth rate, lowers stay below it
    assert all(u >= target - 1e-12 for u in bounds.upper)
    assert all(l <= target + 1e-12 for l in bounds.lower)
    assert bounds.upper[-1] < bounds.upper[0]
    assert bounds.estimate == min(bounds.upper)
    exact = entropy_bounds(a, exact_rate=target)
    assert exact.estimate == target

    p = entropy_bounds(count_series(point, "L", 5))
    assert all(u == 0.0 for u in p.upper)


def test_symmetric_strictly_smaller_at_depth_8(path2):
    s8 = count_series(path2, "S", 8).values[7]
    a8 = I01_A[7]
    assert math.log(s8) / 8 < math.log(a8) / 8
