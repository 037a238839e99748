import itertools
import json
import math

import numpy as np
import pytest

from laddersand.burning import max_rung
from laddersand.census import count_series, enum_rungs
from laddersand.coding import (build_coding, check_transitive, decode, encode,
                               influence_maps_monotone, parry_chain, restrict,
                               spectral)
from laddersand.errors import FeasibilityError, ValidationError
from laddersand.measures import sample_chain_windows

PRINTED_MATRIX = np.array([
    [1, 1, 1, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 0, 0],
    [1, 0, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 0, 1],
    [1, 0, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 0, 1],
], dtype=np.int64)


@pytest.fixture(scope="module")
def auto2(path2):
    return build_coding(path2)


def test_state_count(auto2):
    assert len(auto2) == 7
    assert len(auto2.inclusion) == 5


def test_permutation_equivalent_to_printed_matrix(auto2):
    t = auto2.matrix()
    for perm in itertools.permutations(range(7)):
        p = np.array(perm)
        if (t[np.ix_(p, p)] == PRINTED_MATRIX).all():
            return
    pytest.fail("no permutation matches the printed 7-state matrix")


def test_max_state_hub(auto2, path2):
    # every state reaches the all-maximal state in one step, and the
    # all-maximal state reaches every first-rung state in one step
    icmax = auto2.inclusion[max_rung(path2)]
    for row in auto2.delta:
        assert icmax in row.values()
    assert set(auto2.delta[icmax].values()) == set(auto2.inclusion.values())


def test_transitive(auto2, point, cycle3):
    irr, p = check_transitive(auto2)
    assert irr and p == 3
    a1 = build_coding(point)
    assert check_transitive(a1) == (True, 1)
    ac = build_coding(cycle3)
    irr, p = check_transitive(ac)
    assert irr and p is not None


def test_point_automaton(point):
    a1 = build_coding(point)
    assert len(a1) == 1
    assert a1.matrix().tolist() == [[1]]
    assert a1.count_words(5) == 1
    assert abs(spectral(a1).rho - 1.0) < 1e-12


def test_spectral_path2(auto2):
    spec = spectral(auto2)
    assert abs(spec.rho - (2 + math.sqrt(3))) < 1e-9
    assert spec.residual_right < 1e-12 and spec.residual_left < 1e-12
    assert spec.strictly_positive
    assert abs(spec.entropy - math.log(2 + math.sqrt(3))) < 1e-9


def test_restricted_growth_rate(auto2, path2):
    rest = restrict(auto2, lambda c: c != max_rung(path2))
    assert len(rest) == 6
    spec = spectral(rest)
    assert abs(spec.rho - 2.0) < 1e-9
    assert not spec.strictly_positive
    with pytest.raises(ValidationError):
        parry_chain(rest, spec)


def test_restrict_guards(auto2):
    with pytest.raises(ValidationError):
        restrict(auto2, lambda c: False)
    same = restrict(auto2, lambda c: True)
    assert len(same) == len(auto2)
    assert all(same.count_words(n) == auto2.count_words(n) for n in (1, 3, 5))


def test_restricted_counts(auto2, path2):
    rest = restrict(auto2, lambda c: c != max_rung(path2))
    assert rest.count_words(2) == 10
    b = count_series(path2, "L0", 7)
    assert tuple(rest.count_words(n) for n in range(1, 8)) == b.values
    assert all(rest.count_words(n) <= auto2.count_words(n) for n in range(1, 8))


def test_counts_match_brute(auto2, path2):
    a = count_series(path2, "L", 8)
    assert tuple(auto2.count_words(n) for n in range(1, 9)) == a.values


def test_parry_chain(auto2, path2):
    chain = parry_chain(auto2)
    assert np.abs(chain.matrix.sum(axis=1) - 1).max() < 1e-12
    assert np.abs(chain.stationary @ chain.matrix - chain.stationary).max() < 1e-12
    icmax = auto2.inclusion[max_rung(path2)]
    assert abs(chain.stationary[icmax] - (math.sqrt(3) - 1) / 2) < 1e-9
    assert abs(chain.entropy_rate() - math.log(2 + math.sqrt(3))) < 1e-9


def test_encode_decode(auto2):
    word = encode(auto2, [(3, 1), (3, 2), (3, 3)])
    assert word is not None
    mid = auto2.states[word[1]]
    assert mid.rung == (3, 2) and mid.burnt != auto2.graph.full_mask
    assert decode(auto2, word) == ((3, 1), (3, 2), (3, 3))

    assert encode(auto2, [(3, 1), (1, 3)]) is None
    assert encode(auto2, [(3, 1), (3, 1)]) is None
    with pytest.raises(ValidationError):
        encode(auto2, [(2, 2)])
    with pytest.raises(ValidationError):
        encode(auto2, [])


def test_encode_accepts_exactly_burnable(auto2, path2):
    from laddersand.burning import left_burnable, window_heights
    alphabet = enum_rungs(path2).rungs
    for seq in itertools.product(alphabet, repeat=4):
        word = encode(auto2, seq)
        expected = left_burnable(path2, window_heights(seq)).success
        assert (word is not None) == expected
        if word is not None:
            assert decode(auto2, word) == seq


def test_decode_encode_on_samples(auto2, path2):
    for window in sample_chain_windows(path2, 10, 300, seed=17):
        word = encode(auto2, window)
        assert word is not None
        assert decode(auto2, word) == window


def test_max_states_cap(path3):
    with pytest.raises(FeasibilityError):
        build_coding(path3, max_states=3)


def test_monotonicity_report(auto2, path3, cycle3):
    # recorded as data; the construction never relies on it
    results = {
        "path2": influence_maps_monotone(auto2),
        "path3": influence_maps_monotone(build_coding(path3)),
        "cycle3": influence_maps_monotone(build_coding(cycle3)),
    }
    print(f"influence-map monotonicity: {results}")
    assert all(isinstance(v, bool) for v in results.values())


def test_json_stable_across_builds(path2):
    a = build_coding(path2).dumps()
    b = build_coding(path2).dumps()
    assert a == b
    doc = json.loads(a)
    assert len(doc["states"]) == 7
    assert doc["alphabet"] == [[1, 3], [2, 3], [3, 1], [3, 2], [3, 3]]
    assert all(len(s["influence"]) == 4 for s in doc["states"])


def test_path3_automaton_counts(path3):
    auto = build_coding(path3)
    a = count_series(path3, "L", 4, max_enum=10 ** 8)
    assert tuple(auto.count_words(n) for n in range(1, 5)) == a.values
