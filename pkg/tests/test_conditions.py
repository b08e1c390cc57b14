"""Rank conditions and the private-monitoring identifiability checks."""

import numpy as np
import pytest

from npdshare import (
    GameSpec,
    LinearGain,
    check_c1,
    check_c2,
    check_c3,
    individual_full_rank,
    minmax,
    numeric_rank,
    pairwise_full_rank,
    theorem_preconditions,
)
from npdshare.conditions import (
    signal_matrix_individual_raw,
    signal_matrix_pairwise,
)
from npdshare.errors import ConditionInapplicableError, DomainError


def test_numeric_rank_basics():
    assert numeric_rank(np.zeros((3, 3))) == 0
    assert numeric_rank(np.eye(4)) == 4
    assert numeric_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    # near-dependence below the relative tolerance collapses
    m = np.array([[1.0, 2.0], [2.0, 4.0 + 1e-12]])
    assert numeric_rank(m) == 1
    assert numeric_rank(m, tol=1e-15) == 2


def test_individual_signal_matrix_frozen_rows():
    mat = signal_matrix_individual_raw((0, 0), 0, 0.9, 0.1)
    assert np.allclose(mat[0], [0.81, 0.09, 0.09, 0.01], atol=1e-15)
    assert np.allclose(mat[1], [0.09, 0.81, 0.01, 0.09], atol=1e-15)
    assert numeric_rank(mat) == 2


def test_individual_rank_deficient_when_uninformative():
    # alpha == epsilon: both actions induce the same signal distribution
    mat = signal_matrix_individual_raw((0, 0), 0, 0.3, 0.3)
    assert numeric_rank(mat) == 1


def test_individual_full_rank_all_firms(spec2, spec3):
    for spec in (spec2, spec3):
        for i in range(spec.n_firms):
            rep = individual_full_rank(spec, minmax(spec, i).profile, i)
            assert rep.holds
            assert rep.evidence["rank"] == 2


def test_pairwise_full_rank_is_three(spec2):
    rep = pairwise_full_rank(spec2, (1, 1), 0, 1)
    assert rep.holds and rep.evidence["rank"] == 3
    mat = signal_matrix_pairwise(spec2, (1, 1), 0, 1)
    assert mat.shape == (4, 4)
    # the two prescribed-action rows coincide, so rank 4 is unreachable
    assert np.allclose(mat[1], mat[3])


def test_pairwise_full_rank_across_sizes():
    for n in range(2, 7):
        spec = GameSpec(n, LinearGain(3.0), 1.0, 0.9, 0.1, 0.9)
        rep = pairwise_full_rank(spec, (1,) * n, 0, n - 1)
        assert rep.holds, n
        assert rep.evidence["required"] == 3


def test_pairwise_rejects_same_firm(spec2):
    with pytest.raises(DomainError):
        pairwise_full_rank(spec2, (1, 1), 0, 0)


def test_c1_holds_for_three_and_four_firms():
    for n in (3, 4):
        spec = GameSpec(n, LinearGain(3.0), 1.0, 0.9, 0.1, 0.9)
        for firm in range(n):
            rep = check_c1(spec, firm)
            assert rep.holds, (n, firm)
            for entry in rep.evidence["deviators"]:
                assert entry["holds"]


def test_c2_c3_hold_for_three_and_four_firms():
    for n in (3, 4):
        spec = GameSpec(n, LinearGain(3.0), 1.0, 0.9, 0.1, 0.9)
        for r in [(0,) * n, (1,) * n]:
            rep2 = check_c2(spec, r, 0, 1)
            rep3 = check_c3(spec, r, 0, 1)
            assert rep2.holds and rep3.holds, (n, r)


def test_c2_rejects_two_firm_games(spec2):
    # with N = 2 removing both firms of a pair leaves no observer
    with pytest.raises(ConditionInapplicableError):
        check_c2(spec2, (1, 1), 0, 1)


def test_flm_preconditions_bundle(spec2, spec3):
    for spec in (spec2, spec3):
        rep = theorem_preconditions(spec, "flm")
        assert rep.holds
        assert rep.context["n_firms"] == spec.n_firms


def test_km_preconditions_hold_for_three_firms(spec3):
    rep = theorem_preconditions(spec3, "km")
    assert rep.holds


def test_km_inapplicable_for_two_firms(spec2):
    rep = theorem_preconditions(spec2, "km")
    assert not rep.holds
    assert "more than two firms" in rep.evidence["reason"]


def test_theorem_name_validated(spec2):
    with pytest.raises(DomainError):
        theorem_preconditions(spec2, "nonsense")


def test_report_text_structure(spec3):
    text = theorem_preconditions(spec3, "flm").to_text()
    assert text.startswith("condition: flm_preconditions")
    assert "holds: true" in text
    assert "- condition: pairwise_full_rank" in text
