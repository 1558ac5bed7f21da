from fractions import Fraction

import pytest

from consensus_lab.algorithms import get_algorithm
from consensus_lab.decision import (
    certify_diameter_lower_bound,
    certify_lower_bound,
    check_agreement,
)
from consensus_lab.errors import ValidationError
from consensus_lab.graphs import NetworkModel, complete_graph, two_agent_graphs


class TestCheckAgreement:
    def test_two_agent_exhaustive(self):
        check = check_agreement("two_agent", 2, Fraction(1), Fraction(1, 9))
        assert check.decision_round == 2
        assert check.exhaustive
        assert check.patterns == 9
        assert check.max_gap == Fraction(1, 9)
        assert check.ok

    def test_two_agent_sampled_above_cap(self):
        check = check_agreement("two_agent", 2, Fraction(1), Fraction(1, 3**8), samples=20, seed=1)
        assert check.decision_round == 8
        assert not check.exhaustive
        assert check.patterns == 20
        assert check.ok

    def test_nonsplit_midpoint(self):
        check = check_agreement("nonsplit_midpoint", 4, 1.0, 0.1, samples=50, seed=3)
        assert check.decision_round == 4
        assert check.all_decided
        assert check.valid
        assert check.max_gap <= 1 / 16 + 1e-12
        assert check.ok

    def test_rooted_amortized(self):
        check = check_agreement("rooted_amortized", 5, 1.0, 0.25, samples=20, seed=5)
        assert check.decision_round == 8
        assert check.ok
        assert check.as_dict()["eps_agreement"] is True

    def test_progress(self):
        seen = []
        check_agreement(
            "nonsplit_midpoint", 3, 1.0, 0.5, samples=4, seed=0,
            progress_callback=lambda done, total: seen.append((done, total)),
        )
        assert seen == [(1, 4), (2, 4), (3, 4), (4, 4)]

    def test_unknown_regime(self):
        with pytest.raises(ValidationError):
            check_agreement("crash", 3, 1, 0.1)


class TestCertifyLowerBound:
    def test_two_agent(self):
        certificate = certify_lower_bound("two_agent", 2, Fraction(1), Fraction(1, 10))
        assert certificate.round == 2
        assert certificate.delta_lb == pytest.approx(1 / 9, rel=1e-6)
        assert certificate.certified

    def test_nonsplit(self):
        certificate = certify_lower_bound("nonsplit_midpoint", 4, Fraction(1), Fraction(1, 10))
        assert certificate.round == 3
        assert certificate.delta_lb == pytest.approx(1 / 8, rel=1e-6)
        assert certificate.certified

    def test_rooted(self):
        certificate = certify_lower_bound("rooted_amortized", 5, Fraction(1), Fraction(1, 10))
        assert certificate.round == 9
        assert certificate.delta_lb > Fraction(1, 10)
        assert certificate.certified
        assert certificate.as_dict()["lower_bound_round"] == 9

    def test_no_round_needed(self):
        certificate = certify_lower_bound("nonsplit_midpoint", 3, Fraction(1, 2), Fraction(1))
        assert certificate.round is None
        assert certificate.delta_lb is None
        assert certificate.certified

    def test_matches_agreement_round(self):
        delta, eps = Fraction(1), Fraction(1, 10)
        certificate = certify_lower_bound("two_agent", 2, delta, eps)
        check = check_agreement("two_agent", 2, delta, eps)
        assert certificate.round + 1 == check.decision_round


class TestDiameterLowerBound:
    def test_two_agent_model(self):
        certificate = certify_diameter_lower_bound(
            two_agent_graphs(), get_algorithm("thirds"), Fraction(1), Fraction(1, 18)
        )
        assert certificate.alpha_diameter == 2
        assert certificate.round == 1
        assert certificate.initial == [Fraction(1), Fraction(0)]
        assert certificate.certified

    def test_solvable_model_has_no_bound(self):
        certificate = certify_diameter_lower_bound(
            NetworkModel((complete_graph(3),)), get_algorithm("midpoint"), 1, 0.1
        )
        assert certificate.round is None
        assert certificate.certified
