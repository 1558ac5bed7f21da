import itertools
import math
import random

import networkx as nx
import pytest

from consensus_lab.errors import ResourceLimitError, ValidationError
from consensus_lab.graphs import (
    NetworkModel,
    async_model,
    complete_graph,
    deaf_family,
    identity_graph,
    psi_model,
    random_graph,
    two_agent_graph,
    two_agent_graphs,
)
from consensus_lab.model_analysis import (
    Partition,
    alpha_diameter,
    alpha_related,
    alpha_star,
    analyze_model,
    async_contraction_lower_bound,
    asymptotic_solvable,
    beta_classes,
    beta_oracle,
    closure_holds,
    consensus_solvable,
    contraction_lower_bound,
    every_agent_deaf,
    fingerprint,
    is_source_incompatible,
    min_alpha_diameter_unsolvable,
)


def _random_model(seed: int) -> NetworkModel:
    rng = random.Random(seed)
    size = rng.randint(1, 5)
    return NetworkModel(tuple(random_graph(3, rng, density=rng.choice([0.3, 0.6])) for _ in range(size)))


class TestPartition:
    def test_blocks_sorted_by_smallest_member(self):
        p = Partition.from_components([{3, 2}, {0}, {1, 4}])
        assert p.as_lists(one_based=False) == [[0], [1, 4], [2, 3]]
        assert p.as_lists() == [[1], [2, 5], [3, 4]]

    def test_overlapping_blocks_rejected(self):
        with pytest.raises(ValidationError):
            Partition.from_components([{0, 1}, {1, 2}])

    def test_refines(self):
        fine = Partition.from_components([{0}, {1}, {2}])
        coarse = Partition.from_components([{0, 1}, {2}])
        assert fine.refines(coarse)
        assert not coarse.refines(fine)
        assert coarse.block_of(1) == frozenset({0, 1})


class TestAlphaRelation:
    def test_fingerprint_is_per_agent(self):
        g = complete_graph(3)
        assert fingerprint(g, [2, 0]) == (frozenset(range(3)), frozenset(range(3)))

    def test_two_agent_relations(self):
        model = two_agent_graphs()
        h0 = model.index(two_agent_graph(0))
        h1 = model.index(two_agent_graph(1))
        h2 = model.index(two_agent_graph(2))
        assert alpha_related(model, h0, h1).witnesses == frozenset({h2})
        assert alpha_related(model, h0, h2).witnesses == frozenset({h1})
        assert not alpha_related(model, h1, h2).related

    def test_alpha_star_two_agents_single_block(self):
        assert len(alpha_star(two_agent_graphs())) == 1

    @pytest.mark.parametrize("seed", range(50))
    def test_relation_is_symmetric(self, seed):
        model = _random_model(seed)
        for g, h in itertools.product(range(len(model)), repeat=2):
            assert alpha_related(model, g, h).witnesses == alpha_related(model, h, g).witnesses


class TestBetaClasses:
    def test_two_agent_model_unsolvable(self):
        model = two_agent_graphs()
        assert len(beta_classes(model)) == 1
        assert not consensus_solvable(model)

    def test_two_opposite_graphs_solvable(self):
        model = NetworkModel((two_agent_graph(1), two_agent_graph(2)))
        assert len(beta_classes(model)) == 2
        assert consensus_solvable(model)

    def test_deaf_family_unsolvable(self):
        assert not consensus_solvable(deaf_family(complete_graph(3)))

    def test_single_rooted_graph_solvable(self):
        assert consensus_solvable(NetworkModel((complete_graph(4),)))

    def test_closure_of_beta(self):
        model = psi_model(5)
        assert closure_holds(model, beta_classes(model))

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_brute_force_oracle(self, seed):
        model = _random_model(seed)
        assert beta_classes(model) == beta_oracle(model)

    @pytest.mark.parametrize("seed", range(100))
    def test_each_class_is_a_single_block_on_its_own(self, seed):
        model = _random_model(seed)
        for block in beta_classes(model).blocks:
            submodel = model.subset(sorted(block))
            assert len(alpha_star(submodel)) == 1
            assert len(beta_classes(submodel)) == 1

    def test_oracle_size_limit(self):
        with pytest.raises(ResourceLimitError):
            beta_oracle(async_model(3, 1))


class TestSolvabilityPredicates:
    def test_source_incompatible(self):
        assert is_source_incompatible([two_agent_graph(1), two_agent_graph(2)])
        assert not is_source_incompatible([two_agent_graph(0), two_agent_graph(1)])
        assert is_source_incompatible([identity_graph(2)])

    def test_source_incompatible_needs_graphs(self):
        with pytest.raises(ValidationError):
            is_source_incompatible([])

    def test_asymptotic_solvable(self):
        assert asymptotic_solvable(two_agent_graphs())
        assert not asymptotic_solvable(NetworkModel((identity_graph(2), complete_graph(2))))

    @pytest.mark.parametrize("seed", range(100))
    def test_asymptotic_solvable_iff_every_graph_has_a_root(self, seed):
        model = _random_model(seed)

        def has_root(graph):
            digraph = graph.to_networkx()
            return any(len(nx.descendants(digraph, v)) == graph.n - 1 for v in digraph)

        assert asymptotic_solvable(model) == all(has_root(g) for g in model)

    def test_every_agent_deaf(self):
        assert every_agent_deaf(deaf_family(complete_graph(4)))
        assert not every_agent_deaf(NetworkModel((complete_graph(3),)))


class TestAlphaDiameter:
    def test_two_agent_model(self):
        assert alpha_diameter(two_agent_graphs()) == 2

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_deaf_complete_graph(self, n):
        assert alpha_diameter(deaf_family(complete_graph(n))) == 1

    def test_single_graph(self):
        assert alpha_diameter(NetworkModel((complete_graph(3),))) == 1

    def test_disconnected(self):
        assert math.isinf(alpha_diameter(NetworkModel((two_agent_graph(1), two_agent_graph(2)))))

    @pytest.mark.parametrize("n,f", [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2)])
    def test_async_model_bounded_by_ceiling(self, n, f):
        assert alpha_diameter(async_model(n, f)) <= math.ceil(n / f)

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_pairwise_breadth_first_search(self, seed):
        model = _random_model(seed)
        related = nx.Graph()
        related.add_nodes_from(range(len(model)))
        related.add_edges_from(
            (g, h)
            for g, h in itertools.combinations(range(len(model)), 2)
            if alpha_related(model, g, h).related
        )
        if not nx.is_connected(related):
            expected = math.inf
        else:
            lengths = dict(nx.all_pairs_shortest_path_length(related))
            expected = max([1] + [d for row in lengths.values() for d in row.values()])
        assert alpha_diameter(model) == expected


class TestContractionBounds:
    def test_two_agent_rate_one_third(self):
        assert min_alpha_diameter_unsolvable(two_agent_graphs()) == 2
        assert contraction_lower_bound(two_agent_graphs()) == (2, pytest.approx(1 / 3))

    def test_solvable_model_has_no_bound(self):
        diameter, rate = contraction_lower_bound(NetworkModel((complete_graph(3),)))
        assert math.isinf(diameter)
        assert rate == 0.0

    def test_subset_cap(self):
        with pytest.raises(ResourceLimitError):
            min_alpha_diameter_unsolvable(async_model(3, 1))

    def test_async_rate(self):
        assert async_contraction_lower_bound(3, 1) == pytest.approx(1 / 4)
        assert async_contraction_lower_bound(5, 2) == pytest.approx(1 / 4)
        with pytest.raises(ValidationError):
            async_contraction_lower_bound(3, 0)


class TestAnalyzeModel:
    def test_two_agent_report(self):
        report = analyze_model(two_agent_graphs())
        assert report["n"] == 2
        assert report["graphs"] == 3
        assert report["consensus_solvable"] is False
        assert report["alpha_diameter"] == 2
        assert report["min_unsolvable_alpha_diameter"] == 2
        assert report["contraction_rate_lower_bound"] == pytest.approx(1 / 3)
        assert report["beta_blocks"] == [[1, 2, 3]]
        assert report["source_incompatible_blocks"] == [[1, 2, 3]]

    def test_large_model_skips_submodels(self):
        report = analyze_model(async_model(3, 1))
        assert report["min_unsolvable_alpha_diameter"] is None
        assert report["contraction_rate_lower_bound"] is None
