import logging

import numpy as np
import pytest

from distfobs.exception import EmptySelection, NoFeasibleLeaderSet
from distfobs.leaderselect import (
    SearchCaps,
    build_sigma,
    centralized_coupling,
    certificate_for,
    check_darouach,
    check_feasible,
    detectable_subspace_dim,
    enumerate_minimal_leader_sets,
    observable_subspace_dim,
    pbh_detectable,
    reduces_to_state_estimation,
    select_functional_leader_set,
)
from distfobs.sysmodel import RowSelection, SystemModel


class TestFeasibility:
    def test_motivating_single_leader(self, motivating_model):
        cert = certificate_for(motivating_model, {1})
        assert cert.feasible
        assert cert.sigma_rank == 2

    def test_illustration_rows(self, illustration_model):
        m = illustration_model
        first = check_feasible(m, {1}, RowSelection.from_mapping({1: [0]}))
        second = check_feasible(m, {1}, RowSelection.from_mapping({1: [1]}))
        both = certificate_for(m, {1})
        assert first.feasible and first.sigma_rank == 2
        assert not second.cond_rank_holds
        assert both.feasible and both.sigma_rank == 3

    def test_two_sensor_claims(self, two_sensor_model):
        m = two_sensor_model
        assert certificate_for(m, {1}).feasible
        assert not certificate_for(m, {2}).feasible
        assert certificate_for(m, {1, 2}).feasible

    def test_unstable_mode_hidden(self, undetectable_model):
        cert = certificate_for(undetectable_model, {1})
        assert cert.cond_rank_holds
        assert not cert.cond_detect_holds
        assert not cert.feasible

    def test_empty_inputs(self, motivating_model):
        with pytest.raises(EmptySelection):
            check_feasible(motivating_model, [], RowSelection.from_mapping({1: [0]}))
        with pytest.raises(EmptySelection):
            check_feasible(motivating_model, {2}, RowSelection())

    def test_certificate_to_dict(self, motivating_model):
        d = certificate_for(motivating_model, {1}).to_dict()
        assert d["node_set"] == [1]
        assert d["selection"] == {"1": [0]}
        assert d["feasible"] is True


class TestEnumeration:
    def test_motivating(self, motivating_model):
        found = enumerate_minimal_leader_sets(motivating_model)
        assert [ms.nodes for ms in found] == [(1,)]
        assert found[0].rank == 2

    def test_two_sensor(self, two_sensor_model):
        found = enumerate_minimal_leader_sets(two_sensor_model)
        assert [ms.nodes for ms in found] == [(1,)]

    def test_undetectable(self, undetectable_model):
        assert enumerate_minimal_leader_sets(undetectable_model) == []
        with pytest.raises(NoFeasibleLeaderSet):
            select_functional_leader_set(undetectable_model)

    def test_ties_broken_by_node_index(self):
        m = SystemModel.from_lists([[3.0]], [[[1.0]], [[2.0]]], [[1.0]], edges=[[1, 2], [2, 1]])
        found = enumerate_minimal_leader_sets(m)
        assert [ms.nodes for ms in found] == [(1,), (2,)]
        assert select_functional_leader_set(m, minimal=found).S_star == (1,)

    def test_set_size_cap(self, two_sensor_model):
        caps = SearchCaps(max_set_size=1)
        assert [ms.nodes for ms in enumerate_minimal_leader_sets(two_sensor_model, caps=caps)] == [(1,)]

    def test_caps_validation(self):
        with pytest.raises(ValueError):
            SearchCaps(max_set_size=0)
        with pytest.raises(ValueError):
            SearchCaps(max_rows=0)

    def test_logs_summary(self, motivating_model, caplog):
        with caplog.at_level(logging.INFO, logger="distfobs.leaderselect"):
            enumerate_minimal_leader_sets(motivating_model)
        assert "1 minimal leader set(s) found" in caplog.text


class TestSelection:
    def test_motivating(self, motivating_model):
        ls = select_functional_leader_set(motivating_model)
        assert ls.S_star == (1,)
        assert ls.r_star == 2
        np.testing.assert_array_equal(ls.Sigma, np.eye(2))
        assert ls.row_blocks() == [(1, 0, 1)]

    def test_illustration_picks_one_row(self, illustration_model):
        ls = select_functional_leader_set(illustration_model)
        assert ls.S_star == (1,)
        assert ls.selection.rows_of(1) == (0,)
        np.testing.assert_array_equal(ls.C_star, [[0, 1, 0]])
        assert ls.r_star == 2
        assert ls.to_dict()["selection"] == {"1": [0]}

    def test_build_sigma_skips_dependent_rows(self):
        Sigma = build_sigma([[1, 0, 0]], [[0, 1, 0], [0, 2, 0], [0, 0, 1]])
        np.testing.assert_array_equal(Sigma, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])


class TestCentralized:
    def test_darouach_motivating(self, motivating_model):
        check = check_darouach(motivating_model)
        assert check.rank_cond
        assert check.detect_cond

    def test_darouach_undetectable(self, undetectable_model):
        check = check_darouach(undetectable_model)
        assert check.rank_cond
        assert not check.detect_cond

    def test_coupling_needs_node_one(self, motivating_model):
        m = motivating_model
        coupling = centralized_coupling(m)
        assert coupling.coupled_nodes == (1,)
        C = m.C_full
        np.testing.assert_allclose(coupling.M1 @ m.L + coupling.M2 @ C + coupling.M3 @ C @ m.A,
                                   m.L @ m.A, atol=1e-10)

    def test_coupling_absent(self):
        m = SystemModel.from_lists([[1.0, 1.0], [0.0, 2.0]], [[]], [[1.0, 0.0]])
        assert centralized_coupling(m) is None

    def test_pbh(self):
        A = np.diag([2.0, 0.5])
        assert not pbh_detectable(A, [[0.0, 1.0]])
        assert pbh_detectable(A, [[1.0, 0.0]])
        assert pbh_detectable(np.diag([0.5, 0.2]), np.zeros((0, 2)))


class TestDimensions:
    def test_motivating(self):
        A, C = [[0.5, 2.0], [0.0, 3.0]], [[0.0, 1.0]]
        assert observable_subspace_dim(A, C) == 1
        assert detectable_subspace_dim(A, C) == 2

    def test_undetectable(self):
        A, C = np.diag([2.0, 0.5]), [[0.0, 1.0]]
        assert observable_subspace_dim(A, C) == 1
        assert detectable_subspace_dim(A, C) == 1

    def test_no_outputs(self):
        assert detectable_subspace_dim(np.diag([2.0, 0.5, 0.1]), np.zeros((0, 3))) == 2

    def test_state_estimation_case(self, motivating_model):
        assert not reduces_to_state_estimation(motivating_model)
        m = SystemModel.from_lists([[0.5, 2.0], [0.0, 3.0]], [[[0.0, 1.0]]], np.eye(2).tolist())
        assert reduces_to_state_estimation(m)
