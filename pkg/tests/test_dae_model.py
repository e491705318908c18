"""Descriptor-system structure: Wong limit, consistency, impulse controllability."""

import numpy as np
import pytest

from dae2ode import (
    DaeLti,
    LqWeights,
    Trajectory,
    associate,
    behavior_residual,
    consistency_space,
    finite_horizon,
    image,
    impulse_controllable,
    is_consistent,
    lift_solution,
    wong_limit,
)
from dae2ode.dae import pencil_rank_probe, pencil_stabilizability_test

from conftest import random_dae


class TestWongLimit:
    def test_regular_system_gives_full_space(self):
        dae = DaeLti(np.eye(3), np.diag([1.0, 2.0, 3.0]), np.ones((3, 1)))
        assert wong_limit(dae).dim == 3

    def test_worked_example_gives_full_space(self, ex1):
        assert wong_limit(ex1).dim == 3

    def test_constrained_autonomous_system(self):
        dae = DaeLti(np.array([[1.0, 0.0], [0.0, 0.0]]), np.eye(2), np.zeros((2, 1)))
        V = wong_limit(dae)
        assert V.dim == 1
        assert V.contains_vector(np.array([1.0, 0.0]))


class TestConsistencySpace:
    def test_regular_system(self):
        dae = DaeLti(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(2))
        assert consistency_space(dae, associate(dae)).dim == 2

    def test_zero_e(self):
        dae = DaeLti(np.zeros((2, 2)), np.eye(2), np.eye(2))
        assert consistency_space(dae, associate(dae)).dim == 0

    def test_worked_example_dimension_two(self, ex1, ex1_assoc):
        assert consistency_space(ex1, ex1_assoc).dim == 2


class TestIsConsistent:
    def test_zero_value_always_consistent(self, ex1, ex1_assoc):
        assert is_consistent(ex1, ex1_assoc, np.zeros(2))

    def test_zero_e_rejects_nonzero(self):
        dae = DaeLti(np.zeros((2, 2)), np.eye(2), np.eye(2))
        assert not is_consistent(dae, associate(dae), np.array([1.0, 0.0]))

    def test_worked_example_value(self, ex1, ex1_assoc):
        assert is_consistent(ex1, ex1_assoc, np.array([1.0, 7.0]))


class TestImpulseControllable:
    def test_identity_e(self):
        assert impulse_controllable(DaeLti(np.eye(2), np.eye(2), np.zeros((2, 1))))

    def test_pinned_negative_case(self):
        dae = DaeLti(
            np.array([[1.0, 0.0], [0.0, 0.0]]),
            np.array([[0.0, 0.0], [1.0, 0.0]]),
            np.zeros((2, 1)),
        )
        assert not impulse_controllable(dae)

    def test_worked_example(self, ex1):
        assert impulse_controllable(ex1)

    def test_equivalent_to_all_values_consistent(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            dae = random_dae(rng)
            assoc = associate(dae)
            lhs = impulse_controllable(dae)
            rhs = consistency_space(dae, assoc).equals(image(dae.E))
            assert lhs == rhs


class TestPencilStabilizability:
    def test_stable_autonomous(self):
        dae = DaeLti(np.eye(2), -np.eye(2), np.zeros((2, 1)))
        assert pencil_stabilizability_test(dae, associate(dae))

    def test_unstable_autonomous_scalar(self):
        dae = DaeLti(np.eye(1), np.eye(1), np.zeros((1, 1)))
        assert not pencil_stabilizability_test(dae, associate(dae))

    def test_worked_example(self, ex1, ex1_assoc):
        assert pencil_stabilizability_test(ex1, ex1_assoc)

    def test_cross_checked_by_pencil_rank_probe(self):
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(40):
            dae = random_dae(rng)
            assoc = associate(dae)
            stab = pencil_stabilizability_test(dae, assoc)
            # normal rank from random points in the open left half plane
            nrank = max(
                pencil_rank_probe(dae, complex(-rng.uniform(1, 5), rng.uniform(-5, 5)))
                for _ in range(4)
            )
            eigs = np.linalg.eigvals(assoc.A_l) if assoc.n_hat else np.array([])
            bad = [lam for lam in eigs if lam.real >= -1e-9]
            probe = all(pencil_rank_probe(dae, lam) == nrank for lam in bad)
            if stab:
                assert probe
                checked += 1
        assert checked > 0


class TestBehaviorResidual:
    def test_zero_trajectory(self):
        dae = DaeLti(np.eye(2), np.eye(2), np.eye(2))
        grid = np.linspace(0.0, 1.0, 11)
        traj = Trajectory(grid, np.zeros((11, 2)), np.zeros((11, 2)))
        assert behavior_residual(dae, traj) == 0.0

    def test_lifted_trajectory_is_small(self):
        dae = DaeLti(np.eye(3), np.diag([-1.0, -2.0, -3.0]), np.ones((3, 1)))
        assoc = associate(dae)
        grid = np.linspace(0.0, 1.0, 1001)
        traj = lift_solution(dae, assoc, np.array([1.0, 0.5, -0.5]), None, grid)
        assert behavior_residual(dae, traj) <= 1e-5

    def test_perturbed_sample_detected(self):
        dae = DaeLti(np.eye(3), np.diag([-1.0, -2.0, -3.0]), np.ones((3, 1)))
        assoc = associate(dae)
        grid = np.linspace(0.0, 1.0, 501)
        traj = lift_solution(dae, assoc, np.array([1.0, 0.0, 0.0]), None, grid)
        x = traj.x.copy()
        x[250] += 1.0
        assert behavior_residual(dae, Trajectory(grid, x, traj.u)) >= 0.1

    def test_grid_too_short_rejected(self):
        dae = DaeLti(np.eye(1), np.eye(1), np.eye(1))
        traj = Trajectory(np.array([0.0, 1.0]), np.zeros((2, 1)), np.zeros((2, 1)))
        with pytest.raises(ValueError):
            behavior_residual(dae, traj)


class TestPopulationInvariants:
    def test_wong_limit_matches_associated_image(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            dae = random_dae(rng)
            assoc = associate(dae)
            W = wong_limit(dae)
            CsDs = image(np.hstack([assoc.C_s, assoc.D_s]))
            assert W.dim == CsDs.dim
            assert W.equals(CsDs)

    def test_consistent_values_admit_solutions(self):
        rng = np.random.default_rng(13)
        done = 0
        while done < 20:
            dae = random_dae(rng)
            assoc = associate(dae)
            V = consistency_space(dae, assoc)
            if V.dim == 0:
                continue
            z = V.basis @ rng.standard_normal(V.dim)
            w = LqWeights(np.eye(dae.n), np.eye(dae.m), np.zeros((dae.c, dae.c)))
            sol = finite_horizon(dae, assoc, w, z, 0.5, steps=2500)
            assert behavior_residual(dae, sol.traj) <= 1e-5
            assert np.linalg.norm(dae.E @ sol.traj.x[0] - z) <= 1e-8
            done += 1
