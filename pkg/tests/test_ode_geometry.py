"""State-space simulation and output-nulling subspace geometry."""

import numpy as np
import pytest
import scipy.linalg

from dae2ode import (
    NotInvariant,
    OdeLti,
    Subspace,
    output_nulling_friend,
    restrict_to_invariant,
    simulate,
    stabilizability_subspace,
    weakly_unobservable,
)


def _random_system(rng, r=None, s=None, p=None):
    r = r if r is not None else int(rng.integers(2, 6))
    s = s if s is not None else int(rng.integers(1, 4))
    p = p if p is not None else int(rng.integers(1, 4))
    A = rng.standard_normal((r, r))
    B = rng.standard_normal((r, s))
    C = rng.standard_normal((p, r))
    D = rng.standard_normal((p, s))
    # degenerate structure shows up often in descriptor-derived systems
    roll = rng.uniform()
    if roll < 0.2:
        C = np.zeros_like(C)
    elif roll < 0.4:
        D = np.zeros_like(D)
    elif roll < 0.5:
        B = np.zeros_like(B)
    return OdeLti(A, B, C, D)


def _brute_weakly_unobservable(sys: OdeLti, tol: float = 1e-9) -> np.ndarray:
    """Reference recursion computed directly from SVD kernels."""
    r, s = sys.n_states, sys.n_inputs
    Vb = np.eye(r)
    for _ in range(r + 1):
        d = Vb.shape[1]
        if d == 0:
            return np.zeros((r, 0))
        P_perp = np.eye(r) - Vb @ Vb.T
        stacked = np.block([[P_perp @ sys.A @ Vb, P_perp @ sys.B], [sys.C @ Vb, sys.D]])
        sv = np.linalg.svd(stacked, compute_uv=False)
        scale = max(float(sv[0]) if sv.size else 0.0, 1.0)
        nkeep = int((sv > tol * scale).sum())
        _, _, vt = np.linalg.svd(stacked)
        null = vt[nkeep:].T
        W = null[:d]
        if W.shape[1] == 0:
            return np.zeros((r, 0))
        uw, sw, _ = np.linalg.svd(W, full_matrices=False)
        wscale = max(float(sw[0]) if sw.size else 0.0, 1.0)
        kw = int((sw > tol * wscale).sum())
        new_Vb = Vb @ uw[:, :kw]
        if kw == d:
            return new_Vb
        Vb = new_Vb
    return Vb


class TestSimulate:
    def test_zero_dynamics_hold_state(self):
        sys = OdeLti(np.zeros((2, 2)), np.zeros((2, 1)), np.eye(2), np.zeros((2, 1)))
        times = np.linspace(0.0, 1.0, 11)
        states, outputs = simulate(sys, np.array([3.0, -4.0]), None, times)
        assert np.allclose(states, np.tile([3.0, -4.0], (11, 1)))
        assert np.allclose(outputs, states)

    def test_scalar_decay_matches_exponential(self):
        sys = OdeLti(np.array([[-1.0]]), np.zeros((1, 1)), np.eye(1), np.zeros((1, 1)))
        times = np.linspace(0.0, 1.0, 1001)
        states, _ = simulate(sys, np.array([1.0]), None, times)
        assert abs(states[-1, 0] - np.exp(-1.0)) <= 1e-10

    def test_matches_matrix_exponential(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((4, 4)) - 3.0 * np.eye(4)
        sys = OdeLti(A, np.zeros((4, 1)), np.eye(4), np.zeros((4, 1)))
        v0 = rng.standard_normal(4)
        times = np.linspace(0.0, 1.0, 1001)
        states, _ = simulate(sys, v0, None, times)
        for k in (100, 500, 1000):
            exact = scipy.linalg.expm(A * times[k]) @ v0
            assert np.linalg.norm(states[k] - exact) <= 1e-8

    def test_fourth_order_convergence(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((3, 3)) - 2.0 * np.eye(3)
        sys = OdeLti(A, np.zeros((3, 1)), np.eye(3), np.zeros((3, 1)))
        v0 = rng.standard_normal(3)
        exact = scipy.linalg.expm(A) @ v0

        def err(steps):
            t = np.linspace(0.0, 1.0, steps + 1)
            states, _ = simulate(sys, v0, None, t)
            return np.linalg.norm(states[-1] - exact)

        ratio = err(20) / err(40)
        assert ratio > 8.0

    def test_nonuniform_grid_rejected(self):
        sys = OdeLti(np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1), np.zeros((1, 1)))
        with pytest.raises(ValueError):
            simulate(sys, np.array([0.0]), None, np.array([0.0, 0.1, 0.3]))

    def test_forced_scalar_integral(self):
        # v' = q with q(t) = t integrates to t^2 / 2 (linear input is exact)
        sys = OdeLti(np.zeros((1, 1)), np.eye(1), np.eye(1), np.zeros((1, 1)))
        times = np.linspace(0.0, 2.0, 201)
        states, _ = simulate(sys, np.array([0.0]), times.reshape(-1, 1), times)
        assert np.allclose(states[:, 0], 0.5 * times**2, atol=1e-10)


class TestWeaklyUnobservable:
    def test_observable_pair_gives_zero_space(self):
        sys = OdeLti(np.eye(3), np.ones((3, 1)), np.eye(3), np.zeros((3, 1)))
        assert weakly_unobservable(sys).dim == 0

    def test_zero_output_map_gives_full_space(self):
        sys = OdeLti(np.eye(3), np.ones((3, 1)), np.zeros((1, 3)), np.zeros((1, 1)))
        assert weakly_unobservable(sys).dim == 3

    def test_invertible_feedthrough_gives_full_space(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((4, 4))
        B = rng.standard_normal((4, 2))
        C = rng.standard_normal((2, 4))
        D = np.eye(2) + 0.1 * rng.standard_normal((2, 2))
        assert weakly_unobservable(OdeLti(A, B, C, D)).dim == 4

    def test_matches_reference_recursion(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            sys = _random_system(rng)
            V = weakly_unobservable(sys)
            ref = _brute_weakly_unobservable(sys)
            assert V.dim == ref.shape[1]
            assert V.equals(Subspace(ref))


class TestOutputNullingFriend:
    def test_zero_output_map_gives_zero_friend(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((3, 3))
        B = rng.standard_normal((3, 2))
        sys = OdeLti(A, B, np.zeros((1, 3)), np.zeros((1, 2)))
        V = weakly_unobservable(sys)
        F, L = output_nulling_friend(sys, V)
        assert np.allclose(F, 0.0)
        # kernel of the zero feedthrough is everything, so L spans the inputs
        assert L.shape == (2, 2)
        assert np.allclose(L @ L.T, np.eye(2), atol=1e-10)

    def test_zero_subspace_friend_is_kernel_of_b(self):
        A = np.eye(3)
        B = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
        sys = OdeLti(A, B, np.eye(3), np.zeros((3, 2)))
        V = weakly_unobservable(sys)
        assert V.dim == 0
        F, L = output_nulling_friend(sys, V)
        assert np.allclose(F, 0.0)
        assert L.shape == (2, 1)
        assert np.allclose(np.abs(L[:, 0]), np.array([1.0, 1.0]) / np.sqrt(2.0))
        assert np.allclose(B @ L, 0.0, atol=1e-12)

    def test_friend_properties_on_random_systems(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            sys = _random_system(rng)
            V = weakly_unobservable(sys)
            F, L = output_nulling_friend(sys, V)
            scale = 1.0 + np.linalg.norm(sys.A) + np.linalg.norm(sys.B)
            if V.dim:
                P_perp = np.eye(sys.n_states) - V.basis @ V.basis.T
                closed = (sys.A + sys.B @ F) @ V.basis
                assert np.linalg.norm(P_perp @ closed) <= 1e-8 * scale
                out = (sys.C + sys.D @ F) @ V.basis
                assert np.linalg.norm(out) <= 1e-8 * scale
            assert np.linalg.norm(sys.D @ L) <= 1e-8 * scale
            if V.dim:
                assert np.linalg.norm(P_perp @ sys.B @ L) <= 1e-8 * scale
            else:
                assert np.linalg.norm(sys.B @ L) <= 1e-8 * scale

    def test_closed_loop_output_stays_zero(self):
        rng = np.random.default_rng(8)
        checked = 0
        while checked < 10:
            sys = _random_system(rng)
            V = weakly_unobservable(sys)
            if V.dim == 0:
                continue
            F, _ = output_nulling_friend(sys, V)
            closed = OdeLti(
                sys.A + sys.B @ F,
                np.zeros((sys.n_states, 1)),
                sys.C + sys.D @ F,
                np.zeros((sys.n_outputs, 1)),
            )
            v0 = V.basis @ rng.standard_normal(V.dim)
            times = np.linspace(0.0, 1.0, 1001)
            _, outputs = simulate(closed, v0, None, times)
            assert np.max(np.abs(outputs)) <= 1e-6 * (1.0 + np.linalg.norm(v0))
            checked += 1


class TestStabilizabilitySubspace:
    def test_stable_autonomous_is_full(self):
        V = stabilizability_subspace(-np.eye(2), np.zeros((2, 1)))
        assert V.dim == 2

    def test_unstable_autonomous_is_zero(self):
        V = stabilizability_subspace(np.array([[1.0]]), np.zeros((1, 1)))
        assert V.dim == 0

    def test_controllable_pair_is_full(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((4, 4)) + 2.0 * np.eye(4)
        V = stabilizability_subspace(A, np.eye(4))
        assert V.dim == 4

    def test_invariance_and_input_containment(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            r = int(rng.integers(1, 6))
            s = int(rng.integers(1, 3))
            A = rng.standard_normal((r, r))
            B = rng.standard_normal((r, s)) if rng.uniform() > 0.3 else np.zeros((r, s))
            V = stabilizability_subspace(A, B)
            P_perp = np.eye(r) - (
                V.basis @ V.basis.T if V.dim else np.zeros((r, r))
            )
            if V.dim:
                assert np.linalg.norm(P_perp @ A @ V.basis) <= 1e-8 * (
                    1.0 + np.linalg.norm(A)
                )
            assert np.linalg.norm(P_perp @ B) <= 1e-8 * (1.0 + np.linalg.norm(B))

    def test_mixed_spectrum_splits(self):
        A = np.diag([-1.0, 2.0])
        V = stabilizability_subspace(A, np.zeros((2, 1)))
        assert V.dim == 1
        assert V.contains_vector(np.array([1.0, 0.0]))


class TestRestrictToInvariant:
    def test_full_space_preserves_spectrum(self):
        rng = np.random.default_rng(12)
        A = rng.standard_normal((4, 4))
        B = rng.standard_normal((4, 2))
        sys = OdeLti(A, B, np.eye(4), np.zeros((4, 2)))
        sub = restrict_to_invariant(sys, Subspace(np.eye(4)))
        got = np.sort_complex(np.linalg.eigvals(sub.A))
        want = np.sort_complex(np.linalg.eigvals(A))
        assert np.allclose(got, want, atol=1e-8)

    def test_zero_space_gives_empty_system(self):
        sys = OdeLti(np.eye(2), np.zeros((2, 1)), np.eye(2), np.zeros((2, 1)))
        sub = restrict_to_invariant(sys, Subspace(np.zeros((2, 0))))
        assert sub.A.shape == (0, 0)
        assert sub.B.shape == (0, 1)
        assert sub.C.shape == (2, 0)

    def test_block_triangular_structure(self):
        rng = np.random.default_rng(13)
        k, r = 2, 5
        A = rng.standard_normal((r, r))
        A[k:, :k] = 0.0
        B = np.vstack([rng.standard_normal((k, 1)), np.zeros((r - k, 1))])
        C = rng.standard_normal((2, r))
        sys = OdeLti(A, B, C, np.zeros((2, 1)))
        sub = restrict_to_invariant(sys, Subspace(np.eye(r)[:, :k]))
        assert np.allclose(sub.A, A[:k, :k], atol=1e-12)
        assert np.allclose(sub.B, B[:k], atol=1e-12)
        assert np.allclose(sub.C, C[:, :k], atol=1e-12)

    def test_non_invariant_subspace_rejected(self):
        A = np.array([[0.0, 0.0], [1.0, 0.0]])
        sys = OdeLti(A, np.zeros((2, 1)), np.eye(2), np.zeros((2, 1)))
        with pytest.raises(NotInvariant):
            restrict_to_invariant(sys, Subspace(np.eye(2)[:, :1]))
