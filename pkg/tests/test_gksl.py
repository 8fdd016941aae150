import math

import numpy as np
import pytest

from revtherm import compmodel, gksl, qlinalg, qstate
from revtherm.errors import ContractError, ShapeError

from helpers import random_density, random_hermitian, rng

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
SMINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def dephasing(kappa=0.25):
    return gksl.Lindbladian(qstate.Hamiltonian(np.zeros((2, 2))), ((SZ, kappa),))


def damping(kappa=0.8):
    return gksl.Lindbladian(qstate.Hamiltonian(np.zeros((2, 2))), ((SMINUS, kappa),))


def closed(h):
    return gksl.Lindbladian(qstate.Hamiltonian(h), ())


def random_lindbladian(gen, d, n_jumps=2):
    jumps = tuple(
        (gen.normal(size=(d, d)) + 1j * gen.normal(size=(d, d)), float(gen.uniform(0.1, 1.0)))
        for _ in range(n_jumps)
    )
    return gksl.Lindbladian(qstate.Hamiltonian(random_hermitian(gen, d)), jumps)


class TestLindbladian:
    def test_jump_shape_gate(self):
        with pytest.raises(ShapeError):
            gksl.Lindbladian(qstate.Hamiltonian(np.zeros((2, 2))), ((np.eye(3), 1.0),))

    def test_negative_rate_rejected(self):
        with pytest.raises(ContractError):
            gksl.Lindbladian(qstate.Hamiltonian(np.zeros((2, 2))), ((SZ, -0.1),))


class TestSuperoperatorMatrix:
    def test_dephasing_generator_is_diagonal(self):
        sup = gksl.build_superoperator(dephasing(0.25))
        assert np.allclose(sup.matrix, np.diag([0.0, -0.5, -0.5, 0.0]))

    def test_generator_annihilated_by_trace_functional(self):
        gen = rng(71)
        for _ in range(4):
            sup = gksl.build_superoperator(random_lindbladian(gen, 3))
            tr = qlinalg.vectorize(np.eye(3)).conj()
            assert np.linalg.norm(tr @ sup.matrix) < 1e-9 * max(1.0, qlinalg.hs_norm(sup.matrix))

    def test_kind_contract_enforced(self):
        m = gksl.build_superoperator(dephasing()).matrix
        with pytest.raises(ContractError):
            gksl.SuperoperatorMatrix(m, kind="trace_preserving")
        with pytest.raises(ContractError):
            gksl.SuperoperatorMatrix(np.eye(4), kind="generator")
        with pytest.raises(ContractError):
            gksl.SuperoperatorMatrix(m, kind="liouvillian")

    def test_propagator_is_trace_preserving_kind(self):
        m = gksl.build_superoperator(damping()).matrix
        gksl.SuperoperatorMatrix(qlinalg.matrix_exp(2.0 * m), kind="trace_preserving")

    def test_adjoint_duality(self):
        # <<A | L rho>> == <<L+ A | rho>>, with both sides built independently
        gen = rng(72)
        for _ in range(5):
            l = random_lindbladian(gen, 2)
            lm = gksl.build_superoperator(l).matrix
            am = gksl.build_adjoint_superoperator(l).matrix
            a = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
            rho = random_density(gen, 2)
            lhs = qlinalg.hs_inner(a, qlinalg.devectorize(lm @ qlinalg.vectorize(rho)))
            rhs = qlinalg.hs_inner(qlinalg.devectorize(am @ qlinalg.vectorize(a)), rho)
            assert abs(lhs - rhs) < 1e-10

    def test_adjoint_fixes_identity(self):
        am = gksl.build_adjoint_superoperator(random_lindbladian(rng(73), 2)).matrix
        assert np.linalg.norm(am @ qlinalg.vectorize(np.eye(2))) < 1e-9 * max(
            1.0, qlinalg.hs_norm(am)
        )


class TestPropagate:
    def test_dephasing_closed_form(self):
        rho0 = np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex)
        for t in (0.0, 0.7, 4.0):
            out = gksl.propagate(dephasing(0.25), rho0, t)
            assert np.isclose(out[0, 1], 0.3 * math.exp(-0.5 * t))
            assert np.isclose(out[0, 0], 0.5)

    def test_damping_closed_form(self):
        rho0 = np.array([[0.2, 0.1j], [-0.1j, 0.8]], dtype=complex)
        kappa = 0.8
        out = gksl.propagate(damping(kappa), rho0, 1.3)
        assert np.isclose(out[1, 1], 0.8 * math.exp(-kappa * 1.3))
        assert np.isclose(out[0, 1], 0.1j * math.exp(-kappa * 1.3 / 2.0))
        assert np.isclose(np.trace(out).real, 1.0)

    def test_closed_system_matches_conjugation(self):
        gen = rng(74)
        h = random_hermitian(gen, 3)
        rho0 = random_density(gen, 3)
        out = gksl.propagate(closed(h), rho0, 0.9)
        u = qlinalg.matrix_exp(-0.9j * h)
        assert np.allclose(out, u @ rho0 @ u.conj().T, atol=1e-10)

    def test_negative_time_rejected(self):
        with pytest.raises(ContractError):
            gksl.propagate(dephasing(), np.eye(2) / 2, -1.0)


class TestDecompose:
    def test_closed_system_everything_survives(self):
        dec = gksl.decompose(closed(np.diag([0.0, 1.0])))
        assert len(dec.asymptotic_indices) == 4
        assert np.allclose(dec.p_inf.matrix, np.eye(4), atol=1e-10)
        assert np.allclose(dec.p_a, np.eye(2))
        assert np.allclose(dec.asymptotic_frequencies, [-1.0, 0.0, 1.0], atol=1e-9)

    def test_dephasing_projects_onto_diagonal(self):
        dec = gksl.decompose(dephasing(0.25))
        assert len(dec.asymptotic_indices) == 2
        assert np.allclose(dec.p_inf.matrix, np.diag([1.0, 0, 0, 1.0]), atol=1e-10)
        # both computational states survive, so the support is everything
        assert np.allclose(dec.p_a, np.eye(2))
        assert np.allclose(dec.q, np.zeros((2, 2)))

    def test_damping_projects_onto_ground(self):
        dec = gksl.decompose(damping(0.8))
        ground = np.diag([1.0, 0.0]).astype(complex)
        expect = np.outer(
            qlinalg.vectorize(ground), qlinalg.vectorize(np.eye(2)).conj()
        )
        assert np.allclose(dec.p_inf.matrix, expect, atol=1e-10)
        assert np.allclose(dec.p_a, ground)
        rho = random_density(rng(75), 2)
        proj = qlinalg.devectorize(dec.p_inf.matrix @ qlinalg.vectorize(rho))
        assert np.allclose(proj, ground, atol=1e-10)

    def test_defective_generator_takes_fallback(self):
        # driven damped qubit at its exceptional point Omega = kappa/4: the
        # decaying pair at -3 kappa/4 carries a Jordan chain, so the spectral
        # route fails and p_inf comes from the long-horizon average instead
        kappa, omega = 1.0, 0.25
        l = gksl.Lindbladian(qstate.Hamiltonian(0.5 * omega * SX), ((SMINUS, kappa),))
        dec = gksl.decompose(l)
        assert dec.right is None and dec.left is None
        assert dec.p_inf.kind == "approximation"
        assert len(dec.asymptotic_indices) == 1
        # resonance-fluorescence steady state for comparison
        denom = omega**2 / 2.0 + kappa**2 / 4.0
        p_e = (omega**2 / 4.0) / denom
        coh = 1j * (omega * kappa / 4.0) / denom
        steady = np.array([[1.0 - p_e, coh], [np.conj(coh), p_e]])
        proj = qlinalg.devectorize(
            dec.p_inf.matrix @ qlinalg.vectorize(np.diag([1.0, 0.0]).astype(complex))
        )
        assert qlinalg.hs_norm(proj - steady) < 1e-5
        assert np.allclose(dec.p_a, np.eye(2), atol=1e-6)


class TestCesaro:
    def test_commensurate_closed_horizon_is_exact(self):
        # every Bohr gap times the horizon is a multiple of 2 pi
        l = closed(np.diag([0.0, 1.0]))
        c = gksl.cesaro_projector(l, horizon=16.0 * math.pi, samples=4096)
        assert qlinalg.hs_norm(c.matrix - np.eye(4)) < 1e-10

    def test_dephasing_error_law(self):
        l = dephasing(0.25)
        p_exact = np.diag([1.0, 0, 0, 1.0]).astype(complex)
        err1 = qlinalg.hs_norm(gksl.cesaro_projector(l, 2000.0, 4000).matrix - p_exact)
        err2 = qlinalg.hs_norm(gksl.cesaro_projector(l, 4000.0, 8000).matrix - p_exact)
        assert err1 < 2e-3
        # O(1/horizon): doubling the horizon halves the residual
        assert err2 < 0.55 * err1

    def test_horizon_validation(self):
        with pytest.raises(ContractError):
            gksl.cesaro_projector(dephasing(), horizon=-1.0, samples=100)
        with pytest.raises(ContractError):
            gksl.cesaro_projector(dephasing(), horizon=float("inf"), samples=100)


class TestAsymptoticEvolution:
    def test_dephasing_then_slow_rotation(self):
        dec = gksl.decompose(dephasing(0.25))
        rho = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
        s = 0.4
        out = gksl.asymptotic_evolution(dec, rho, qstate.Hamiltonian(SX), s)
        # dephase to diag(0.7, 0.3), then rotate about x by hand
        c, sn = math.cos(s), math.sin(s)
        u = np.array([[c, -1j * sn], [-1j * sn, c]])
        expect = u @ np.diag([0.7, 0.3]).astype(complex) @ u.conj().T
        assert np.allclose(out, expect, atol=1e-10)

    def test_hamiltonian_outside_support_rejected(self):
        dec = gksl.decompose(damping(0.8))
        with pytest.raises(ContractError):
            gksl.asymptotic_evolution(dec, np.eye(2) / 2, qstate.Hamiltonian(SX), 0.1)

    def test_damping_ground_is_inert(self):
        dec = gksl.decompose(damping(0.8))
        h_inf = qstate.Hamiltonian(np.diag([0.3, 0.0]))
        out = gksl.asymptotic_evolution(dec, np.eye(2) / 2, h_inf, 2.0)
        assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-10)


class TestOperatorSplits:
    def test_four_corners_sum_back(self):
        gen = rng(76)
        dec = gksl.decompose(damping(0.8))
        a = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
        parts = gksl.four_corners(a, dec)
        assert np.allclose(sum(parts), a)
        # with p_a = |0><0| the corner blocks are the matrix entries
        assert np.isclose(parts[0][0, 0], a[0, 0])
        assert np.isclose(parts[3][1, 1], a[1, 1])

    def test_dfs_commutes(self):
        p = compmodel.BasisPartition(3, ((0, 1), (2,)))
        block_u = np.zeros((3, 3), dtype=complex)
        block_u[:2, :2] = np.array([[0, 1], [1, 0]])
        block_u[2, 2] = 1.0
        assert gksl.dfs_commutes(block_u, p)
        cross = np.zeros((3, 3), dtype=complex)
        cross[0, 2] = 1.0
        assert not gksl.dfs_commutes(cross, p)

    def test_split_comp_noncomp(self):
        gen = rng(77)
        p = compmodel.BasisPartition(4, ((0, 1), (2, 3)))
        op = gen.normal(size=(4, 4)) + 1j * gen.normal(size=(4, 4))
        noncomp, comp = gksl.split_comp_noncomp(op, p)
        assert np.allclose(noncomp + comp, op)
        assert np.allclose(noncomp, compmodel.pinch(op, p))
        assert gksl.dfs_commutes(noncomp, p)
        assert compmodel.offblock_norm(comp, p) == pytest.approx(qlinalg.hs_norm(comp))


class TestDephasingCheck:
    def test_resolved_after_long_time(self):
        p = compmodel.BasisPartition(2, ((0,), (1,)))
        rho = np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex)
        report = gksl.dephasing_check(dephasing(0.25), p, rho, t_resolve=80.0)
        assert report["classical"]
        assert report["residual_coherence"] < 1e-15

    def test_unresolved_at_short_time(self):
        p = compmodel.BasisPartition(2, ((0,), (1,)))
        rho = np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex)
        report = gksl.dephasing_check(dephasing(0.25), p, rho, t_resolve=1.0)
        assert not report["classical"]
        assert np.isclose(
            report["residual_coherence"], 0.3 * math.sqrt(2.0) * math.exp(-0.5)
        )

    def test_already_diagonal_input_counts_as_classical(self):
        p = compmodel.BasisPartition(2, ((0,), (1,)))
        report = gksl.dephasing_check(dephasing(0.25), p, np.diag([0.6, 0.4]), 1.0)
        assert report["classical"]
