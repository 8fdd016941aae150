"""Open-system channels: dilations, Kraus sets, erasure bounds, heat.

A channel is represented by a unitary on system x environment plus an
environment state (dilation). Kraus sets are extracted in either direction
(system operators indexed by environment transitions, or environment
operators indexed by system transitions). On top of that: unitality
diagnostics, the conditional and unconditional erasure bounds, reset
simulations against a thermal environment, and the exact decomposition of
dissipated heat into entropy change, correlation, and irreversibility
terms. Entropies in nats, k_B = 1, so bounds carry units of temperature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qlinalg, qstate
from .errors import ContractError, ShapeError

COMPLETENESS_TOL = 1e-9
EIG_DROP = 1e-14
OP_DROP = 1e-14
JOINT_FINAL_TOL = 1e-8
BOUND_TOL = 1e-9
ENV_RANK_TOL = 1e-12

_MODES = ("conditional", "unconditional")


@dataclass(frozen=True)
class DilationSpec:
    """Unitary on system x environment plus the environment input state."""

    d_s: int
    d_e: int
    u: np.ndarray
    env_state: np.ndarray

    def __post_init__(self):
        d_s, d_e = int(self.d_s), int(self.d_e)
        if d_s < 1 or d_e < 1:
            raise ContractError("dimensions must be positive")
        u = qlinalg.as_complex_matrix(self.u)
        if u.shape != (d_s * d_e, d_s * d_e):
            raise ShapeError(f"unitary is {u.shape}, expected {(d_s * d_e,) * 2}")
        if qlinalg.hs_norm(u.conj().T @ u - np.eye(d_s * d_e)) > qstate.UNITARITY_ATOL:
            raise ContractError("dilation matrix is not unitary")
        env = qlinalg.as_complex_matrix(self.env_state)
        if env.shape != (d_e, d_e):
            raise ShapeError(f"environment state is {env.shape}, expected {(d_e, d_e)}")
        qstate.check_density_matrix(env)
        object.__setattr__(self, "d_s", d_s)
        object.__setattr__(self, "d_e", d_e)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "env_state", env)


def apply_dilation(spec: DilationSpec, rho_s) -> np.ndarray:
    """Evolve the joint product state and trace out the environment."""
    rho_s = qlinalg.as_complex_matrix(rho_s)
    if rho_s.shape != (spec.d_s, spec.d_s):
        raise ShapeError(f"system state is {rho_s.shape}, expected {(spec.d_s,) * 2}")
    qstate.check_density_matrix(rho_s)
    joint = spec.u @ qlinalg.tensor(rho_s, spec.env_state) @ spec.u.conj().T
    return qlinalg.partial_trace(joint, (spec.d_s, spec.d_e), keep=0)


@dataclass(frozen=True)
class KrausSet:
    """Operator-sum representation; completeness enforced at construction."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(qlinalg.as_complex_matrix(m) for m in self.operators)
        if not ops:
            raise ContractError("empty Kraus set")
        d = ops[0].shape[0]
        for m in ops:
            if m.shape != (d, d):
                raise ShapeError("Kraus operators must share one square shape")
        if self.completeness_residual_of(ops) > COMPLETENESS_TOL:
            raise ContractError("Kraus set violates the completeness relation")
        object.__setattr__(self, "operators", ops)

    @staticmethod
    def completeness_residual_of(ops) -> float:
        d = ops[0].shape[0]
        acc = sum(m.conj().T @ m for m in ops)
        return qlinalg.hs_norm(acc - np.eye(d))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def completeness_residual(self) -> float:
        return self.completeness_residual_of(self.operators)


def _output_basis(d: int, out_basis) -> np.ndarray:
    """Columns of the returned matrix are the output-basis kets."""
    if out_basis is None:
        return np.eye(d, dtype=complex)
    w = qlinalg.as_complex_matrix(out_basis)
    if w.shape != (d, d):
        raise ShapeError(f"output basis is {w.shape}, expected {(d, d)}")
    if qlinalg.hs_norm(w.conj().T @ w - np.eye(d)) > qstate.UNITARITY_ATOL:
        raise ContractError("output basis matrix is not unitary")
    return w


def extract_system_kraus(spec: DilationSpec, out_basis=None) -> KrausSet:
    """System Kraus operators, indexed by (env eigenvector, env output ket).

    M_ab = sqrt(e_a) <v_b| U |e_a>, the environment slots contracted.
    Zero-weight environment eigenvectors and numerically null operators are
    dropped; any unitary rotation of the output kets gives an equivalent set.
    """
    w_env, v_env = qstate._clipped_spectrum(spec.env_state)
    basis = _output_basis(spec.d_e, out_basis)
    u4 = spec.u.reshape(spec.d_s, spec.d_e, spec.d_s, spec.d_e)
    ops = []
    for a in range(spec.d_e):
        if w_env[a] < EIG_DROP:
            continue
        sandwiched = np.einsum("pqsr,r->pqs", u4, v_env[:, a])
        for b in range(spec.d_e):
            m = np.sqrt(w_env[a]) * np.einsum("q,pqs->ps", basis[:, b].conj(), sandwiched)
            if qlinalg.hs_norm(m) >= OP_DROP:
                ops.append(m)
    return KrausSet(tuple(ops))


def extract_env_kraus(u, rho_s, dims, out_basis=None) -> KrausSet:
    """Environment Kraus operators N_cd = sqrt(s_c) <w_d| U |s_c>.

    Mirror of extract_system_kraus with the roles of system and environment
    swapped: the system slots are contracted, the operators act on the
    environment. dims = (d_s, d_e).
    """
    d_s, d_e = int(dims[0]), int(dims[1])
    u = qlinalg.as_complex_matrix(u)
    if u.shape != (d_s * d_e, d_s * d_e):
        raise ShapeError(f"unitary is {u.shape}, expected {(d_s * d_e,) * 2}")
    rho_s = qlinalg.as_complex_matrix(rho_s)
    if rho_s.shape != (d_s, d_s):
        raise ShapeError(f"system state is {rho_s.shape}, expected {(d_s, d_s)}")
    qstate.check_density_matrix(rho_s)
    w_sys, v_sys = qstate._clipped_spectrum(rho_s)
    basis = _output_basis(d_s, out_basis)
    u4 = u.reshape(d_s, d_e, d_s, d_e)
    ops = []
    for c in range(d_s):
        if w_sys[c] < EIG_DROP:
            continue
        sandwiched = np.einsum("pqsr,s->pqr", u4, v_sys[:, c])
        for d in range(d_s):
            n = np.sqrt(w_sys[c]) * np.einsum("p,pqr->qr", basis[:, d].conj(), sandwiched)
            if qlinalg.hs_norm(n) >= OP_DROP:
                ops.append(n)
    return KrausSet(tuple(ops))


def apply_kraus(k: KrausSet, rho) -> np.ndarray:
    rho = qlinalg.as_complex_matrix(rho)
    if rho.shape != (k.dim, k.dim):
        raise ShapeError(f"state is {rho.shape}, expected {(k.dim, k.dim)}")
    out = np.zeros_like(rho)
    for m in k.operators:
        out += m @ rho @ m.conj().T
    return out


def non_unitality(k: KrausSet) -> float:
    """Hilbert-Schmidt distance of sum(M M+) from the identity.

    Zero exactly for unital channels (unitaries included); invariant under
    isometric recombination of the set.
    """
    acc = sum(m @ m.conj().T for m in k.operators)
    return qlinalg.hs_norm(acc - np.eye(k.dim))


def conditional_landauer_bound(rho_in, rho_out, temperature: float) -> float:
    """Least environment energy increase when the reset state is known.

    Equals -T * (S(rho_out) - S(rho_in)); zero for entropy-preserving
    resets, T*ln2 for erasing a maximally mixed bit to a pure one.
    """
    t = float(temperature)
    if t < 0.0 or not np.isfinite(t):
        raise ContractError("temperature must be nonnegative and finite")
    return -t * (qstate.von_neumann_entropy(rho_out) - qstate.von_neumann_entropy(rho_in))


@dataclass(frozen=True)
class ResetScenario:
    """A mixture of input states reset toward a declared target state.

    mode "conditional" supplies one unitary per input state (the agent knows
    which state it holds); "unconditional" supplies a single shared unitary.
    The environment starts in the Gibbs state of env_ctx.
    """

    states: tuple
    target: np.ndarray
    env_ctx: qstate.ThermoContext
    mode: str
    unitaries: tuple

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ContractError(f"mode must be one of {_MODES}, got {self.mode!r}")
        states = []
        for p, rho in self.states:
            p = float(p)
            if p < -1e-12:
                raise ContractError("state probabilities must be nonnegative")
            rho = qlinalg.as_complex_matrix(rho)
            qstate.check_density_matrix(rho)
            states.append((max(p, 0.0), rho))
        if not states:
            raise ContractError("scenario needs at least one input state")
        total = sum(p for p, _ in states)
        if abs(total - 1.0) > 1e-9:
            raise ContractError(f"state probabilities sum to {total!r}")
        d_s = states[0][1].shape[0]
        if any(rho.shape != (d_s, d_s) for _, rho in states):
            raise ShapeError("input states must share one dimension")
        target = qlinalg.as_complex_matrix(self.target)
        if target.shape != (d_s, d_s):
            raise ShapeError("target dimension differs from the input states")
        qstate.check_density_matrix(target)
        d_e = self.env_ctx.hamiltonian.dim
        n_unitaries = 1 if self.mode == "unconditional" else len(states)
        unitaries = tuple(qlinalg.as_complex_matrix(u) for u in self.unitaries)
        if len(unitaries) != n_unitaries:
            raise ContractError(
                f"{self.mode} mode needs {n_unitaries} unitaries, got {len(unitaries)}"
            )
        for u in unitaries:
            if u.shape != (d_s * d_e, d_s * d_e):
                raise ShapeError(f"reset unitary is {u.shape}, expected {(d_s * d_e,) * 2}")
            if qlinalg.hs_norm(u.conj().T @ u - np.eye(d_s * d_e)) > qstate.UNITARITY_ATOL:
                raise ContractError("reset unitary is not unitary")
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "unitaries", unitaries)

    @property
    def d_s(self) -> int:
        return self.states[0][1].shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for p, _ in self.states])


def swap_unitary(d: int) -> np.ndarray:
    """Exchange unitary on C^d x C^d: |i,j> -> |j,i>."""
    d = int(d)
    u = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            u[j * d + i, i * d + j] = 1.0
    return u


def basis_transposition(dim: int, pairs) -> np.ndarray:
    """Permutation unitary exchanging the given disjoint basis-index pairs."""
    dim = int(dim)
    u = np.eye(dim, dtype=complex)
    seen: set[int] = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if not (0 <= i < dim and 0 <= j < dim):
            raise ContractError(f"transposition ({i}, {j}) outside 0..{dim - 1}")
        if i == j or i in seen or j in seen:
            raise ContractError("transposition pairs must be disjoint")
        seen.update((i, j))
        u[[i, j]] = u[[j, i]]
    return u


def unconditional_landauer_bound(scenario: ResetScenario, temperature: float) -> float:
    """Erasure bound when the reset protocol may not depend on the state.

    -T * (sum_l p_l * (S(target) - S(rho_l)) - H({p_l})): relative to the
    conditional bound, the agent additionally pays T times the Shannon
    entropy of the mixture it cannot observe. For entropy-preserving resets
    the bound is exactly T * H({p_l}).
    """
    t = float(temperature)
    if t < 0.0 or not np.isfinite(t):
        raise ContractError("temperature must be nonnegative and finite")
    s_target = qstate.von_neumann_entropy(scenario.target)
    p = scenario.probabilities
    avg_delta_s = sum(
        pi * (s_target - qstate.von_neumann_entropy(rho))
        for pi, (_, rho) in zip(p, scenario.states)
    )
    return -t * (avg_delta_s - qstate.shannon_entropy(p))


def simulate_reset(scenario: ResetScenario) -> dict:
    """Run the reset unitaries against the thermal environment.

    Returns per-state and average environment energy increases, the bound
    matching the scenario mode, and whether the average satisfies it. In
    conditional mode all joint final states must coincide: a conditional
    protocol must leave no record of which state it erased.
    """
    env_ctx = scenario.env_ctx
    tau_e = qstate.gibbs_state(env_ctx)
    h_e = env_ctx.hamiltonian.matrix
    d_s, d_e = scenario.d_s, env_ctx.hamiltonian.dim
    e_env_in = float(np.real(np.trace(tau_e @ h_e)))

    delta_e = []
    joint_finals = []
    for idx, (p, rho) in enumerate(scenario.states):
        u = scenario.unitaries[0 if scenario.mode == "unconditional" else idx]
        joint = u @ qlinalg.tensor(rho, tau_e) @ u.conj().T
        rho_fe = qlinalg.partial_trace(joint, (d_s, d_e), keep=1)
        delta_e.append(float(np.real(np.trace(rho_fe @ h_e))) - e_env_in)
        joint_finals.append(joint)

    if scenario.mode == "conditional":
        for idx in range(1, len(joint_finals)):
            gap = qlinalg.hs_norm(joint_finals[idx] - joint_finals[0])
            if gap > JOINT_FINAL_TOL:
                raise ContractError(
                    f"conditional resets reach different joint finals (gap {gap:.3e})"
                )

    t = env_ctx.temperature
    if scenario.mode == "conditional":
        bound = sum(
            p * conditional_landauer_bound(rho, scenario.target, t)
            for p, rho in scenario.states
        )
    else:
        bound = unconditional_landauer_bound(scenario, t)
    average = float(np.dot(scenario.probabilities, delta_e))
    return {
        "delta_e_per_state": [float(x) for x in delta_e],
        "average_delta_e": average,
        "bound": float(bound),
        "satisfied": bool(average >= bound - BOUND_TOL),
    }


def _log_state(rho) -> np.ndarray:
    """Matrix logarithm of a full-rank density matrix."""
    w, v = qstate._clipped_spectrum(rho)
    if w.min() <= ENV_RANK_TOL:
        raise ContractError("state must be full rank to take its logarithm")
    return (v * np.log(w)) @ v.conj().T


def heat_mgf(env_kraus: KrausSet, tau_e) -> float:
    """Moment-generating function of dissipated heat, sum Tr[N N+ tau_E].

    Equals 1 (bound 0) exactly when the environment channel is unital.
    """
    tau_e = qlinalg.as_complex_matrix(tau_e)
    qstate.check_density_matrix(tau_e)
    if tau_e.shape != (env_kraus.dim, env_kraus.dim):
        raise ShapeError("environment state dimension differs from the Kraus set")
    acc = sum(n @ n.conj().T for n in env_kraus.operators)
    val = complex(np.trace(acc @ tau_e))
    if abs(val.imag) > 1e-10 or val.real <= 0.0:
        raise ContractError(f"moment-generating function came out as {val!r}")
    return float(val.real)


def jensen_heat_bound(mgf_value: float, temperature: float) -> float:
    """-T ln<exp(-beta Q)>, a lower bound on the average dissipated heat."""
    m = float(mgf_value)
    if m <= 0.0:
        raise ContractError("moment-generating function must be positive")
    # + 0.0 keeps the m == 1 case from reporting -0.0
    return -float(temperature) * float(np.log(m)) + 0.0


def heat_decomposition(spec: DilationSpec, rho_s, beta: float) -> dict:
    """Exact split of the dissipated heat for a thermal environment.

    Returns {delta_s_system, mutual_info, rel_entropy_env, beta_q}, the four
    addends of the identity

        delta_s_system + mutual_info + rel_entropy_env + beta_q = 0

    with delta_s_system = S_S - S'_S (system entropy decrease) and
    beta_q = -beta*(E'_E - E_E) (beta times the heat released by the
    environment). mutual_info and rel_entropy_env are nonnegative, so the
    heat dumped into the environment always covers the system entropy drop.
    env_state is interpreted as thermal at the given beta; it must be full
    rank so its logarithm exists.
    """
    if float(beta) <= 0.0 or not np.isfinite(beta):
        raise ContractError("beta must be positive and finite")
    rho_s = qlinalg.as_complex_matrix(rho_s)
    if rho_s.shape != (spec.d_s, spec.d_s):
        raise ShapeError(f"system state is {rho_s.shape}, expected {(spec.d_s,) * 2}")
    qstate.check_density_matrix(rho_s)
    tau_e = spec.env_state
    log_tau = _log_state(tau_e)

    joint = spec.u @ qlinalg.tensor(rho_s, tau_e) @ spec.u.conj().T
    rho_s_out = qlinalg.partial_trace(joint, (spec.d_s, spec.d_e), keep=0)
    rho_e_out = qlinalg.partial_trace(joint, (spec.d_s, spec.d_e), keep=1)

    delta_s_system = qstate.von_neumann_entropy(rho_s) - qstate.von_neumann_entropy(rho_s_out)
    mutual_info = qstate.quantum_mutual_information(joint, (spec.d_s, spec.d_e))
    rel_entropy_env = qstate.relative_entropy(rho_e_out, tau_e)
    beta_q = float(np.real(np.trace((rho_e_out - tau_e) @ log_tau)))
    return {
        "delta_s_system": float(delta_s_system),
        "mutual_info": float(mutual_info),
        "rel_entropy_env": float(rel_entropy_env),
        "beta_q": beta_q,
    }


def partovi_check(spec: DilationSpec, rho_s) -> bool:
    """Entropy-energy inequality for an initially thermal environment.

    Delta S_E - beta * Delta U_E <= 0 (it equals -D(rho'_E || tau_E));
    beta * Delta U_E is recovered from ln tau_E, so no Hamiltonian or beta
    argument is needed.
    """
    rho_s = qlinalg.as_complex_matrix(rho_s)
    if rho_s.shape != (spec.d_s, spec.d_s):
        raise ShapeError(f"system state is {rho_s.shape}, expected {(spec.d_s,) * 2}")
    qstate.check_density_matrix(rho_s)
    tau_e = spec.env_state
    log_tau = _log_state(tau_e)
    joint = spec.u @ qlinalg.tensor(rho_s, tau_e) @ spec.u.conj().T
    rho_e_out = qlinalg.partial_trace(joint, (spec.d_s, spec.d_e), keep=1)
    delta_s_env = qstate.von_neumann_entropy(rho_e_out) - qstate.von_neumann_entropy(tau_e)
    beta_delta_u = -float(np.real(np.trace((rho_e_out - tau_e) @ log_tau)))
    return bool(delta_s_env - beta_delta_u <= BOUND_TOL)
