"""Qubit-level oracle for the free-fermion simulator.

Builds the circuit gate by gate on a dense statevector: dimer
preparation (H, CNOT, X per v-bond), brick-wall XX+YY rotations with the
angle scaled by the bond amplitude, and the ancilla interferometry
circuit that reads out Re/Im <U_R> one controlled phase per site.

Under the closed-shell condition the fermion-to-qubit string on the
boundary bond is trivial, so the qubit Hamiltonian carries the same bond
amplitudes (including the boundary sign) as the single-particle matrices
and is never materialized; the cross-checks against the determinant
formulas in :mod:`dqap.gaussian` lock every sign convention here.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .ansatz import ParamSchedule
from .model import SingleParticleHamiltonians, SshParams, build_hamiltonians
from .statevector import MAX_QUBITS, QubitEnvelopeError, Statevector, bit_values, xy_expectation


def _check_qubits(n: int):
    if n > MAX_QUBITS:
        raise QubitEnvelopeError(f"circuit needs {n} qubits, envelope is {MAX_QUBITS}")


def _prepare_dimers(psi: Statevector, L: int, offset: int):
    """Entangle qubit pairs (offset+2j, offset+2j+1) into (|01> + |10>)/sqrt(2)."""
    for j in range(L // 2):
        a, b = offset + 2 * j, offset + 2 * j + 1
        psi.h(a)
        psi.cnot(a, b)
        psi.x(b)


def _apply_bond_gates(psi: Statevector, bonds, theta: float, offset: int):
    for a, b, amp in bonds:
        psi.xxyy(offset + a, offset + b, theta * amp)


def build_dqap_state(
    p: SshParams,
    schedule: ParamSchedule,
    hams: SingleParticleHamiltonians | None = None,
) -> Statevector:
    """Qubit-level circuit state: site l sits on qubit l-1."""
    p.require_closed_shell()
    _check_qubits(p.L)
    if hams is None:
        hams = build_hamiltonians(p)
    psi = Statevector(p.L)
    _prepare_dimers(psi, p.L, offset=0)
    for t1, t2 in schedule.thetas:
        _apply_bond_gates(psi, hams.w_bonds, t2, offset=0)
        _apply_bond_gates(psi, hams.v_bonds, t1, offset=0)
    return psi


def qubit_energy(psi: Statevector, hams: SingleParticleHamiltonians) -> float:
    """<H> from the bond list, one two-point term per bond."""
    total = 0.0
    for a, b, amp in (*hams.v_bonds, *hams.w_bonds):
        total += amp * xy_expectation(psi, a, b)
    return total


def statevector_correlation(psi: Statevector, L: int) -> np.ndarray:
    """Full <c+_l c_l'> matrix with Jordan-Wigner string signs.

    Sites are ordered 1..L on qubits 0..L-1; the string between l < l'
    contributes (-1) per occupied site strictly between them.
    """
    if psi.n != L:
        raise ValueError(f"state has {psi.n} qubits, expected {L}")
    amps = psi.amplitudes
    idx = np.arange(1 << L)
    C = np.zeros((L, L), dtype=complex)
    for a in range(L):
        C[a, a] = np.sum(np.abs(amps[bit_values(L, a) == 1]) ** 2)
    for a, b in combinations(range(L), 2):
        sel = ((idx >> b) & 1 == 1) & ((idx >> a) & 1 == 0)
        src = idx[sel]
        dst = src - (1 << b) + (1 << a)
        between = src & (((1 << b) - 1) ^ ((1 << (a + 1)) - 1))
        signs = 1.0 - 2.0 * (np.bitwise_count(between.astype(np.uint64)) % 2)
        val = np.sum(np.conj(amps[dst]) * amps[src] * signs)
        C[a, b] = val
        C[b, a] = np.conj(val)
    return C


def u_r_expectation(psi: Statevector, L: int) -> complex:
    """<U_R> = sum |amp|^2 exp(i (2 pi / L) sum_l l n_l), diagonal readout."""
    if psi.n != L:
        raise ValueError(f"state has {psi.n} qubits, expected {L}")
    weight = np.zeros(1 << L)
    for q in range(L):
        weight += (q + 1) * bit_values(L, q)
    return complex(np.sum(np.abs(psi.amplitudes) ** 2 * np.exp(2j * np.pi * weight / L)))


def sector_amplitude_leakage(psi: Statevector, N: int) -> float:
    """Largest amplitude magnitude outside the N-particle sector."""
    counts = np.zeros(psi.amplitudes.size, dtype=int)
    for q in range(psi.n):
        counts += bit_values(psi.n, q)
    outside = psi.amplitudes[counts != N]
    return float(np.max(np.abs(outside))) if outside.size else 0.0


def exact_qubit_ground_state(p: SshParams, hams: SingleParticleHamiltonians | None = None):
    """Ground state of the qubit model in the half-filling sector.

    Dense diagonalization over the C(L, L/2) sector basis; returns
    (energy, Statevector). Intended for L <= 14.
    """
    _check_qubits(p.L)
    if hams is None:
        hams = build_hamiltonians(p)
    L, N = p.L, p.n_particles
    all_counts = np.zeros(1 << L, dtype=int)
    for q in range(L):
        all_counts += bit_values(L, q)
    basis = np.nonzero(all_counts == N)[0]
    pos = {int(b): i for i, b in enumerate(basis)}
    dim = basis.size
    H = np.zeros((dim, dim))
    for i, state in enumerate(basis):
        for a, b, amp in (*hams.v_bonds, *hams.w_bonds):
            occ_a = (state >> a) & 1
            occ_b = (state >> b) & 1
            if occ_a != occ_b:
                j = pos[int(state ^ (1 << a) ^ (1 << b))]
                H[j, i] += amp
    evals, evecs = np.linalg.eigh(H)
    full = np.zeros(1 << L, dtype=complex)
    full[basis] = evecs[:, 0]
    return float(evals[0]), Statevector(L, full)


# -- Hadamard-test emulation -------------------------------------------------


@dataclass(frozen=True)
class BasisEstimate:
    """Single-basis interferometry estimate with its binomial standard error."""

    value: float
    stderr: float
    shots: int
    seed: int


@dataclass(frozen=True)
class ShotResult:
    """Shot-sampled estimate of <U_R> = x + i y."""

    x_hat: float
    y_hat: float
    dx: float
    dy: float
    shots_x: int
    shots_y: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "x_hat": self.x_hat,
            "y_hat": self.y_hat,
            "dx": self.dx,
            "dy": self.dy,
            "shots_x": self.shots_x,
            "shots_y": self.shots_y,
            "seed": self.seed,
        }


def ancilla_probability(p: SshParams, schedule: ParamSchedule, basis: str) -> float:
    """P(ancilla = 0) after the interferometry circuit.

    The ancilla is qubit 0 and site l sits on qubit l. After a Hadamard,
    the chain of L-1 controlled phases C0-Phase_l(2 pi l / L) (the l = L
    phase is the identity), and the basis rotation (H for X; S+ then H
    for Y), <Z> on the ancilla equals Re <U_R> or Im <U_R>.
    """
    p.require_closed_shell()
    if basis not in ("X", "Y"):
        raise ValueError(f"basis must be 'X' or 'Y', got {basis!r}")
    L = p.L
    _check_qubits(L + 1)
    hams = build_hamiltonians(p)
    psi = Statevector(L + 1)
    psi.h(0)
    _prepare_dimers(psi, L, offset=1)
    for t1, t2 in schedule.thetas:
        _apply_bond_gates(psi, hams.w_bonds, t2, offset=1)
        _apply_bond_gates(psi, hams.v_bonds, t1, offset=1)
    for l in range(1, L):
        psi.cphase(0, l, 2.0 * np.pi * l / L)
    if basis == "Y":
        psi.sdg(0)
    psi.h(0)
    return psi.probability_bit(0, 0)


def hadamard_test_exact(p: SshParams, schedule: ParamSchedule, basis: str) -> float:
    """Infinite-shot limit of the estimator: the exact ancilla <Z>."""
    return 2.0 * ancilla_probability(p, schedule, basis) - 1.0


def sample_estimate(p0: float, shots: int, seed: int) -> tuple[float, float]:
    """Binomial shot sampling of <Z> from P(0), counter-based and reproducible."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    n0 = int(rng.binomial(shots, min(max(p0, 0.0), 1.0)))
    value = 2.0 * n0 / shots - 1.0
    stderr = float(np.sqrt(max(1.0 - value * value, 0.0) / shots))
    return value, stderr


def hadamard_test(
    p: SshParams, schedule: ParamSchedule, basis: str, shots: int, seed: int
) -> BasisEstimate:
    """Shot-sampled single-basis estimate of Re or Im <U_R>."""
    p0 = ancilla_probability(p, schedule, basis)
    value, stderr = sample_estimate(p0, shots, seed)
    return BasisEstimate(value=value, stderr=stderr, shots=shots, seed=seed)


def polarization_shot_experiment(
    p: SshParams,
    schedule: ParamSchedule,
    shots: int,
    seed: int,
    shots_y: int | None = None,
) -> ShotResult:
    """Emulate both interferometry bases and package the estimates."""
    shots_y = shots if shots_y is None else shots_y
    px = ancilla_probability(p, schedule, "X")
    py = ancilla_probability(p, schedule, "Y")
    rng = np.random.Generator(np.random.Philox(key=seed))
    nx = int(rng.binomial(shots, min(max(px, 0.0), 1.0)))
    ny = int(rng.binomial(shots_y, min(max(py, 0.0), 1.0)))
    x_hat = 2.0 * nx / shots - 1.0
    y_hat = 2.0 * ny / shots_y - 1.0
    dx = float(np.sqrt(max(1.0 - x_hat * x_hat, 0.0) / shots))
    dy = float(np.sqrt(max(1.0 - y_hat * y_hat, 0.0) / shots_y))
    return ShotResult(x_hat, y_hat, dx, dy, shots, shots_y, seed)


def polarization_error(x: float, y: float, dx: float, dy: float) -> float:
    """Propagated phase uncertainty of atan2(y, x).

    Algebraically identical to dividing by x^2 and y^2 separately but
    stays finite when either coordinate crosses zero.
    """
    r2 = x * x + y * y
    if r2 <= 0.0:
        raise ValueError("need x^2 + y^2 > 0")
    return float(np.sqrt((x * dy) ** 2 + (y * dx) ** 2) / r2)
