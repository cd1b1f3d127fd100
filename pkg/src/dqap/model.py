"""SSH chain model: single-particle Hamiltonians and exact references.

The dimerized chain lives on a ring of L sites (L even) with alternating
hopping amplitudes: v on intra-cell bonds and w on inter-cell bonds. Site
l = 2j-1 is sublattice A of cell j and l = 2j is sublattice B (1-based
labels; arrays are 0-based, row l-1 holds site l). The bond that closes
the ring carries an extra sign gamma = +1 (periodic) or -1 (antiperiodic).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate


class BoundaryCondition(Enum):
    PBC = "pbc"
    APBC = "apbc"

    @property
    def gamma(self) -> int:
        return 1 if self is BoundaryCondition.PBC else -1


class EigensolverError(RuntimeError):
    """Dense eigensolver failed to converge."""


class ClosedShellError(ValueError):
    """(L, bc) combination does not satisfy the closed-shell condition."""


@dataclass(frozen=True)
class SshParams:
    """Model parameters for the dimerized ring.

    Parameters
    ----------
    v : float
        Intra-cell hopping amplitude (>= 0).
    w : float
        Inter-cell hopping amplitude (>= 0).
    L : int
        Number of sites (even, positive).
    bc : BoundaryCondition
        Boundary condition; sets gamma on the bond closing the ring.
    """

    v: float
    w: float
    L: int
    bc: BoundaryCondition = BoundaryCondition.APBC

    def __post_init__(self):
        if self.v < 0 or self.w < 0:
            raise ValueError(f"hopping amplitudes must be >= 0, got v={self.v}, w={self.w}")
        if self.L <= 0 or self.L % 2 != 0:
            raise ValueError(f"L must be an even positive integer, got {self.L}")
        if not isinstance(self.bc, BoundaryCondition):
            raise TypeError(f"bc must be a BoundaryCondition, got {self.bc!r}")

    @property
    def n_particles(self) -> int:
        """Particle number at half filling."""
        return self.L // 2

    @property
    def gamma(self) -> int:
        return self.bc.gamma

    @property
    def closed_shell(self) -> bool:
        """True iff the half-filled ground state is unique and gapped.

        Requires L in 4N for antiperiodic rings or L in 4N+2 for periodic
        ones; the boundary string of the fermion-to-qubit mapping is then
        trivial and the circuit experiments are well defined.
        """
        if self.bc is BoundaryCondition.APBC:
            return self.L % 4 == 0
        return self.L % 4 == 2

    def require_closed_shell(self) -> "SshParams":
        if not self.closed_shell:
            want = "L in 4N" if self.bc is BoundaryCondition.APBC else "L in 4N+2"
            raise ClosedShellError(
                f"L={self.L} with {self.bc.value} violates the closed-shell "
                f"condition ({want} required)"
            )
        return self


@dataclass(frozen=True)
class SingleParticleHamiltonians:
    """Dense L x L hopping matrices of the chain.

    ``h1`` holds the v-bonds, ``h2`` the w-bonds including the boundary
    sign, and ``h = h1 + h2``. The bond lists give (row, col, amplitude)
    for each bond with row < col except the boundary bond; they back the
    closed-form bond-block evolution in :mod:`dqap.gaussian`.
    """

    h1: np.ndarray
    h2: np.ndarray
    h: np.ndarray
    v_bonds: tuple[tuple[int, int, float], ...]
    w_bonds: tuple[tuple[int, int, float], ...]

    @property
    def L(self) -> int:
        return self.h.shape[0]


def build_hamiltonians(p: SshParams, strict: bool = False) -> SingleParticleHamiltonians:
    """Build the single-particle matrices for the given parameters.

    Parameters
    ----------
    p : SshParams
    strict : bool
        If True, additionally reject (L, bc) combinations violating the
        closed-shell condition.
    """
    if strict:
        p.require_closed_shell()
    L = p.L
    h1 = np.zeros((L, L))
    h2 = np.zeros((L, L))
    v_bonds = []
    w_bonds = []
    for j in range(L // 2):
        a, b = 2 * j, 2 * j + 1
        h1[a, b] = h1[b, a] = -p.v
        v_bonds.append((a, b, -p.v))
    for j in range(L // 2):
        a, b = 2 * j + 1, (2 * j + 2) % L
        amp = -p.w if 2 * j + 2 < L else -p.gamma * p.w
        h2[a, b] = h2[b, a] = amp
        w_bonds.append((a, b, amp))
    return SingleParticleHamiltonians(
        h1=h1, h2=h2, h=h1 + h2, v_bonds=tuple(v_bonds), w_bonds=tuple(w_bonds)
    )


def exact_ground_state(hams: SingleParticleHamiltonians, N: int):
    """Half-filled ground state by dense diagonalization.

    Returns
    -------
    (SlaterState, float)
        The N lowest-eigenvalue orbitals and the sum of those eigenvalues.
        Each orbital is rotated so its largest-magnitude component is real
        positive, which makes the output deterministic.

    Raises
    ------
    EigensolverError
        If the dense eigensolver does not converge.
    ValueError
        If the spectrum is degenerate at the filling edge (cannot happen
        for valid closed-shell parameters).
    """
    from .gaussian import SlaterState

    L = hams.L
    if not 0 < N <= L:
        raise ValueError(f"need 0 < N <= L, got N={N}, L={L}")
    try:
        evals, evecs = np.linalg.eigh(hams.h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed on {L}x{L} matrix: {exc}") from exc
    if N < L and evals[N] - evals[N - 1] < 1e-12:
        raise ValueError(
            f"degenerate filling edge: e[{N - 1}]={evals[N - 1]:.3e} vs "
            f"e[{N}]={evals[N]:.3e}; check the closed-shell condition"
        )
    P = evecs[:, :N].astype(complex)
    for n in range(N):
        k = int(np.argmax(np.abs(P[:, n])))
        z = P[k, n]
        if abs(z) > 0:
            P[:, n] *= np.conj(z) / abs(z)
    return SlaterState(P), float(np.sum(evals[:N]))


def elliptic_e2(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the second kind.

    Evaluates the integral of sqrt(1 - m sin^2 t) for t in [0, phi] by
    adaptive quadrature with absolute error below 1e-12.
    """
    val, err = integrate.quad(
        lambda t: np.sqrt(1.0 - m * np.sin(t) ** 2), 0.0, phi, epsabs=1e-13, epsrel=1e-13
    )
    if err > 1e-12:
        raise ArithmeticError(f"quadrature error estimate {err:.2e} exceeds 1e-12")
    return val


def energy_per_site_thermo(v: float, w: float) -> float:
    """Magnitude of the ground-state energy per site in the infinite chain.

    Computed as ((v+w)/pi) * E2(pi/2, 4vw/(v+w)^2) with E2 the incomplete
    elliptic integral of the second kind. The value is positive; use
    :func:`energy_per_site_thermo_signed` for the actual (negative)
    ground-state energy density.
    """
    if v + w <= 0:
        raise ValueError("need v + w > 0")
    m = 4.0 * v * w / (v + w) ** 2
    return (v + w) / np.pi * elliptic_e2(np.pi / 2, m)


def energy_per_site_thermo_signed(v: float, w: float) -> float:
    """Ground-state energy per site in the infinite chain (negative).

    Sign fixed to match exact diagonalization of finite rings.
    """
    return -energy_per_site_thermo(v, w)
