"""Entanglement entropy, mutual information, and ring polarization.

All quantities derive from the free-fermion reductions: subsystem
entropies come from eigenvalues of principal submatrices of the
correlation matrix, and the polarization phase comes from a determinant
over the occupied orbitals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .gaussian import SlaterState

# Eigenvalues of a correlation submatrix may stray this far outside [0, 1]
# before we declare the matrix invalid; anything closer is clamped.
_NU_TOL = 1e-8


class InvalidCorrelationError(ValueError):
    """Correlation-matrix eigenvalue far outside [0, 1]."""


class IndeterminatePolarizationError(ArithmeticError):
    """|<U_R>| is numerically zero, so its phase is undefined."""


@dataclass(frozen=True)
class Subsystem:
    """Sorted set of 1-based site indices."""

    sites: tuple[int, ...]

    def __post_init__(self):
        if len(self.sites) == 0:
            raise ValueError("subsystem must be non-empty")
        if any(s < 1 for s in self.sites):
            raise ValueError("site indices are 1-based and must be >= 1")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("duplicate site indices")
        object.__setattr__(self, "sites", tuple(sorted(self.sites)))

    @classmethod
    def of(cls, *sites: int) -> "Subsystem":
        return cls(tuple(sites))

    @classmethod
    def half_cut_on_w_bonds(cls, L: int) -> "Subsystem":
        """Contiguous half chain, sites 1..L/2, with both cuts on w-bonds.

        Requires L in 4N so that site L/2 ends a unit cell.
        """
        if L % 4 != 0:
            raise ValueError(f"half cut on w-bonds needs L in 4N, got L={L}")
        return cls(tuple(range(1, L // 2 + 1)))

    def union(self, other: "Subsystem") -> "Subsystem":
        overlap = set(self.sites) & set(other.sites)
        if overlap:
            raise ValueError(f"subsystems overlap on sites {sorted(overlap)}")
        return Subsystem(self.sites + other.sites)

    def indices(self, L: int) -> np.ndarray:
        """0-based array indices, validated against the system size."""
        if self.sites[-1] > L:
            raise ValueError(f"site {self.sites[-1]} outside chain of length {L}")
        return np.array(self.sites, dtype=int) - 1


def _binary_entropy_sum(nu: np.ndarray) -> float:
    return float(-np.sum(xlogy(nu, nu) + xlogy(1.0 - nu, 1.0 - nu)))


def entanglement_entropy(C: np.ndarray, A: Subsystem) -> float:
    """Von Neumann entropy of subsystem A from the correlation matrix.

    Uses the eigenvalues nu of the |A| x |A| principal submatrix:
    S = -sum nu ln nu + (1-nu) ln(1-nu).
    """
    idx = A.indices(C.shape[0])
    nu = np.linalg.eigvalsh(C[np.ix_(idx, idx)])
    if nu.min() < -_NU_TOL or nu.max() > 1.0 + _NU_TOL:
        raise InvalidCorrelationError(
            f"correlation eigenvalues outside [0,1]: min={nu.min():.3e}, max={nu.max():.3e}"
        )
    return _binary_entropy_sum(np.clip(nu, 0.0, 1.0))


def mutual_information(C: np.ndarray, A: Subsystem, B: Subsystem) -> float:
    """I(A, B) = S_A + S_B - S_{A u B}; A and B must be disjoint."""
    AB = A.union(B)
    val = entanglement_entropy(C, A) + entanglement_entropy(C, B) - entanglement_entropy(C, AB)
    if val < -1e-10:
        raise InvalidCorrelationError(f"mutual information {val:.3e} below the numerical floor")
    return max(val, 0.0)


def wrap_angle(d: float) -> float:
    """Wrap an angle difference into (-pi, pi]."""
    w = (d + np.pi) % (2.0 * np.pi) - np.pi
    return np.pi if w == -np.pi else float(w)


def polarization(s: SlaterState, origin_shift: int = 0):
    """Ring polarization of the state.

    Computes z = <U_R> = det(P+ D P) with D = diag(exp(2 pi i l / L)),
    l = 1..L (shifted by ``origin_shift`` sites when given), and the
    phase P = atan2(Im z, Re z) in (-pi, pi].

    Returns
    -------
    (x, y, P) : (float, float, float)

    Raises
    ------
    IndeterminatePolarizationError
        If |z| < 1e-12 so the phase carries no information.
    """
    L = s.L
    phases = np.exp(2j * np.pi * (np.arange(1, L + 1) + origin_shift) / L)
    z = complex(np.linalg.det(s.P.conj().T @ (phases[:, None] * s.P)))
    if abs(z) < 1e-12:
        raise IndeterminatePolarizationError(f"|<U_R>| = {abs(z):.3e} is too small")
    return z.real, z.imag, float(np.arctan2(z.imag, z.real))


@dataclass(frozen=True)
class PolarizationRecord:
    """Polarization at one circuit depth, with the wrapped change from M=0."""

    M: int
    value: float
    delta: float
    x: float
    y: float


def make_records(values: dict[int, tuple[float, float, float]]) -> list[PolarizationRecord]:
    """Assemble records from {M: (x, y, P)} measured per depth."""
    if 0 not in values:
        raise ValueError("records need the M=0 baseline")
    base = values[0][2]
    return [
        PolarizationRecord(M=M, value=P, delta=wrap_angle(P - base) if M else 0.0, x=x, y=y)
        for M, (x, y, P) in sorted(values.items())
    ]


def critical_depth(records: list[PolarizationRecord], threshold: float = np.pi / 2):
    """Smallest depth at which the polarization jumps between layers.

    The records must cover consecutive depths M = 0..M_max. Returns the
    smallest M with |wrap(P(M) - P(M-1))| > threshold, or None.
    """
    recs = sorted(records, key=lambda r: r.M)
    Ms = [r.M for r in recs]
    if Ms != list(range(Ms[0], Ms[0] + len(Ms))):
        raise ValueError(f"depth sequence has gaps: {Ms}")
    for prev, cur in zip(recs, recs[1:]):
        if abs(wrap_angle(cur.value - prev.value)) > threshold:
            return cur.M
    return None


def fit_log_entropy(points) -> tuple[float, float, float]:
    """Least-squares fit S = a ln M + b over (M, S) points.

    Returns (a, b, r2). Needs at least 3 points with M >= 1 and at least
    two distinct M values.
    """
    pts = [(int(M), float(S)) for M, S in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(M < 1 for M, _ in pts):
        raise ValueError("depths must be >= 1")
    x = np.log([M for M, _ in pts])
    y = np.array([S for _, S in pts])
    if np.ptp(x) == 0:
        raise ValueError("all depths equal; fit is singular")
    design = np.column_stack([x, np.ones_like(x)])
    (a, b), res, *_ = np.linalg.lstsq(design, y, rcond=None)
    ss_res = float(np.sum((y - design @ np.array([a, b])) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), float(r2)
