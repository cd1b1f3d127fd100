"""Dense statevector simulator with bit-masked in-place gate kernels.

Basis index i encodes occupations as bits: bit q of i is the state of
qubit q. Gates act in place on a single owned amplitude buffer through
reshaped stride views, never through generic gate-matrix products.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 20

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class QubitEnvelopeError(ValueError):
    """Requested register exceeds the supported qubit count."""


class Statevector:
    """2^n complex amplitudes over n qubits (n <= 20), initialized to |0...0>."""

    def __init__(self, n: int, amplitudes: np.ndarray | None = None):
        if n < 1 or n > MAX_QUBITS:
            raise QubitEnvelopeError(f"need 1 <= n <= {MAX_QUBITS}, got {n}")
        self.n = n
        if amplitudes is None:
            self.amplitudes = np.zeros(1 << n, dtype=complex)
            self.amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=complex)
            if amplitudes.shape != (1 << n,):
                raise ValueError(f"expected {1 << n} amplitudes, got {amplitudes.shape}")
            self.amplitudes = amplitudes.copy()

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    # -- stride views ------------------------------------------------------

    def _split1(self, q: int):
        """View with axis 1 running over the value of bit q."""
        return self.amplitudes.reshape(1 << (self.n - 1 - q), 2, 1 << q)

    def _split2(self, a: int, b: int):
        """View with axes (1, 3) running over bits (hi, lo), hi > lo."""
        hi, lo = (a, b) if a > b else (b, a)
        v = self.amplitudes.reshape(
            1 << (self.n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo
        )
        return v, (a > b)

    def _pair_slices(self, a: int, b: int, va: int, vb: int):
        """Slice of amplitudes with bit a = va and bit b = vb."""
        v, a_is_hi = self._split2(a, b)
        return v[:, va if a_is_hi else vb, :, vb if a_is_hi else va, :]

    # -- single-qubit gates ------------------------------------------------

    def _apply_1q(self, q: int, u00, u01, u10, u11):
        v = self._split1(q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = u00 * a0 + u01 * a1
        v[:, 1, :] = u10 * a0 + u11 * a1

    def x(self, q: int):
        v = self._split1(q)
        v[:, [0, 1], :] = v[:, [1, 0], :]

    def h(self, q: int):
        self._apply_1q(q, _SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF)

    def rx(self, q: int, theta: float):
        c, s = np.cos(theta / 2), -1j * np.sin(theta / 2)
        self._apply_1q(q, c, s, s, c)

    def rz(self, q: int, theta: float):
        v = self._split1(q)
        v[:, 0, :] *= np.exp(-0.5j * theta)
        v[:, 1, :] *= np.exp(0.5j * theta)

    def sdg(self, q: int):
        v = self._split1(q)
        v[:, 1, :] *= -1j

    # -- two-qubit gates -----------------------------------------------------

    def cnot(self, control: int, target: int):
        s10 = self._pair_slices(control, target, 1, 0)
        s11 = self._pair_slices(control, target, 1, 1)
        tmp = s10.copy()
        s10[...] = s11
        s11[...] = tmp

    def cphase(self, control: int, target: int, lam: float):
        self._pair_slices(control, target, 1, 1)[...] *= np.exp(1j * lam)

    def zzphase(self, a: int, b: int, alpha: float):
        """exp(-(1/2) i pi alpha Z_a Z_b)."""
        same = np.exp(-0.5j * np.pi * alpha)
        diff = np.exp(0.5j * np.pi * alpha)
        self._pair_slices(a, b, 0, 0)[...] *= same
        self._pair_slices(a, b, 1, 1)[...] *= same
        self._pair_slices(a, b, 0, 1)[...] *= diff
        self._pair_slices(a, b, 1, 0)[...] *= diff

    def xxyy(self, a: int, b: int, phi: float):
        """exp(-i (phi/2) (X_a X_b + Y_a Y_b)): rotation in the (01, 10) block."""
        s01 = self._pair_slices(a, b, 0, 1)
        s10 = self._pair_slices(a, b, 1, 0)
        c, s = np.cos(phi), -1j * np.sin(phi)
        new01 = c * s01 + s * s10
        s10[...] = s * s01 + c * s10
        s01[...] = new01

    def iswap(self, a: int, b: int, alpha: float):
        """exp(-(1/4) i pi alpha (X_a X_b + Y_a Y_b))."""
        self.xxyy(a, b, np.pi * alpha / 2.0)

    # -- measurement-free readout -------------------------------------------

    def probability_bit(self, q: int, value: int) -> float:
        v = self._split1(q)
        return float(np.sum(np.abs(v[:, value, :]) ** 2))

    def overlap(self, other: "Statevector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def bit_values(n: int, q: int) -> np.ndarray:
    """Bit q of every basis index, as a 0/1 array of length 2^n."""
    return (np.arange(1 << n) >> q) & 1


def xy_expectation(psi: Statevector, a: int, b: int) -> float:
    """<sigma+_a sigma-_b + sigma-_a sigma+_b> = (1/2) <X_a X_b + Y_a Y_b>."""
    s01 = psi._pair_slices(a, b, 0, 1)
    s10 = psi._pair_slices(a, b, 1, 0)
    return float(2.0 * np.vdot(s01, s10).real)
