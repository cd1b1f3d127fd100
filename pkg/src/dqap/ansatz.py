"""Variational schedule, exact gradient/metric, natural gradient descent.

The circuit has M layers; layer m applies exp(-i t_m1 H1) exp(-i t_m2 H2)
to the running state. The energy gradient and the (real part of the)
quantum geometric tensor are computed exactly from tangent orbital
matrices: differentiating layer m inserts the generator -i h_i at that
layer, and the resulting tangent is pushed through the remaining layers
with the same closed-form bond rotations as the state itself.

For orthonormal P and tangents Q_k = dP/dt_k,

    grad_k = 2 Re Tr(Q_k+ h P)
    S_kl   = Re Tr[Q_k+ (1 - P P+) Q_l]

which is symmetric positive semidefinite by construction.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.linalg

from .gaussian import (
    SlaterState,
    apply_bond_generator,
    apply_bond_rotation,
    initial_state,
)
from .model import SingleParticleHamiltonians, SshParams, build_hamiltonians

logger = logging.getLogger("dqap.ansatz")

# Step-size growth cap for the backtracking line search.
_ETA_MAX = 2.0
_MAX_BACKTRACKS = 30


class OptimizationError(RuntimeError):
    """Non-finite energy or gradient encountered during optimization."""


class WarmStart(Enum):
    FROM_PREVIOUS_M = "from_previous_m"
    FIXED = "fixed"
    RANDOM = "random"


@dataclass(frozen=True)
class ParamSchedule:
    """Ordered variational angles: M pairs (theta_m1, theta_m2), radians."""

    thetas: tuple[tuple[float, float], ...]

    def __post_init__(self):
        flat = [t for pair in self.thetas for t in pair]
        if any(len(pair) != 2 for pair in self.thetas):
            raise ValueError("each layer needs exactly two angles")
        if not all(np.isfinite(flat)):
            raise ValueError("angles must be finite")

    @property
    def M(self) -> int:
        return len(self.thetas)

    def flatten(self) -> np.ndarray:
        """Angles as a flat vector [t_11, t_12, t_21, t_22, ...] of length 2M."""
        return np.array([t for pair in self.thetas for t in pair], dtype=float)

    @classmethod
    def from_flat(cls, flat) -> "ParamSchedule":
        flat = np.asarray(flat, dtype=float)
        if flat.size % 2 != 0:
            raise ValueError("flat angle vector must have even length")
        return cls(tuple((float(flat[2 * m]), float(flat[2 * m + 1])) for m in range(flat.size // 2)))

    @classmethod
    def zeros(cls, M: int) -> "ParamSchedule":
        return cls(tuple((0.0, 0.0) for _ in range(M)))

    def padded(self) -> "ParamSchedule":
        """Append one layer initialized to (0, 0)."""
        return ParamSchedule(self.thetas + ((0.0, 0.0),))

    def truncated(self, m: int) -> "ParamSchedule":
        """Keep only the first m layers."""
        if not 0 <= m <= self.M:
            raise ValueError(f"cannot truncate {self.M}-layer schedule to {m}")
        return ParamSchedule(self.thetas[:m])


@dataclass(frozen=True)
class OptimizerConfig:
    """Natural-gradient settings.

    ``learning_rate`` is the initial step size; the line search halves it
    until the energy decreases and lets it grow again (capped) after
    successful steps. ``warm_start`` controls how depth scans seed each M.
    """

    learning_rate: float = 0.1
    metric_regularization: float = 1e-6
    max_iterations: int = 5000
    grad_tolerance: float = 1e-10
    energy_tolerance: float = 1e-13
    warm_start: WarmStart = WarmStart.FROM_PREVIOUS_M
    warm_start_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.metric_regularization < 0:
            raise ValueError("metric_regularization must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.grad_tolerance <= 0 or self.energy_tolerance <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class OptimizationResult:
    schedule: ParamSchedule
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    energy_history: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "schedule": [list(pair) for pair in self.schedule.thetas],
                "energy": self.energy,
                "grad_norm": self.grad_norm,
                "iterations": self.iterations,
                "converged": self.converged,
                "energy_history": list(self.energy_history),
            }
        )


def evolve(
    schedule: ParamSchedule,
    p: SshParams,
    hams: SingleParticleHamiltonians | None = None,
) -> SlaterState:
    """Apply the M layers of the schedule to the dimer initial state."""
    p.require_closed_shell()
    if hams is None:
        hams = build_hamiltonians(p)
    P = initial_state(p).P.copy()
    for t1, t2 in schedule.thetas:
        apply_bond_rotation(P, hams.w_bonds, t2)
        apply_bond_rotation(P, hams.v_bonds, t1)
    return SlaterState(P)


def _energy_of_flat(flat: np.ndarray, hams: SingleParticleHamiltonians, P0: np.ndarray) -> float:
    P = P0.copy()
    for m in range(flat.size // 2):
        apply_bond_rotation(P, hams.w_bonds, flat[2 * m + 1])
        apply_bond_rotation(P, hams.v_bonds, flat[2 * m])
    return float(np.einsum("ln,lk,kn->", P.conj(), hams.h, P, optimize=True).real)


def _evaluate(flat: np.ndarray, hams: SingleParticleHamiltonians, P0: np.ndarray):
    """Energy, gradient, metric and final orbitals in one forward pass.

    Tangents are stacked as a (2M, L, N) tensor so each layer advances the
    state and every live tangent in a single vectorized bond rotation;
    the summation order is fixed, so results do not depend on threading.
    """
    M = flat.size // 2
    L, N = P0.shape
    P = P0.copy()
    Q = np.zeros((2 * M, L, N), dtype=complex)
    for m in range(M):
        t1, t2 = flat[2 * m], flat[2 * m + 1]
        live = Q[: 2 * m]
        apply_bond_rotation(live, hams.w_bonds, t2)
        apply_bond_rotation(live, hams.v_bonds, t1)
        apply_bond_rotation(P, hams.w_bonds, t2)
        T2 = apply_bond_generator(P, hams.w_bonds)
        apply_bond_rotation(T2, hams.v_bonds, t1)
        apply_bond_rotation(P, hams.v_bonds, t1)
        Q[2 * m] = apply_bond_generator(P, hams.v_bonds)
        Q[2 * m + 1] = T2
    hP = hams.h @ P
    energy = float(np.vdot(P, hP).real)
    grad = 2.0 * np.tensordot(Q.conj(), hP, axes=([1, 2], [0, 1])).real
    # Gram matrices of tangents and of their projections onto the state.
    G = np.tensordot(Q.conj(), Q, axes=([1, 2], [1, 2]))
    PQ = np.einsum("ln,klm->knm", P.conj(), Q, optimize=True)
    G -= np.tensordot(PQ.conj(), PQ, axes=([1, 2], [1, 2]))
    metric = 0.5 * (G.real + G.real.T)
    return energy, grad, metric, P


def gradient_and_metric(schedule: ParamSchedule, p: SshParams):
    """Exact energy gradient and quantum-metric tensor at the schedule.

    Returns
    -------
    (grad, metric) : (ndarray of shape (2M,), ndarray of shape (2M, 2M))
        Flattening order matches :meth:`ParamSchedule.flatten`.
    """
    if schedule.M < 1:
        raise ValueError("need at least one layer")
    p.require_closed_shell()
    hams = build_hamiltonians(p)
    P0 = initial_state(p).P
    _, grad, metric, _ = _evaluate(schedule.flatten(), hams, P0)
    return grad, metric


def _solve_step(metric: np.ndarray, grad: np.ndarray, eps: float) -> np.ndarray:
    A = metric + eps * np.eye(metric.shape[0])
    try:
        c, low = scipy.linalg.cho_factor(A, check_finite=False)
        return scipy.linalg.cho_solve((c, low), grad, check_finite=False)
    except scipy.linalg.LinAlgError:
        pass
    try:
        lam, V = np.linalg.eigh(A)
        inv = np.where(lam > max(lam[-1], eps) * 1e-14, 1.0 / lam, 0.0)
        return (V * inv) @ (V.T @ grad)
    except np.linalg.LinAlgError:
        logger.warning("metric solve failed twice; falling back to plain gradient")
        return grad.copy()


def optimize(
    p: SshParams,
    M: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    init: ParamSchedule | None = None,
) -> OptimizationResult:
    """Minimize the energy over the 2M angles by natural gradient descent.

    Each iteration steps along -(S + eps I)^{-1} grad with a backtracking
    line search that halves the step until the energy decreases (falling
    back to the plain gradient direction if the preconditioned one fails);
    accepted energies are therefore non-increasing. Stops on gradient
    norm, relative energy change, or the iteration cap, and returns the
    best schedule seen.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    p.require_closed_shell()
    if init is not None:
        if init.M != M:
            raise ValueError(f"init has {init.M} layers, expected {M}")
        flat = init.flatten()
    elif cfg.warm_start is WarmStart.RANDOM:
        rng = np.random.Generator(np.random.Philox(key=cfg.warm_start_seed))
        flat = rng.uniform(0.0, np.pi / 2, size=2 * M)
    else:
        # The all-zeros point is an exact stationary saddle (the state is
        # an eigenstate of both generators there); seed off-symmetry.
        flat = np.tile([0.15, 0.1], M)

    hams = build_hamiltonians(p)
    P0 = initial_state(p).P
    energy, grad, metric, _ = _evaluate(flat, hams, P0)
    if not (np.isfinite(energy) and np.all(np.isfinite(grad))):
        raise OptimizationError(f"non-finite objective at initialization: E={energy}")

    history = [energy]
    best_flat, best_energy = flat.copy(), energy
    eta = cfg.learning_rate
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= cfg.grad_tolerance:
            converged = True
            iterations -= 1
            break
        step = _solve_step(metric, grad, cfg.metric_regularization)
        accepted = False
        for direction in (step, grad):
            trial_eta = eta
            for _ in range(_MAX_BACKTRACKS):
                trial = flat - trial_eta * direction
                e_trial = _energy_of_flat(trial, hams, P0)
                if np.isfinite(e_trial) and e_trial <= energy:
                    accepted = True
                    break
                trial_eta *= 0.5
            if accepted:
                break
        if not accepted:
            # Numerical floor: no descent direction at double precision.
            converged = True
            break
        rel_change = (energy - e_trial) / max(1.0, abs(e_trial))
        flat, energy = trial, e_trial
        history.append(energy)
        if energy < best_energy:
            best_energy, best_flat = energy, flat.copy()
        eta = min(trial_eta * 2.0, _ETA_MAX)
        _, grad, metric, _ = _evaluate(flat, hams, P0)
        if not np.all(np.isfinite(grad)):
            raise OptimizationError(f"non-finite gradient at iteration {iterations}")
        if rel_change <= cfg.energy_tolerance:
            converged = True
            break
        if iterations % 200 == 0:
            logger.debug(
                "L=%d M=%d it=%d E=%.12f |g|=%.3e eta=%.3g", p.L, M, iterations, energy, grad_norm, eta
            )

    _, grad, _, _ = _evaluate(best_flat, hams, P0)
    return OptimizationResult(
        schedule=ParamSchedule.from_flat(best_flat),
        energy=best_energy,
        grad_norm=float(np.linalg.norm(grad)),
        iterations=iterations,
        converged=converged,
        energy_history=tuple(history),
    )


def save_schedule_csv(schedule: ParamSchedule, path: str | Path) -> None:
    """Write the schedule as CSV rows ``m,theta1,theta2`` (17 significant digits)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["m", "theta1", "theta2"])
        for m, (t1, t2) in enumerate(schedule.thetas, start=1):
            writer.writerow([m, format(t1, ".17g"), format(t2, ".17g")])


def load_schedule_csv(path: str | Path) -> ParamSchedule:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["m", "theta1", "theta2"]:
            raise ValueError(f"unexpected schedule CSV header: {header}")
        pairs = []
        for row in reader:
            if not row:
                continue
            m, t1, t2 = int(row[0]), float(row[1]), float(row[2])
            if m != len(pairs) + 1:
                raise ValueError(f"non-consecutive layer index {m} in schedule CSV")
            pairs.append((t1, t2))
    return ParamSchedule(tuple(pairs))
