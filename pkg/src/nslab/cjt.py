"""Full-information cyclic Jacobi diagonalization.

This is the exact counterpart of the blind learner: it sees the matrix and
computes each annihilating rotation in closed form. The learning code uses
it as a convergence reference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .linalg import RotationParams, hermitian, off_diag_norm, rotation_block


def sweep_schedule(n_t: int) -> list[tuple[int, int]]:
    """Row-major cyclic ordering ``(0,1), (0,2), ..., (n_t-2, n_t-1)``."""
    if n_t < 2:
        raise ValueError("a sweep needs at least two coordinates")
    return [(l, m) for l in range(n_t - 1) for m in range(l + 1, n_t)]


def wrap_angle(x: float, half_period: float = np.pi) -> float:
    """Reduce ``x`` into ``[-half_period, half_period)``."""
    return float((x + half_period) % (2 * half_period) - half_period)


def exact_rotation_angles(A, l: int, m: int) -> RotationParams:
    """Angles of the rotation that zeroes entry ``(l, m)`` of ``R^* A R``.

    ``phi`` is the minimizer of ``S(A, r(pi/4, phi))`` and ``theta`` lies in
    ``[-pi/4, pi/4]``, which is what the two blind line searches converge to.
    """
    a_lm = A[l, m]
    mag = abs(a_lm)
    if mag == 0.0:
        return RotationParams(l, m, 0.0, 0.0)
    phi = wrap_angle(np.angle(a_lm) + np.pi)
    gap = (A[m, m] - A[l, l]).real
    theta = np.pi / 4 if gap == 0.0 else 0.5 * np.arctan(2 * mag / gap)
    return RotationParams(l, m, float(theta), phi)


def apply_rotation(A: np.ndarray, p: RotationParams) -> None:
    """In-place ``A <- R^* A R`` using two-row/two-column updates."""
    idx = [p.l, p.m]
    B = rotation_block(p.theta, p.phi)
    A[:, idx] = A[:, idx] @ B
    A[idx, :] = B.conj().T @ A[idx, :]
    # keep the diagonal exactly real
    A[p.l, p.l] = A[p.l, p.l].real
    A[p.m, p.m] = A[p.m, p.m].real


@dataclass
class CJTStep:
    k: int
    l: int
    m: int
    theta: float
    phi: float
    P: float


@dataclass
class CJTResult:
    V: np.ndarray
    diag: np.ndarray
    A: np.ndarray
    P0: float
    trace: list[CJTStep] = field(default_factory=list)
    sweeps: int = 0

    def sweep_P(self) -> list[float]:
        """P at the start and after every completed sweep."""
        n_t = self.V.shape[0]
        m = n_t * (n_t - 1) // 2
        out = [self.P0]
        out += [s.P for s in self.trace if s.k % m == 0]
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "l", "m", "theta", "phi", "P_k"])
            for s in self.trace:
                w.writerow([s.k, s.l + 1, s.m + 1, repr(float(s.theta)), repr(float(s.phi)), repr(float(s.P))])


def cjt_diagonalize(G, stop_tol: float = 1e-12, max_sweeps: int = 30) -> CJTResult:
    """Diagonalize Hermitian ``G`` by cyclic Jacobi sweeps.

    Stops once the off-diagonal norm drops to ``stop_tol * ||G||_F`` (checked
    before every rotation) or after ``max_sweeps`` sweeps. The trace holds P
    after each rotation, so ``V^* G V`` equals the returned ``A``.
    """
    A = hermitian(G)
    n_t = A.shape[0]
    V = np.eye(n_t, dtype=complex)
    target = stop_tol * np.linalg.norm(A)
    P = off_diag_norm(A)
    res = CJTResult(V=V, diag=A.diagonal().real.copy(), A=A, P0=P)
    if n_t < 2:
        return res
    schedule = sweep_schedule(n_t)
    k = 0
    for sweep in range(max_sweeps):
        for l, m in schedule:
            if P <= target:
                break
            p = exact_rotation_angles(A, l, m)
            apply_rotation(A, p)
            V[:, [l, m]] = V[:, [l, m]] @ rotation_block(p.theta, p.phi)
            k += 1
            P = off_diag_norm(A)
            res.trace.append(CJTStep(k, l, m, p.theta, p.phi, P))
        else:
            res.sweeps = sweep + 1
            continue
        break
    res.diag = A.diagonal().real.copy()
    return res
