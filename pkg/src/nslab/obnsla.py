"""Blind null-space learning by cyclic one-bit rotations.

The learner holds a unitary ``W`` and, for each pair ``(l, m)`` of the
cyclic schedule, finds the rotation that (approximately) zeroes entry
``(l, m)`` of ``A = W^* G W`` using only one-bit comparisons. ``G`` is never
read by the learner; :class:`Observer` reads it for instrumentation only.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cjt import sweep_schedule
from .feedback import FeedbackOracle, ModeError
from .linalg import RotationParams, off_diag_norm, rotate_columns
from .linesearch import find_phi, find_theta

DEFAULT_MAX_SWEEPS = 12


class Observer:
    """Test-side view of the hidden Gram matrix.

    ``max_interference`` uses the ``n_t - n_r`` columns of ``W`` with the
    smallest true quadratic form, i.e. the precoder an ideal ordering would pick.
    """

    def __init__(self, G, n_r: Optional[int] = None):
        self.G = np.asarray(G, dtype=complex)
        self.n_r = n_r
        self.G_norm = float(np.linalg.norm(self.G))

    def A(self, W: np.ndarray) -> np.ndarray:
        return W.conj().T @ self.G @ W

    def P(self, W: np.ndarray) -> float:
        return off_diag_norm(self.A(W))

    def column_interference(self, W: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->j", W.conj(), self.G @ W).real

    def max_interference(self, W: np.ndarray) -> Optional[float]:
        if self.n_r is None:
            return None
        q = np.sort(self.column_interference(W))
        return float(q[: W.shape[1] - self.n_r].max())


@dataclass
class RotationRecord:
    k: int
    sweep: int
    l: int
    m: int
    theta_raw: float
    theta: float
    phi: float
    delta: float
    tc_total: int
    P: Optional[float] = None
    max_interference: Optional[float] = None


@dataclass
class LearningState:
    """Learner state plus the per-rotation trace.

    ``sweep_P`` / ``sweep_interference`` are filled only when an observer is
    attached: entry 0 is the initial value, entry ``s`` the value after sweep
    ``s``. ``permutation`` is the column order applied at the last sweep end.
    """

    W: np.ndarray
    eta: float
    k: int = 0
    sweeps: int = 0
    converged: bool = False
    delta_history: list[float] = field(default_factory=list)
    permutation: list[int] = field(default_factory=list)
    trace: list[RotationRecord] = field(default_factory=list)
    sweep_P: list[float] = field(default_factory=list)
    sweep_interference: list[float] = field(default_factory=list)
    tc_total: int = 0
    diag_tc: int = 0
    n_r: Optional[int] = None

    @property
    def n_t(self) -> int:
        return self.W.shape[0]

    def unitarity_error(self) -> float:
        return float(np.linalg.norm(self.W.conj().T @ self.W - np.eye(self.n_t)))

    def to_csv(self, path) -> None:
        fmt = lambda v: "" if v is None else repr(float(v))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "sweep", "l", "m", "theta_hat", "phi_hat", "delta", "tc_total",
                        "P_k", "max_interference"])
            for r in self.trace:
                w.writerow([r.k, r.sweep, r.l + 1, r.m + 1, repr(float(r.theta)), repr(float(r.phi)),
                            repr(float(r.delta)), r.tc_total, fmt(r.P), fmt(r.max_interference)])


def tournament_order(wins: np.ndarray) -> list[int]:
    """Column order by descending number of pairwise diagonal wins (stable)."""
    return sorted(range(len(wins)), key=lambda i: -wins[i])


def run_obnsla(oracle: FeedbackOracle, n_t: int, eta: float, max_sweeps: int = DEFAULT_MAX_SWEEPS,
               *, observer: Optional[Observer] = None, stop_on_convergence: bool = True,
               modified: bool = False, smi: str = "one-bit", repeats: int = 1,
               W0: Optional[np.ndarray] = None) -> LearningState:
    """Cyclic one-bit learning of the eigenvectors of the hidden ``G``.

    Stops after the first full sweep in which every ``|theta_hat| < eta``
    (unless ``stop_on_convergence`` is False) or after ``max_sweeps``.
    ``modified`` orders the columns of ``W`` by estimated diagonal magnitude
    at the end of every sweep, largest first.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    W = np.eye(n_t, dtype=complex) if W0 is None else np.array(W0, dtype=complex)
    state = LearningState(W=W, eta=eta, permutation=list(range(n_t)))
    if observer is not None:
        state.sweep_P.append(observer.P(W))
        mi = observer.max_interference(W)
        if mi is not None:
            state.sweep_interference.append(mi)
    schedule = sweep_schedule(n_t)
    for sweep in range(1, max_sweeps + 1):
        wins = np.zeros(n_t, dtype=int)
        largest = 0.0
        for l, m in schedule:
            phi = find_phi(oracle, W, l, m, eta, repeats=repeats, smi=smi)
            res = find_theta(oracle, W, l, m, phi, eta, compare_diagonal=modified,
                             repeats=repeats, smi=smi)
            if modified:
                wins[l if res.diag_order == 1 else m] += 1
                state.diag_tc += res.diag_cost
            W = rotate_columns(W, RotationParams(l, m, res.theta, phi))
            state.k += 1
            delta = abs(res.theta)
            largest = max(largest, delta)
            state.delta_history.append(delta)
            rec = RotationRecord(state.k, sweep, l, m, res.theta_raw, res.theta, phi, delta,
                                 oracle.tc_count())
            if observer is not None:
                rec.P = observer.P(W)
                rec.max_interference = observer.max_interference(W)
            state.trace.append(rec)
        if modified:
            order = tournament_order(wins)
            W = W[:, order]
            state.permutation = order
        state.W = W
        state.sweeps = sweep
        if observer is not None:
            state.sweep_P.append(observer.P(W))
            mi = observer.max_interference(W)
            if mi is not None:
                state.sweep_interference.append(mi)
        if largest < eta:
            state.converged = True
            if stop_on_convergence:
                break
    state.W = W
    state.tc_total = oracle.tc_count()
    return state


def run_modified_obnsla(oracle: FeedbackOracle, n_t: int, n_r: int, eta: float,
                        max_sweeps: int = DEFAULT_MAX_SWEEPS, **kw) -> LearningState:
    """:func:`run_obnsla` with the per-sweep diagonal ordering.

    After each sweep the last ``n_t - n_r`` columns of ``W`` are the
    estimated low-interference directions.
    """
    if not 0 <= n_r < n_t:
        raise ValueError("need 0 <= n_r < n_t")
    state = run_obnsla(oracle, n_t, eta, max_sweeps, modified=True, **kw)
    state.n_r = n_r
    return state


def run_bnsla_surrogate(oracle: FeedbackOracle, n_t: int, eta: float,
                        max_sweeps: int = DEFAULT_MAX_SWEEPS, **kw) -> LearningState:
    """Same loop, but starting intervals come from continuous feedback magnitudes."""
    if not oracle.continuous:
        raise ModeError("the magnitude-based variant needs continuous feedback")
    return run_obnsla(oracle, n_t, eta, max_sweeps, smi="magnitude", **kw)


def order_columns(oracle: FeedbackOracle, W: np.ndarray) -> list[int]:
    """Column indices of ``W`` sorted by ascending interference, via one-bit comparisons."""
    cols = [W[:, j] for j in range(W.shape[1])]

    def cmp(i, j):
        if i == j:
            return 0
        h, _ = oracle.compare(cols[i], cols[j])
        return 1 if h == 1 else -1

    return sorted(range(len(cols)), key=functools.cmp_to_key(cmp))


def extract_precoder(state: LearningState, oracle: FeedbackOracle, n_r: int) -> np.ndarray:
    """The ``n_t - n_r`` learned columns with the least interference, ascending."""
    n_t = state.n_t
    if not 0 <= n_r < n_t:
        raise ValueError(f"n_r={n_r} leaves no interference-free dimension for n_t={n_t}")
    order = order_columns(oracle, state.W)
    return state.W[:, order[: n_t - n_r]]


def estimate_rank(oracle: FeedbackOracle, W: np.ndarray, rtol: float = 1e-6) -> int:
    """Number of columns whose measured interference exceeds ``rtol`` times the total.

    The sum of the column measurements equals ``trace(G)``, which bounds
    ``||G||_F`` from above, so the threshold is a scale the learner can observe.
    """
    q = np.array([oracle.measure(W[:, j]) for j in range(W.shape[1])])
    return int(np.sum(q > rtol * q.sum()))
