"""Convergence and interference bounds for the cyclic one-bit learner.

``G_norm`` is the Frobenius norm of the hidden Gram matrix throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

ETA_FACTOR = 7 + 2 * np.sqrt(2)


def _contraction(n_t: int) -> float:
    return 2.0 ** (-(n_t - 2) * (n_t - 1) / 2)


def eta_floor(n_t: int, eta: float, G_norm: float) -> float:
    """Per-sweep additive error ``(n_t^2 - n_t)(7 + 2 sqrt 2) eta^2 ||G||^2``."""
    return (n_t * n_t - n_t) * ETA_FACTOR * eta**2 * G_norm**2


def linear_bound_rhs(P_sq: float, n_t: int, eta: float, G_norm: float) -> float:
    """Upper bound on ``P^2`` one sweep after a sweep boundary where it was ``P_sq``."""
    return P_sq * (1 - _contraction(n_t)) + eta_floor(n_t, eta, G_norm)


def limsup_bound(n_t: int, eta: float, G_norm: float) -> float:
    """Asymptotic bound on ``P_k^2``: the linear recursion's fixed point."""
    return eta_floor(n_t, eta, G_norm) / _contraction(n_t)


def rotation_residual_bound(eta: float, G_norm: float) -> float:
    """Bound on ``|[R^* G R]_{lm}|^2`` after one blind rotation with accuracy ``eta``."""
    return 2 * ETA_FACTOR * eta**2 * G_norm**2


def interference_bounds(P: float, n_t: int, n_r: int, eta: float, G_norm: float) -> dict:
    """Interference bounds for the learned precoder.

    ``prop4`` bounds each precoder column's interference by ``2 P^2``;
    ``sup`` is the asymptotic version of it, and ``asymptotic`` its
    leading ``eta^2`` term. ``precoder_total`` bounds ``||H T||_F^2``.
    """
    lim = limsup_bound(n_t, eta, G_norm)
    return {
        "prop4": 2 * P**2,
        "sup": 2 * lim,
        "asymptotic": 2 * (n_t * n_t - n_t) * eta**2 * G_norm**2,
        "precoder_total": 2 * (n_t - n_r) * P**2,
    }


def interference_bound_hw(P: float) -> float:
    """Per-column interference bound ``sqrt(2) P`` from the Hoffman-Wielandt inequality.

    For a PSD ``G`` with a zero eigenvalue, the smallest diagonal entry of
    ``A = W^* G W`` is at most ``||A - diag(A)||_F = sqrt(2) P``.
    """
    return np.sqrt(2) * P


# --------------------------------------------------------------------------
# spectral gaps and convergence regions


@dataclass
class SpectrumInfo:
    eigenvalues: np.ndarray
    delta: float
    cluster: Optional[tuple[int, ...]] = None
    center: Optional[float] = None
    xi: Optional[np.ndarray] = None
    delta_c: Optional[float] = None
    # whether the cluster is tight relative to the rest of the spectrum
    well_clustered: Optional[bool] = None

    @property
    def xi_norm(self) -> float:
        return 0.0 if self.xi is None else float(np.linalg.norm(self.xi))


def min_gap(eigs: Sequence[float]) -> float:
    """Smallest ``|l_a - l_b|`` over pairs of unequal eigenvalues."""
    lam = np.sort(np.asarray(eigs, dtype=float))
    d = np.diff(lam)
    d = d[d > 0]
    if d.size == 0:
        raise ValueError("all eigenvalues are equal; the gap is undefined")
    return float(d.min())


def compute_gaps(eigs: Iterable[float], cluster: Optional[Iterable[int]] = None) -> SpectrumInfo:
    """Gap parameters of a spectrum.

    ``cluster`` lists indices (into ``eigs``) of eigenvalues treated as one
    group around their mean; its gap ``delta_c`` is a third of the smallest
    distance from a non-cluster eigenvalue to any other eigenvalue or to the
    cluster centre.
    """
    lam = np.asarray(list(eigs), dtype=float)
    info = SpectrumInfo(eigenvalues=lam, delta=min_gap(lam) / 3)
    if cluster is None:
        return info
    idx = tuple(sorted(set(int(i) for i in cluster)))
    if len(idx) < 2:
        raise ValueError("a cluster needs at least two eigenvalues")
    center = float(lam[list(idx)].mean())
    xi = lam[list(idx)] - center
    outside = [i for i in range(lam.size) if i not in idx]
    cands = [abs(lam[i] - lam[j]) for i in outside for j in range(lam.size)
             if lam[i] != lam[j]]
    cands += [abs(lam[i] - center) for i in outside]
    if not cands:
        raise ValueError("cluster gap needs an eigenvalue outside the cluster")
    delta_c = min(cands) / 3
    info.cluster, info.center, info.xi, info.delta_c = idx, center, xi, delta_c
    info.well_clustered = bool(delta_c > 16 * np.linalg.norm(xi))
    return info


def classify_region(P_sq: float, info: SpectrumInfo) -> int:
    """Convergence region 1-4 for ``P_k^2``.

    1: before any quadratic regime; 2: quadratic regime of the clustered
    spectrum; 3: the cluster's internal off-diagonals dominate; 4: quadratic
    regime of the fully resolved spectrum. Without a cluster only 1 and 4 occur.
    """
    d4 = info.delta**2 / 8
    if info.delta_c is None:
        return 4 if P_sq <= d4 else 1
    d1 = info.delta_c**2 / 8
    d2 = 2 * info.delta_c * info.xi_norm
    if P_sq > d1:
        return 1
    if P_sq > d2:
        return 2
    if P_sq > d4:
        return 3
    return 4


def quadratic_bound_rhs(P: float, gap: float, eta: float, n_t: int, G_norm: float,
                        mode: str = "distinct") -> float:
    """Quadratic-rate bound on ``P^2`` one sweep later, all order constants set to 1.

    ``P`` is the current off-diagonal norm and ``gap`` is ``delta`` (distinct
    mode) or ``delta_c`` (cluster mode).
    """
    floor = 2 * (n_t * n_t - n_t) * eta**2 * G_norm**2
    if mode == "distinct":
        lead = (P**2 / gap) ** 2
    elif mode == "cluster":
        lead = (P / gap) ** 4
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return lead + eta * P**1.5 / gap + eta**2 * P**0.5 / gap + floor


def write_overlay_csv(path, P_trace: Sequence[float], n_t: int, eta: float, G_norm: float,
                      n_r: Optional[int] = None) -> None:
    """Per-step bound overlay: ``P_k^2`` next to the bounds evaluated at it."""
    lim = limsup_bound(n_t, eta, G_norm)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "P_k_sq", "linear_rhs", "limsup_bound", "prop4", "eq37"])
        for k, P in enumerate(P_trace):
            b = interference_bounds(P, n_t, n_r if n_r is not None else n_t - 1, eta, G_norm)
            w.writerow([k, repr(float(P**2)), repr(float(linear_bound_rhs(P**2, n_t, eta, G_norm))),
                        repr(float(lim)), repr(float(b["prop4"])), repr(float(b["asymptotic"]))])
