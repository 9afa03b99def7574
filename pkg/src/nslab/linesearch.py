"""One-bit line searches over sinusoidal objectives.

The objective along a search line is ``w(z) = B - A cos(pi (z - z0) / L)``,
periodic in ``2L``. The learner cannot evaluate ``w``; it only has a
comparator ``u(z1, z2)`` returning 1 when ``w(z1) >= w(z2)`` and 0 otherwise.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Optional

import numpy as np

from .cjt import wrap_angle

Comparator = Callable[[float, float], int]

PHI_HALF_PERIOD = np.pi
THETA_HALF_PERIOD = np.pi / 2


def determine_smi(u: Comparator, L: float) -> tuple[float, float]:
    """Length-``L/2`` interval holding a minimizer, from probes at ``-L, -L/2, 0``.

    The returned interval may reach past ``L`` (e.g. ``[3L/4, 5L/4]``); callers
    search it in unwrapped coordinates.
    """
    a = u(-L, -L / 2)
    b = u(0.0, -L / 2)
    z_max = (3 + 2 * b - 2 * a * (1 + 2 * b)) * L / 4
    return z_max - L / 2, z_max


def n_bisections(length: float, eta: float) -> int:
    """Iterations needed to shrink ``length`` below ``eta`` by halving."""
    return int(np.floor(np.log2(length / eta))) + 1


def one_bit_binary_search(u: Comparator, interval: tuple[float, float], eta: float,
                          history: Optional[list] = None) -> float:
    """Halve ``interval`` on endpoint comparisons until it is shorter than ``eta``.

    Each step compares the two endpoints and moves the worse one to the
    midpoint. Returns the midpoint of the final interval. When ``history`` is
    a list, every intermediate ``(z_min, z_max)`` is appended to it.
    """
    z_min, z_max = float(interval[0]), float(interval[1])
    if not z_max > z_min:
        raise ValueError(f"empty or inverted interval {interval}")
    if not eta > 0:
        raise ValueError("eta must be positive")
    while abs(z_max - z_min) >= eta:
        z = 0.5 * (z_max + z_min)
        if u(z_max, z_min) == 1:
            z_max = z
        else:
            z_min = z
        if history is not None:
            history.append((z_min, z_max))
    return 0.5 * (z_max + z_min)


def determine_smi_magnitude(w: Callable[[float], float], L: float) -> tuple[float, float]:
    """Length-``L/4`` interval from continuous samples of ``w``.

    Samples ``w`` at ``0, L/2, -L/2`` (and at ``-L`` unless ``w(0)`` is already
    the smallest). The smallest sample lies within ``L/4`` of the minimizer and
    the smaller of its two neighbours tells which side.
    """
    # keys are sample positions in units of L/2, taken mod 4
    samples = {0: w(0.0), 1: w(L / 2), -1: w(-L / 2)}
    if samples[0] > min(samples[1], samples[-1]):
        samples[-2] = w(-L)
    c = min(samples, key=samples.get)
    wrap = lambda k: (k + 2) % 4 - 2
    right, left = samples[wrap(c + 1)], samples[wrap(c - 1)]
    zc = c * L / 2
    if abs(samples[c] - right) <= abs(samples[c] - left):
        return zc, zc + L / 4
    return zc - L / 4, zc


# --------------------------------------------------------------------------
# learner-side searches


def probe_direction(W: np.ndarray, l: int, m: int, theta: float, phi: float) -> np.ndarray:
    """``W r_{l,m}(theta, phi)``: the unit probe direction for one search point."""
    return W[:, l] * np.cos(theta) + W[:, m] * (np.exp(-1j * phi) * np.sin(theta))


def oracle_comparator(oracle, probe: Callable[[float], np.ndarray], half_period: float,
                      repeats: int = 1) -> Comparator:
    """Turn ``oracle.compare`` into a ``{1, 0}`` comparator over search coordinates.

    Search points are wrapped into ``[-half_period, half_period)`` before
    probing so equivalent points share one stored probe. With ``repeats > 1``
    the answer is a majority vote over fresh re-probes.
    """

    def u(z1: float, z2: float) -> int:
        xa = probe(wrap_angle(z1, half_period))
        xb = probe(wrap_angle(z2, half_period))
        h, _ = oracle.compare(xa, xb)
        votes = h
        for _ in range(repeats - 1):
            votes += oracle.compare(xa, xb, fresh=True)[0]
        return 1 if votes >= 0 else 0

    return u


def fold_theta(theta_raw: float) -> float:
    """Map the line-search minimizer into ``[-pi/4, pi/4]`` (shift by ``pi/2``)."""
    if abs(theta_raw) <= np.pi / 4:
        return float(theta_raw)
    return float(theta_raw - np.sign(theta_raw) * np.pi / 2)


class ThetaResult(NamedTuple):
    theta_raw: float
    theta: float
    # +1 if a_ll >= a_mm of the current A, -1 otherwise; None when not requested
    diag_order: Optional[int]
    diag_cost: int


def find_phi(oracle, W: np.ndarray, l: int, m: int, eta: float, repeats: int = 1,
             smi: str = "one-bit") -> float:
    """Blind estimate of the rotation phase for pair ``(l, m)``.

    Minimizes the interference of ``W r_{l,m}(pi/4, phi)`` over ``phi``.
    ``smi="magnitude"`` uses continuous feedback samples to pick a shorter
    starting interval.
    """
    L = PHI_HALF_PERIOD
    probe = lambda z: probe_direction(W, l, m, np.pi / 4, z)
    u = oracle_comparator(oracle, probe, L, repeats)
    interval = _smi(oracle, probe, u, L, smi)
    return wrap_angle(one_bit_binary_search(u, interval, eta), L)


def find_theta(oracle, W: np.ndarray, l: int, m: int, phi: float, eta: float,
               compare_diagonal: bool = False, repeats: int = 1,
               smi: str = "one-bit") -> ThetaResult:
    """Blind estimate of the rotation angle for pair ``(l, m)`` given ``phi``.

    With ``compare_diagonal`` the probes at ``theta = 0`` (``W e_l``) and
    ``theta = -pi/2`` (``W e_m`` up to phase) are compared right after the
    interval step, which costs nothing while both are in oracle memory.
    """
    L = THETA_HALF_PERIOD
    probe = lambda z: probe_direction(W, l, m, z, phi)
    u = oracle_comparator(oracle, probe, L, repeats)
    interval = _smi(oracle, probe, u, L, smi)
    diag_order, diag_cost = None, 0
    if compare_diagonal:
        diag_order, diag_cost = oracle.compare(probe(0.0), probe(wrap_angle(-L, L)))
    theta_raw = wrap_angle(one_bit_binary_search(u, interval, eta), L)
    return ThetaResult(theta_raw, fold_theta(theta_raw), diag_order, diag_cost)


def _smi(oracle, probe, u, L, smi):
    if smi == "one-bit":
        return determine_smi(u, L)
    if smi == "magnitude":
        return determine_smi_magnitude(lambda z: oracle.measure(probe(wrap_angle(z, L))), L)
    raise ValueError(f"unknown SMI method {smi!r}")
