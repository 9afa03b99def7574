"""Link-level environment: geometry, path loss, Doppler fading and PU power control.

Powers are linear Watts unless a name ends in ``_db``/``_dbm``. One time
step is one transmission cycle (TC).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

SINR_RANGE_DB = (-5.0, 20.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(w):
    return 10.0 * np.log10(np.asarray(w, dtype=float)) + 30.0


def path_loss_db(R):
    """``128.1 + 37.6 log10(R)``.

    The constants are the 3GPP macro-cell values, which expect ``R`` in km;
    :class:`ChannelModel` converts metre distances before calling this.
    """
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ValueError("distance must be positive")
    out = 128.1 + 37.6 * np.log10(R)
    return float(out) if out.ndim == 0 else out


@dataclass
class ScenarioConfig:
    """Defaults follow the Doppler/quantization experiment setup."""

    n_ts: int = 3
    n_tp: int = 2
    n_rp: int = 1
    n_rs: int = 2
    noise_dbm: float = -121.0
    su_power_dbm: float = 5.0
    max_power_dbm: float = 23.0
    target_sinr_db: float = 10.0
    pu_disk_m: float = 300.0
    su_disk_m: float = 400.0
    min_pu_tx_m: float = 20.0
    min_su_tx_m: float = 100.0
    min_link_m: float = 10.0
    doppler_pp_hz: float = 15.0
    doppler_ps_hz: float = 1.0
    doppler_sp_hz: float = 15.0
    tc_s: float = 1e-3
    n_sinusoids: int = 16
    rician_k_ps: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# fading


class FadingProcess:
    """Sum-of-sinusoids Rayleigh (optionally Rician) fading, one process per entry.

    Each entry is ``sqrt(1/M) * sum_n [cos(w t cos a_n + p_n) + j cos(w t sin a_n + q_n)]``
    with ``a_n = (2 pi n - pi + theta) / (4 M)`` and independent uniform
    phases. Its autocorrelation tends to ``J0(2 pi f_d tau)`` and the
    marginal is CN(0, 1).
    """

    def __init__(self, shape, doppler_hz: float, tc_s: float, rng: np.random.Generator,
                 n_sinusoids: int = 16, rician_k: Optional[float] = None):
        if n_sinusoids < 1:
            raise ValueError("need at least one sinusoid")
        self.shape = tuple(shape)
        self.doppler_hz = float(doppler_hz)
        self.tc_s = float(tc_s)
        M = n_sinusoids
        u = lambda *s: rng.uniform(-np.pi, np.pi, size=s)
        theta = u(*self.shape, 1)
        n = np.arange(1, M + 1)
        alpha = (2 * np.pi * n - np.pi + theta) / (4 * M)
        self._cos_a = np.cos(alpha)
        self._sin_a = np.sin(alpha)
        self._phi_c = u(*self.shape, M)
        self._phi_s = u(*self.shape, M)
        self._scale = np.sqrt(1.0 / M)
        self.rician_k = rician_k
        if rician_k is not None:
            self._los_angle = u(*self.shape)
            self._los_phase = u(*self.shape)

    def at(self, n) -> np.ndarray:
        """Channel matrix at TC index ``n``."""
        wt = 2 * np.pi * self.doppler_hz * n * self.tc_s
        zc = np.cos(wt * self._cos_a + self._phi_c).sum(-1)
        zs = np.cos(wt * self._sin_a + self._phi_s).sum(-1)
        h = self._scale * (zc + 1j * zs)
        if self.rician_k is None:
            return h
        K = self.rician_k
        los = np.exp(1j * (wt * np.cos(self._los_angle) + self._los_phase))
        return np.sqrt(K / (K + 1)) * los + np.sqrt(1 / (K + 1)) * h

    def series(self, n_tcs: int) -> np.ndarray:
        return np.stack([self.at(n) for n in range(n_tcs)])


def generate_fading(seed, f_d: float, tc_duration: float, n_tcs: int, dims,
                    n_sinusoids: int = 16) -> np.ndarray:
    """Matrix time series of shape ``(n_tcs, *dims)``; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    return FadingProcess(dims, f_d, tc_duration, rng, n_sinusoids).series(n_tcs)


# --------------------------------------------------------------------------
# geometry and channels


def _uniform_annulus(rng, r_min, r_max):
    r = np.sqrt(rng.uniform(r_min**2, r_max**2))
    a = rng.uniform(0, 2 * np.pi)
    return np.array([r * np.cos(a), r * np.sin(a)])


@dataclass
class ScenarioGeometry:
    """Node positions in metres; the PU receiver sits at the origin."""

    pu_tx: np.ndarray
    su_tx: np.ndarray
    su_rx: np.ndarray

    @classmethod
    def sample(cls, rng: np.random.Generator, cfg: ScenarioConfig) -> "ScenarioGeometry":
        return cls(
            pu_tx=_uniform_annulus(rng, cfg.min_pu_tx_m, cfg.pu_disk_m),
            su_tx=_uniform_annulus(rng, cfg.min_su_tx_m, cfg.su_disk_m),
            su_rx=_uniform_annulus(rng, 0.0, cfg.su_disk_m),
        )

    def distances(self, min_link_m: float = 1.0) -> dict:
        d = {
            "pp": np.linalg.norm(self.pu_tx),
            "ps": np.linalg.norm(self.su_tx),
            "sp": np.linalg.norm(self.su_rx - self.pu_tx),
        }
        return {k: max(float(v), min_link_m) for k, v in d.items()}


class ChannelModel:
    """Path-loss-scaled fading for the PU direct link, SU->PU and PU->SU links.

    ``pp``: PU-Tx to PU-Rx (n_rp x n_tp), ``ps``: SU-Tx to PU-Rx
    (n_rp x n_ts), ``sp``: PU-Tx to SU-Rx (n_rs x n_tp).
    """

    def __init__(self, cfg: ScenarioConfig, geometry: ScenarioGeometry, rng: np.random.Generator):
        self.cfg = cfg
        self.geometry = geometry
        dist = geometry.distances(cfg.min_link_m)
        self.path_loss_db = {k: path_loss_db(v / 1000.0) for k, v in dist.items()}
        self._amp = {k: 10 ** (-pl / 20) for k, pl in self.path_loss_db.items()}
        mk = lambda shape, fd, K=None: FadingProcess(shape, fd, cfg.tc_s, rng, cfg.n_sinusoids, K)
        self._fading = {
            "pp": mk((cfg.n_rp, cfg.n_tp), cfg.doppler_pp_hz),
            "ps": mk((cfg.n_rp, cfg.n_ts), cfg.doppler_ps_hz, cfg.rician_k_ps),
            "sp": mk((cfg.n_rs, cfg.n_tp), cfg.doppler_sp_hz),
        }
        self.noise_w = float(dbm_to_watt(cfg.noise_dbm))

    def H(self, link: str, n: int) -> np.ndarray:
        return self._amp[link] * self._fading[link].at(n)

    def H_pp(self, n):
        return self.H("pp", n)

    def H_ps(self, n):
        return self.H("ps", n)

    def H_sp(self, n):
        return self.H("sp", n)


# --------------------------------------------------------------------------
# PU power control


def pu_sinr(H_pp: np.ndarray, H_ps: np.ndarray, pu_power: float, su_x: np.ndarray,
            noise_w: float) -> float:
    """PU SINR in dB with dominant-eigenmode beamforming; SU signal is noise."""
    g = np.linalg.norm(H_pp, 2) ** 2
    interference = float(np.linalg.norm(H_ps @ su_x) ** 2)
    return float(10 * np.log10(pu_power * g / (interference + noise_w)))


def pu_power_step(current_power: float, measured_sinr_db: float, target_db: float = 10.0,
                  max_power: float = float(dbm_to_watt(23.0))) -> float:
    """Multiplicative correction toward the target SINR, clamped to ``max_power``."""
    p = current_power * 10 ** ((target_db - measured_sinr_db) / 10)
    return float(min(p, max_power))


def quantize_sinr(sinr_db, bits: int, lo: float = SINR_RANGE_DB[0], hi: float = SINR_RANGE_DB[1]):
    """Uniform mid-rise quantizer with ``2**bits`` levels over ``[lo, hi]`` dB, saturating."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    levels = 2**bits
    step = (hi - lo) / levels
    idx = np.clip(np.floor((np.asarray(sinr_db, dtype=float) - lo) / step), 0, levels - 1)
    out = lo + (idx + 0.5) * step
    return float(out) if out.ndim == 0 else out


class _StaticLinks:
    """Time-invariant stand-in for :class:`ChannelModel`."""

    def __init__(self, H_pp, H_ps, H_sp, noise_w):
        self._H = {"pp": np.atleast_2d(H_pp), "ps": np.atleast_2d(H_ps), "sp": np.atleast_2d(H_sp)}
        self.noise_w = noise_w

    def H_pp(self, n):
        return self._H["pp"]

    def H_ps(self, n):
        return self._H["ps"]

    def H_sp(self, n):
        return self._H["sp"]


class PrimaryLink:
    """PU power-control loop reacting to SU probes, one update per TC.

    ``respond`` applies the control law for TC ``n`` and returns the energy the
    SU receiver measures from the PU, which grows with the PU transmit power.
    """

    def __init__(self, channels, target_sinr_db: float = 10.0, max_power: float = np.inf,
                 n_rs: Optional[int] = None, q_noise: float = 0.0,
                 rng: Optional[np.random.Generator] = None):
        self.channels = channels
        self.target_sinr_db = target_sinr_db
        self.max_power = max_power
        self.noise_w = channels.noise_w
        self.n_rs = n_rs if n_rs is not None else channels.H_sp(0).shape[0]
        self.q_noise = q_noise
        self.rng = rng if rng is not None else np.random.default_rng(0)
        g0 = np.linalg.norm(channels.H_pp(0), 2) ** 2
        target = 10 ** (target_sinr_db / 10)
        self.power = float(min(target * self.noise_w / g0, max_power))
        self.last_command = 0

    @classmethod
    def static(cls, H_ps, g_pp: float = 1.0, g_sp: float = 1.0, noise_w: float = 1.0,
               **kw) -> "PrimaryLink":
        """Fixed channels: scalar PU direct/sensing gains and the given interference channel."""
        H_ps = np.atleast_2d(np.asarray(H_ps, dtype=complex))
        return cls(_StaticLinks([[np.sqrt(g_pp)]], H_ps, [[np.sqrt(g_sp)]], noise_w), **kw)

    @classmethod
    def from_scenario(cls, channels: ChannelModel, cfg: ScenarioConfig, **kw) -> "PrimaryLink":
        return cls(channels, cfg.target_sinr_db, float(dbm_to_watt(cfg.max_power_dbm)),
                   cfg.n_rs, **kw)

    def interference(self, n: int, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.channels.H_ps(n) @ x) ** 2)

    def respond(self, n: int, x: np.ndarray, law: str = "continuous", bits: Optional[int] = None,
                step_db: float = 1.0, sinr_range_db: tuple = SINR_RANGE_DB) -> float:
        H_pp = self.channels.H_pp(n)
        sinr_db = pu_sinr(H_pp, self.channels.H_ps(n), self.power, x, self.noise_w)
        if law == "continuous":
            p = pu_power_step(self.power, sinr_db, self.target_sinr_db, self.max_power)
        elif law == "quantized":
            p = pu_power_step(self.power, quantize_sinr(sinr_db, bits, *sinr_range_db), self.target_sinr_db,
                              self.max_power)
        elif law == "incremental":
            self.last_command = 1 if sinr_db < self.target_sinr_db else -1
            p = min(self.power * 10 ** (self.last_command * step_db / 10), self.max_power)
        else:
            raise ValueError(f"unknown control law {law!r}")
        self.power = float(p)
        # PU beam: dominant right singular vector of its own direct channel
        _, _, Vh = np.linalg.svd(H_pp)
        f = Vh[0].conj()
        q = self.power * np.linalg.norm(self.channels.H_sp(n) @ f) ** 2 + self.n_rs * self.noise_w
        if self.q_noise:
            q *= 1 + self.q_noise * self.rng.standard_normal()
        return float(q)


def interference_reduction_db(H_ps: np.ndarray, T: np.ndarray) -> float:
    """Isotropic-transmission interference over precoded-transmission interference, in dB."""
    n_t = H_ps.shape[1]
    before = np.linalg.norm(H_ps) ** 2 / n_t
    after = np.linalg.norm(H_ps @ T) ** 2 / T.shape[1]
    return float(10 * np.log10(before / max(after, 1e-300)))
