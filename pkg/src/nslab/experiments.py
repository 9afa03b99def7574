"""Seeded Monte-Carlo campaigns behind the ``nslab`` commands.

Every campaign is a pure function of an :class:`ExperimentConfig` and a root
seed; trial ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))`` so any
single trial can be replayed on its own.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import bounds
from .cjt import cjt_diagonalize
from .feedback import (
    ContinuousPowerControl,
    FeedbackOracle,
    Ideal,
    IncrementalPowerControl,
    NoisyPower,
    QuantizedSinr,
)
from .linalg import gram, random_channel, reference_evd
from .linesearch import n_bisections
from .obnsla import Observer, extract_precoder, run_bnsla_surrogate, run_obnsla
from .simenv import (
    ChannelModel,
    PrimaryLink,
    ScenarioConfig,
    ScenarioGeometry,
    dbm_to_watt,
    interference_reduction_db,
)

# --------------------------------------------------------------------------
# configuration


@dataclass
class GeometryConfig:
    pu_disk_m: float = 300.0
    su_disk_m: float = 400.0
    min_pu_tx_m: float = 20.0
    min_su_tx_m: float = 100.0
    min_link_m: float = 10.0


@dataclass
class ChannelsConfig:
    n_ts: int = 3
    n_tp: int = 2
    n_rp: int = 1
    n_rs: int = 2
    noise_dbm: float = -121.0
    doppler_pp_hz: float = 15.0
    doppler_ps_hz: float = 1.0
    doppler_sp_hz: float = 15.0
    tc_s: float = 1e-3
    n_sinusoids: int = 16
    rician_k_ps: Optional[float] = None


@dataclass
class FeedbackConfig:
    # ideal | noisy | continuous | quantized | incremental
    mode: str = "continuous"
    bits: int = 4
    # quantizer input range in dB
    sinr_range_db: list = field(default_factory=lambda: [-5.0, 20.0])
    step_db: float = 1.0
    sigma: float = 0.0
    memory: int = 64
    q_noise: float = 0.0
    su_power_dbm: float = 5.0
    target_sinr_db: float = 10.0
    max_power_dbm: float = 23.0


@dataclass
class LearningConfig:
    eta: float = float(np.pi / 2**9)
    sweeps: int = 1
    algorithms: list = field(default_factory=lambda: ["obnsla", "bnsla"])


@dataclass
class SweepConfig:
    trials: int = 200
    doppler_ps_hz: list = field(default_factory=lambda: [0.0, 1.0, 5.0, 10.0, 20.0, 50.0])
    doppler_pp_hz: list = field(default_factory=lambda: [0.0, 15.0, 50.0, 100.0, 150.0])
    bits: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7, 8])
    eta: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    n_t: int = 3
    n_r: int = 2
    convergence_sweeps: int = 20
    workers: int = 1
    inject_violation: bool = False


_SECTIONS = {
    "geometry": GeometryConfig,
    "channels": ChannelsConfig,
    "feedback": FeedbackConfig,
    "learning": LearningConfig,
    "sweep": SweepConfig,
}


@dataclass
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channels: ChannelsConfig = field(default_factory=ChannelsConfig)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    learning: LearningConfig = field(default_factory=LearningConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "ExperimentConfig":
        d = d or {}
        unknown = set(d) - set(_SECTIONS)
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        kw = {}
        for name, klass in _SECTIONS.items():
            sec = d.get(name) or {}
            allowed = {f.name for f in fields(klass)}
            bad = set(sec) - allowed
            if bad:
                raise ValueError(f"unknown keys in [{name}]: {sorted(bad)}")
            kw[name] = klass(**sec)
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def scenario(self, **overrides) -> ScenarioConfig:
        g, c, f = self.geometry, self.channels, self.feedback
        kw = dict(asdict(g), **asdict(c), su_power_dbm=f.su_power_dbm,
                  target_sinr_db=f.target_sinr_db, max_power_dbm=f.max_power_dbm)
        kw.update(overrides)
        return ScenarioConfig(**kw)


def make_mode(fb: FeedbackConfig, **overrides):
    fb = FeedbackConfig(**{**asdict(fb), **overrides})
    if fb.mode == "ideal":
        return Ideal()
    if fb.mode == "noisy":
        return NoisyPower(fb.sigma)
    if fb.mode == "continuous":
        return ContinuousPowerControl()
    if fb.mode == "quantized":
        lo, hi = fb.sinr_range_db
        return QuantizedSinr(int(fb.bits), float(lo), float(hi))
    if fb.mode == "incremental":
        return IncrementalPowerControl(fb.step_db)
    raise ValueError(f"unknown feedback mode {fb.mode!r}")


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# link-level trial


class LinkOutcome(NamedTuple):
    reduction_db: float
    tcs: int


def link_trial(scen: ScenarioConfig, mode, algorithm: str, eta: float, sweeps: int,
               seed, memory: int = 64, q_noise: float = 0.0) -> LinkOutcome:
    """Learn on one random scenario and report the interference reduction.

    The same ``seed`` gives the same node placement and fading phases for
    every algorithm, feedback mode and Doppler value.
    """
    rng = np.random.default_rng(seed)
    geom = ScenarioGeometry.sample(rng, scen)
    channels = ChannelModel(scen, geom, rng)
    link = PrimaryLink.from_scenario(channels, scen, q_noise=q_noise,
                                     rng=np.random.default_rng(rng.integers(2**63)))
    oracle = FeedbackOracle(mode=mode, link=link, memory=memory,
                            p_s=float(dbm_to_watt(scen.su_power_dbm)))
    if algorithm == "obnsla":
        state = run_obnsla(oracle, scen.n_ts, eta, sweeps, stop_on_convergence=False)
    elif algorithm == "bnsla":
        state = run_bnsla_surrogate(oracle, scen.n_ts, eta, sweeps, stop_on_convergence=False)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    T = extract_precoder(state, oracle, scen.n_rp)
    H_end = channels.H_ps(oracle.tc_count())
    return LinkOutcome(interference_reduction_db(H_end, T), oracle.tc_count())


def _link_job(args):
    return link_trial(*args)


def _sweep_rows(cfg: ExperimentConfig, seed: int, cells: list[tuple[dict, dict, dict]]) -> list[dict]:
    """Run every (label, scenario overrides, mode overrides) cell for every algorithm."""
    rows = []
    trials = cfg.sweep.trials
    for label, scen_over, mode_over in cells:
        scen = cfg.scenario(**scen_over)
        mode = make_mode(cfg.feedback, **mode_over)
        for alg in cfg.learning.algorithms:
            jobs = [(scen, mode, alg, cfg.learning.eta, cfg.learning.sweeps,
                     trial_seed(seed, i), cfg.feedback.memory, cfg.feedback.q_noise)
                    for i in range(trials)]
            out = _map(_link_job, jobs, cfg.sweep.workers)
            red = np.array([o.reduction_db for o in out])
            tcs = np.array([o.tcs for o in out])
            rows.append(dict(label, algorithm=alg, trials=trials,
                             reduction_db_mean=float(red.mean()),
                             reduction_db_std=float(red.std()),
                             tcs_mean=float(tcs.mean())))
    return rows


def doppler_sweep(cfg: ExperimentConfig, seed: int, link: str = "ps") -> list[dict]:
    """Interference reduction vs the Doppler spread of ``H_ps`` or ``H_pp``.

    With ``link="ps"`` the PU direct link keeps its configured Doppler (15 Hz
    by default); with ``link="pp"`` the interference channel is held at 1 Hz.
    """
    if link == "ps":
        values = cfg.sweep.doppler_ps_hz
        cells = [({"link": "ps", "doppler_hz": f}, {"doppler_ps_hz": f}, {}) for f in values]
    elif link == "pp":
        values = cfg.sweep.doppler_pp_hz
        cells = [({"link": "pp", "doppler_hz": f}, {"doppler_pp_hz": f, "doppler_ps_hz": 1.0}, {})
                 for f in values]
    else:
        raise ValueError("link must be 'ps' or 'pp'")
    return _sweep_rows(cfg, seed, cells)


def quantization_sweep(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Interference reduction vs SINR quantization bits, plus a continuous reference row."""
    cells = [({"bits": b}, {"doppler_ps_hz": 1.0}, {"mode": "quantized", "bits": b})
             for b in cfg.sweep.bits]
    cells.append(({"bits": "inf"}, {"doppler_ps_hz": 1.0}, {"mode": "continuous"}))
    return _sweep_rows(cfg, seed, cells)


# --------------------------------------------------------------------------
# ideal-feedback convergence campaign


@dataclass
class ConvergenceTrial:
    n_t: int
    eta: float
    G_norm: float
    sweep_P: list
    sweep_interference: list
    P_k: list
    max_interference: list
    tcs: int
    tc_per_rotation: list


def random_gram(rng: np.random.Generator, n_t: int, n_r: int) -> np.ndarray:
    """Gram matrix of a CN(0,1) channel scaled to unit Frobenius norm."""
    G = gram(random_channel(rng, n_r, n_t))
    return G / np.linalg.norm(G)


def convergence_trial(n_t: int, n_r: int, eta: float, sweeps: int, seed) -> ConvergenceTrial:
    rng = np.random.default_rng(seed)
    G = random_gram(rng, n_t, n_r)
    oracle = FeedbackOracle(G=G)
    obs = Observer(G, n_r)
    st = run_obnsla(oracle, n_t, eta, sweeps, observer=obs, stop_on_convergence=False)
    return ConvergenceTrial(n_t, eta, float(np.linalg.norm(G)), st.sweep_P, st.sweep_interference,
                            [r.P for r in st.trace], [r.max_interference for r in st.trace],
                            oracle.tc_count(),
                            list(np.diff([0] + [r.tc_total for r in st.trace])))


def _conv_job(args):
    return convergence_trial(*args)


def convergence_campaign(cfg: ExperimentConfig, seed: int) -> list[dict]:
    """Per-sweep averages of ``P_k^2`` and worst-column interference, with bounds."""
    sw = cfg.sweep
    rows = []
    for eta in sw.eta:
        jobs = [(sw.n_t, sw.n_r, eta, sw.convergence_sweeps, trial_seed(seed, i))
                for i in range(sw.trials)]
        res = _map(_conv_job, jobs, sw.workers)
        P2 = np.array([[p**2 for p in r.sweep_P] for r in res])
        MI = np.array([r.sweep_interference for r in res])
        lim = bounds.limsup_bound(sw.n_t, eta, 1.0)
        eq37 = bounds.interference_bounds(0.0, sw.n_t, sw.n_r, eta, 1.0)["asymptotic"]
        for s in range(P2.shape[1]):
            lin = "" if s == 0 else float(np.mean(
                [bounds.linear_bound_rhs(p, sw.n_t, eta, 1.0) for p in P2[:, s - 1]]))
            rows.append({"sweep": s, "eta": eta, "P_k_sq_mean": float(P2[:, s].mean()),
                         "linear_rhs": lin, "limsup_bound": lim,
                         "max_interference_mean": float(MI[:, s].mean()),
                         "eq37_bound": eq37})
    return rows


def plateau_slope(rows: list[dict]) -> float:
    """Log-log slope of final mean interference vs eta."""
    last = {}
    for r in rows:
        last[r["eta"]] = r["max_interference_mean"]
    etas = np.array(sorted(last))
    vals = np.array([last[e] for e in etas])
    return float(np.polyfit(np.log10(etas), np.log10(vals), 1)[0])


# --------------------------------------------------------------------------
# property bench


def unit_bench(cfg: ExperimentConfig, seed: int) -> dict:
    """Aggregate invariant checks over seeded ideal-feedback trials.

    ``sweep.inject_violation`` shrinks the checked bounds by 1000x, which
    must make the failure counts nonzero.
    """
    sw = cfg.sweep
    shrink = 1e-3 if sw.inject_violation else 1.0
    counts = {k: {"checked": 0, "failed": 0} for k in
              ("linear_bound", "interference_2P2", "interference_sqrt2_P", "limsup", "tc_budget",
               "cjt_reference")}

    def tally(name, ok):
        counts[name]["checked"] += 1
        counts[name]["failed"] += int(not ok)

    etas = [1e-2, 1e-3, 1e-4]
    for i in range(sw.trials):
        n_t = 2 + i % 3
        eta = etas[(i // 3) % 3]
        t = convergence_trial(n_t, n_t - 1, eta, sw.convergence_sweeps, trial_seed(seed, i))
        for a, b in zip(t.sweep_P[:-1], t.sweep_P[1:]):
            tally("linear_bound", b**2 <= shrink * bounds.linear_bound_rhs(a**2, n_t, eta, t.G_norm))
        for P, mi in zip(t.P_k, t.max_interference):
            tally("interference_2P2", mi <= shrink * 2 * P**2)
            tally("interference_sqrt2_P", mi <= shrink * bounds.interference_bound_hw(P))
        tail = max(p**2 for p in t.sweep_P[10:])
        tally("limsup", tail <= shrink * bounds.limsup_bound(n_t, eta, t.G_norm))
        budget = 2 * (5 + n_bisections(np.pi / 2, eta))
        tally("tc_budget", max(t.tc_per_rotation) <= shrink * budget)
        rng = np.random.default_rng(trial_seed(seed, 10_000 + i))
        G = gram(random_channel(rng, n_t + 2, n_t + 2))
        res = cjt_diagonalize(G)
        ref = reference_evd(G)[0]
        err = np.max(np.abs(np.sort(res.diag)[::-1] - ref))
        tally("cjt_reference", err <= shrink * 1e-9 * max(1.0, np.linalg.norm(G)))
    return {"seed": seed, "trials": sw.trials, "checks": counts,
            "total_failed": sum(c["failed"] for c in counts.values())}
