"""One-bit feedback oracle: the SU's only view of the interference channel.

The oracle hides either a channel ``H`` (or its Gram matrix ``G``) or a full
:class:`~nslab.simenv.PrimaryLink`. Each :meth:`FeedbackOracle.transmit`
occupies one transmission cycle (TC) and yields a scalar ``q``; the learner
only ever consumes the sign of ``q`` differences through :meth:`compare`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .linalg import gram
from .simenv import PrimaryLink

DEFAULT_MEMORY = 64
POWER_ATOL = 1e-9


@dataclass(frozen=True)
class Ideal:
    """``q = ||H x||^2``."""


@dataclass(frozen=True)
class NoisyPower:
    """``q = ||H x||^2 + sigma * p_s * ||G||_F * N(0, 1)``."""

    sigma: float = 0.0


@dataclass(frozen=True)
class ContinuousPowerControl:
    """``q`` tracks the PU transmit power after one exact SINR-target correction."""


@dataclass(frozen=True)
class QuantizedSinr:
    """Power control driven by a ``bits``-bit quantized SINR report over ``[lo_db, hi_db]``."""

    bits: int = 4
    lo_db: float = -5.0
    hi_db: float = 20.0


@dataclass(frozen=True)
class IncrementalPowerControl:
    """PU issues +/- ``step_db`` power commands; the command itself is the one bit."""

    step_db: float = 1.0


FeedbackMode = Union[Ideal, NoisyPower, ContinuousPowerControl, QuantizedSinr, IncrementalPowerControl]


class TCBudgetExceeded(RuntimeError):
    """Raised when a transmit would exceed the oracle's TC budget."""


class ModeError(RuntimeError):
    """The requested operation is not supported by the feedback mode."""


def _key(x: np.ndarray) -> bytes:
    # adding zero folds -0.0 into 0.0 so equal probes share a key
    return (x + 0.0).tobytes()


def mode_name(mode: FeedbackMode) -> str:
    return type(mode).__name__


class FeedbackOracle:
    """Simulated PU side with a bounded observation memory.

    Parameters
    ----------
    H : array, optional
        Static interference channel ``n_r x n_t``. Alternatively pass ``G``
        (hidden Gram matrix; Hermitian, possibly indefinite for tests), or a
        callable ``n -> H`` for a time-varying channel.
    mode : FeedbackMode
        How ``q`` is produced. Power-control modes use ``link`` (built from
        ``H`` with unit gains when omitted).
    memory : int
        Observation depth ``M``: a stored probe is usable while it was sent in
        the current TC or one of the ``M`` preceding ones.
    p_s : float
        Probe power; :meth:`compare` and :meth:`measure` take unit-norm
        directions and scale them by ``sqrt(p_s)``.
    budget : int, optional
        Maximum number of TCs; exceeding it raises :class:`TCBudgetExceeded`.
    record : bool
        Keep a probe log for :meth:`to_csv`.
    """

    def __init__(self, H=None, *, G=None, mode: FeedbackMode = Ideal(), memory: int = DEFAULT_MEMORY,
                 p_s: float = 1.0, link: Optional[PrimaryLink] = None, seed=None,
                 budget: Optional[int] = None, record: bool = False):
        if memory < 1:
            raise ValueError("memory depth M must be >= 1")
        if p_s <= 0:
            raise ValueError("probe power must be positive")
        self.mode = mode
        self.memory = int(memory)
        self.p_s = float(p_s)
        self.budget = budget
        self.rng = np.random.default_rng(seed)
        self._channel_fn: Optional[Callable[[int], np.ndarray]] = None
        self._G: Optional[np.ndarray] = None
        if callable(H):
            self._channel_fn = H
        elif H is not None:
            self._G = gram(H)
            H_static = np.atleast_2d(np.asarray(H, dtype=complex))
        if G is not None:
            self._G = np.asarray(G, dtype=complex)
        power_mode = isinstance(mode, (ContinuousPowerControl, QuantizedSinr, IncrementalPowerControl))
        if power_mode and link is None:
            if H is None or callable(H):
                raise ValueError("power-control modes need a static H or an explicit link")
            link = PrimaryLink.static(H_static)
        self.link = link
        if self._G is None and self._channel_fn is None and link is None:
            raise ValueError("oracle needs H, G or a link")
        self.n = 0
        self._history: dict[bytes, tuple[int, float]] = {}
        self._last_keys: list[bytes] = []
        self._log: Optional[list] = [] if record else None

    # -- hidden quantities (observer only) ---------------------------------

    def hidden_gram(self, n: Optional[int] = None) -> np.ndarray:
        """Gram matrix of the interference channel at TC ``n`` (default: latest)."""
        n = self.n if n is None else n
        if self._G is not None:
            return self._G
        if self._channel_fn is not None:
            return gram(self._channel_fn(n))
        return gram(self.link.channels.H_ps(n))

    def _interference(self, n: int, x: np.ndarray) -> float:
        if self._G is not None:
            return float(np.vdot(x, self._G @ x).real)
        if self._channel_fn is not None:
            return float(np.linalg.norm(self._channel_fn(n) @ x) ** 2)
        return self.link.interference(n, x)

    # -- TC level ---------------------------------------------------------

    @property
    def continuous(self) -> bool:
        """Whether ``q`` is a magnitude (not just a one-bit command)."""
        return not isinstance(self.mode, IncrementalPowerControl)

    def tc_count(self) -> int:
        return self.n

    def transmit(self, x) -> float:
        """Send power-scaled probe ``x`` for one TC and return the feedback ``q``."""
        x = np.asarray(x, dtype=complex)
        norm = np.linalg.norm(x)
        if norm == 0:
            raise ValueError("zero probe vector")
        if abs(norm - np.sqrt(self.p_s)) > POWER_ATOL * max(1.0, np.sqrt(self.p_s)):
            raise ValueError(f"probe norm {norm!r} does not match sqrt(p_s)={np.sqrt(self.p_s)!r}")
        if self.budget is not None and self.n >= self.budget:
            raise TCBudgetExceeded(f"TC budget of {self.budget} exhausted")
        self.n += 1
        n = self.n
        mode = self.mode
        if isinstance(mode, Ideal):
            q = self._interference(n, x)
        elif isinstance(mode, NoisyPower):
            q = self._interference(n, x)
            if mode.sigma:
                scale = np.linalg.norm(self.hidden_gram(n)) * self.p_s
                q += mode.sigma * scale * self.rng.standard_normal()
        elif isinstance(mode, ContinuousPowerControl):
            q = self.link.respond(n, x, "continuous")
        elif isinstance(mode, QuantizedSinr):
            q = self.link.respond(n, x, "quantized", bits=mode.bits,
                                  sinr_range_db=(mode.lo_db, mode.hi_db))
        elif isinstance(mode, IncrementalPowerControl):
            self.link.respond(n, x, "incremental", step_db=mode.step_db)
            q = float(self.link.last_command)
        else:
            raise ModeError(f"unsupported mode {mode!r}")
        key = _key(x)
        self._history[key] = (n, q)
        self._last_keys = (self._last_keys + [key])[-2:]
        if len(self._history) > 4 * (self.memory + 1):
            self._history = {k: v for k, v in self._history.items() if self._fresh(v[0])}
        if self._log is not None:
            self._log.append((n, q, x.copy()))
        return q

    def _fresh(self, n_entry: int) -> bool:
        return self.n - n_entry <= self.memory

    def _lookup(self, x: np.ndarray) -> Optional[float]:
        entry = self._history.get(_key(x))
        if entry is None or not self._fresh(entry[0]):
            return None
        return entry[1]

    def _scaled(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return u * np.sqrt(self.p_s)

    # -- learner level ----------------------------------------------------

    def in_history(self, u) -> bool:
        return self._lookup(self._scaled(u)) is not None

    def measure(self, u) -> float:
        """Continuous ``q`` for direction ``u``, re-using a fresh stored value."""
        if not self.continuous:
            raise ModeError("measure needs a mode with continuous feedback")
        x = self._scaled(u)
        q = self._lookup(x)
        return self.transmit(x) if q is None else q

    def compare(self, u_a, u_b, fresh: bool = False) -> tuple[int, int]:
        """One-bit comparison of directions ``u_a`` and ``u_b``.

        Returns ``(h, cost)`` with ``h = +1`` when the interference of ``u_a``
        is at least that of ``u_b`` and ``-1`` otherwise; ``cost`` is the
        number of TCs spent. ``fresh=True`` ignores stored probes and sends
        both again (used for majority voting under noisy feedback).
        """
        xa, xb = self._scaled(u_a), self._scaled(u_b)
        start = self.n
        if fresh:
            self.transmit(xb)
            self.transmit(xa)
        if not self.continuous:
            return self._compare_incremental(xa, xb), self.n - start
        while True:
            qa, qb = self._lookup(xa), self._lookup(xb)
            if qa is not None and qb is not None:
                break
            # send the missing (or oldest) probe; loop re-checks for eviction
            if qa is None:
                self.transmit(xa)
            else:
                self.transmit(xb)
        return (1 if qa >= qb else -1), self.n - start

    def _compare_incremental(self, xa, xb) -> int:
        # The command at TC n reflects a change relative to TC n-1, so u_b
        # must occupy the TC right before u_a.
        ka, kb = _key(xa), _key(xb)
        if ka == kb:
            if self._lookup(xa) is None:
                self.transmit(xa)
            return 1
        if self._last_keys == [kb, ka]:
            return 1 if self._history[ka][1] > 0 else -1
        if not self._last_keys or self._last_keys[-1] != kb:
            self.transmit(xb)
        q = self.transmit(xa)
        return 1 if q > 0 else -1

    # -- export -----------------------------------------------------------

    def to_csv(self, path) -> None:
        if self._log is None:
            raise ModeError("oracle was created without record=True")
        n_t = self._log[0][2].size if self._log else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            cols = [f"{p}_{j + 1}" for j in range(n_t) for p in ("re", "im")]
            w.writerow(["n", "q", "mode"] + cols)
            name = mode_name(self.mode)
            for n, q, x in self._log:
                vals = [v for z in x for v in (repr(float(z.real)), repr(float(z.imag)))]
                w.writerow([n, repr(float(q)), name] + vals)
