"""Exact (Gillespie) simulation of the copolymerization chain.

Random numbers come from ``numpy.random.Generator(PCG64(seed))``. Each jump
consumes two consecutive doubles ``u1, u2`` in ``[0, 1)``: the holding time
is ``-log(1 - u1) / q(x)`` and the event is the first slot whose cumulative
weight strictly exceeds ``u2 * q(x)``, with slots ordered ``Attach(M1) ..
Attach(Md), Detach``. Replica ``i`` of a run seeded with ``s`` uses seed
``s + i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .exceptions import CopolyError, OutOfRange
from .model import DETACH, Polymer, RateSet, decode_event

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings. Exactly one of ``t_max`` / ``max_jumps`` is set."""

    rates: RateSet
    seed: int = 0
    t_max: Optional[float] = None
    max_jumps: Optional[int] = None
    record_stride: int = 1024

    def __post_init__(self):
        if (self.t_max is None) == (self.max_jumps is None):
            raise CopolyError("exactly one of t_max and max_jumps must be given")
        if self.t_max is not None and not (np.isfinite(self.t_max) and self.t_max >= 0):
            raise CopolyError(f"t_max must be a finite non-negative time, got {self.t_max!r}")
        if self.max_jumps is not None and int(self.max_jumps) < 0:
            raise CopolyError(f"max_jumps must be non-negative, got {self.max_jumps!r}")
        if int(self.record_stride) < 1:
            raise CopolyError("record_stride must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise CopolyError("seed must be an unsigned 64-bit integer")

    def replica(self, index: int) -> "SimConfig":
        return SimConfig(self.rates, (int(self.seed) + index) % 2**64, self.t_max,
                         self.max_jumps, self.record_stride)


@dataclass(eq=False)
class Trajectory:
    """Event log of one realisation started from the root.

    ``codes[n-1]`` is the event at jump time ``jump_times[n-1]``; attach codes
    are 0-based monomer ids and :data:`~copoly.model.DETACH` marks a
    detachment. ``t_end`` is the observation horizon (``t_max`` for time
    bounded runs, the last jump time otherwise).
    """

    rates: RateSet
    jump_times: np.ndarray
    codes: np.ndarray
    t_end: float
    final_state: Polymer
    attaches: np.ndarray
    detaches: np.ndarray
    record_stride: int = 1024
    seed: Optional[int] = None
    snapshot_lengths: np.ndarray = field(default=None, repr=False)
    snapshot_counts: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_codes(cls, rates: RateSet, jump_times: Sequence[float], codes: Sequence[int],
                   t_end: Optional[float] = None, record_stride: int = 1024,
                   seed: Optional[int] = None) -> "Trajectory":
        """Build a trajectory from a raw event log, validating it."""
        times = np.asarray(jump_times, dtype=float)
        codes = np.asarray(codes, dtype=np.int16)
        if times.shape != codes.shape or times.ndim != 1:
            raise CopolyError("jump_times and codes must be 1-d and equally long")
        if times.size and (times[0] <= 0 or np.any(np.diff(times) <= 0)):
            raise CopolyError("jump times must be positive and strictly increasing")
        if np.any((codes < DETACH) | (codes >= rates.d)):
            raise CopolyError("event code outside the monomer range")
        steps = np.where(codes == DETACH, -1, 1).astype(np.int64)
        lengths = np.concatenate(([0], np.cumsum(steps)))
        if lengths.min() < 0:
            raise CopolyError("detachment recorded at the root")
        if t_end is None:
            t_end = float(times[-1]) if times.size else 0.0
        elif times.size and t_end < times[-1]:
            raise CopolyError("t_end precedes the last jump")
        tips = _kernels.replay_tips(codes, rates.d)
        detached = tips[:-1][codes == DETACH]
        attaches = np.bincount(codes[codes >= 0].astype(np.int64), minlength=rates.d)
        detaches = np.bincount(detached.astype(np.int64), minlength=rates.d)
        final = Polymer(_kernels.replay_stack(codes, codes.shape[0]).tolist())
        traj = cls(rates, times, codes, float(t_end), final, attaches.astype(np.int64),
                   detaches.astype(np.int64), int(record_stride), seed)
        traj.__dict__["lengths"] = lengths
        traj.__dict__["tips"] = tips
        traj._build_snapshots()
        return traj

    def _build_snapshots(self) -> None:
        idx = np.arange(0, self.n_jumps + 1, self.record_stride, dtype=np.int64)
        self.snapshot_lengths = self.lengths[idx]
        self.snapshot_counts = _kernels.replay_counts_at(self.codes, self.rates.d, idx)

    @property
    def n_jumps(self) -> int:
        return int(self.codes.shape[0])

    @property
    def d(self) -> int:
        return self.rates.d

    @cached_property
    def lengths(self) -> np.ndarray:
        """``|Z_n|`` for ``n = 0 .. N`` (post-event lengths, with ``|Z_0| = 0``)."""
        steps = np.where(self.codes == DETACH, -1, 1).astype(np.int64)
        return np.concatenate(([0], np.cumsum(steps)))

    @cached_property
    def tips(self) -> np.ndarray:
        """Tip id of ``Z_n`` for ``n = 0 .. N``, ``-1`` at the root."""
        return _kernels.replay_tips(self.codes, self.rates.d)

    @cached_property
    def holding_times(self) -> np.ndarray:
        """Time spent in ``Z_n``; the last entry is censored at ``t_end``."""
        edges = np.concatenate(([0.0], self.jump_times, [self.t_end]))
        return np.diff(edges)

    def events(self):
        return [decode_event(int(c)) for c in self.codes]

    def n_applied(self, t) -> np.ndarray:
        """Number of events with jump time ``<= t`` (right-continuous)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.t_end):
            raise OutOfRange(f"sample time outside [0, {self.t_end!r}]")
        return np.searchsorted(self.jump_times, t, side="right")

    def counts_at(self, t) -> np.ndarray:
        """Monomer counts of ``X(t)`` for each entry of the array ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self.n_applied(t).astype(np.int64)
        order = np.argsort(idx, kind="stable")
        out = np.empty((t.shape[0], self.d), dtype=np.int64)
        out[order] = _kernels.replay_counts_at(self.codes, self.d, idx[order])
        return out


def simulate(cfg: SimConfig) -> Trajectory:
    """Run one realisation from the root until the configured bound."""
    r = cfg.rates
    kp = np.ascontiguousarray(r.k_plus, dtype=np.float64)
    km = np.ascontiguousarray(r.k_minus, dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))
    t_max = -1.0 if cfg.t_max is None else float(cfg.t_max)
    max_jumps = -1 if cfg.max_jumps is None else int(cfg.max_jumps)

    stack = np.empty(2 * CHUNK, dtype=np.int16)
    length, t, n_done = 0, 0.0, 0
    times_parts, code_parts = [], []
    times_buf = np.empty(CHUNK, dtype=np.float64)
    codes_buf = np.empty(CHUNK, dtype=np.int16)
    stopped = max_jumps == 0 or t_max == 0.0
    while not stopped:
        if length + CHUNK > stack.shape[0]:
            grown = np.empty(2 * stack.shape[0], dtype=np.int16)
            grown[:length] = stack[:length]
            stack = grown
        n_pairs = CHUNK if max_jumps < 0 else min(CHUNK, max_jumps - n_done)
        u = rng.random(2 * n_pairs).reshape(n_pairs, 2)
        n, length, t, stopped = _kernels.gillespie_chunk(
            kp, km, u, stack, length, t, t_max, max_jumps, n_done, times_buf, codes_buf)
        times_parts.append(times_buf[:n].copy())
        code_parts.append(codes_buf[:n].copy())
        n_done += n
        if max_jumps >= 0 and n_done >= max_jumps:
            stopped = True

    times = np.concatenate(times_parts) if times_parts else np.empty(0)
    codes = np.concatenate(code_parts) if code_parts else np.empty(0, dtype=np.int16)
    t_end = float(cfg.t_max) if cfg.t_max is not None else (float(times[-1]) if times.size else 0.0)
    traj = Trajectory.from_codes(r, times, codes, t_end, cfg.record_stride, int(cfg.seed))
    if traj.final_state.ids != tuple(stack[:length].tolist()):
        raise CopolyError("replayed final state disagrees with the live stack")
    return traj


def state_at(traj: Trajectory, t: float) -> Polymer:
    """Polymer ``X(t)``, using the state after any jump occurring exactly at ``t``."""
    n = int(traj.n_applied(t))
    return Polymer(_kernels.replay_stack(traj.codes, n).tolist())


def length_series(traj: Trajectory, sample_times: Sequence[float]) -> np.ndarray:
    """``|X(t)|`` at each (increasing) sample time."""
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1:
        raise OutOfRange("sample_times must be one-dimensional")
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise OutOfRange("sample_times must be non-decreasing")
    return traj.lengths[traj.n_applied(times)]


def counts_from_snapshot(traj: Trajectory, n: int) -> np.ndarray:
    """Monomer counts after ``n`` events, replaying at most ``record_stride`` events."""
    if not 0 <= n <= traj.n_jumps:
        raise OutOfRange(f"event index {n} outside [0, {traj.n_jumps}]")
    s = n // traj.record_stride
    counts = traj.snapshot_counts[s].copy()
    base = s * traj.record_stride
    if n == base:
        return counts
    # detaches inside the window need the tip before each event
    tips = traj.tips
    for i in range(base, n):
        c = int(traj.codes[i])
        if c == DETACH:
            counts[tips[i]] -= 1
        else:
            counts[c] += 1
    return counts


__all__ = [
    "SimConfig", "Trajectory", "simulate", "state_at", "length_series",
    "counts_from_snapshot",
]
