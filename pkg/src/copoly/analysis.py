"""Empirical observables of simulated trajectories and theory comparison.

Every empirical quantity here is computed from the event log alone; theory
values enter only through a :class:`~copoly.theory.TheorySummary` passed to
:func:`compare`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import _kernels
from .exceptions import (BoundaryError, DegenerateWindow, EmptyTrajectory, InsufficientData,
                         OutOfRange)
from .model import RegimeClass
from .simulator import Trajectory, length_series
from .theory import TheorySummary


def empirical_composition(traj: Trajectory, sample_times: Sequence[float]) -> np.ndarray:
    """Fractions ``N_i(t) / |X(t)|`` with shape ``(len(sample_times), d)``.

    Rows are zero while the polymer is at the root.
    """
    counts = traj.counts_at(sample_times).astype(float)
    total = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(total > 0, counts / np.where(total > 0, total, 1.0), 0.0)
    return frac


def empirical_velocity(traj: Trajectory, burn_in_fraction: float = 0.0) -> float:
    """Net growth per unit time over the window ``[b*T, T]``."""
    b = float(burn_in_fraction)
    if not 0.0 <= b < 1.0:
        raise OutOfRange(f"burn_in_fraction must lie in [0, 1), got {b!r}")
    T = traj.t_end
    window = (1.0 - b) * T
    if window <= 0:
        raise DegenerateWindow("trajectory horizon is zero")
    start, end = length_series(traj, [b * T, T])
    return float(end - start) / window


def default_tail_guard(n_jumps: int) -> int:
    return max(1000, int(math.ceil(0.05 * n_jumps)))


@dataclass
class BoundaryView:
    """Last-exit decomposition ``W_k = Z_{e_k}`` of one trajectory.

    Arrays are indexed by level ``k = 0 .. K`` where ``K`` is the final
    polymer length; ``tip[0]`` is ``-1`` (the root has no tip).
    """

    e: np.ndarray
    tip: np.ndarray
    provisional: np.ndarray
    tail_guard: int
    level_guard: int
    jump_times: np.ndarray = field(repr=False)

    @property
    def max_level(self) -> int:
        return int(self.e.shape[0] - 1)

    @property
    def settled_levels(self) -> int:
        """Number of leading levels ``1 .. L`` that are not provisional."""
        prov = np.flatnonzero(self.provisional[1:])
        return int(prov[0]) if prov.size else self.max_level

    def polymer(self, k: int) -> np.ndarray:
        """Boundary polymer ``W_k`` as the sequence of level tips ``1 .. k``."""
        return self.tip[1:k + 1].copy()

    def exit_times(self) -> np.ndarray:
        """Continuous time of each last exit ``tau_{e_k}`` (0 for ``e_k = 0``)."""
        times = np.concatenate(([0.0], self.jump_times))
        return times[self.e]

    def length_at(self, sample_times: Sequence[float]) -> np.ndarray:
        """Boundary length ``max{k : tau_{e_k} <= t}`` (a non-decreasing staircase)."""
        return np.searchsorted(self.exit_times(), np.asarray(sample_times, dtype=float),
                               side="right") - 1

    def records(self) -> List[dict]:
        return [{"k": k, "e_k": int(self.e[k]), "tip": int(self.tip[k]),
                 "provisional": bool(self.provisional[k])} for k in range(self.e.shape[0])]


def extract_boundary(traj: Trajectory, tail_guard: Optional[int] = None,
                     level_guard: Optional[int] = None) -> BoundaryView:
    """Compute last-exit indices and boundary tips by a backward sweep.

    A level is provisional when its last exit falls among the final
    ``tail_guard`` jumps or when it lies within ``level_guard`` levels of the
    final length; a longer run could still revisit such levels. By default
    ``tail_guard = max(1000, 5% of jumps)`` and ``level_guard`` is the number
    of levels the run climbed on average during ``tail_guard`` jumps.

    Raises
    ------
    EmptyTrajectory
        The trajectory has no jumps.
    BoundaryError
        The extracted process fails its prefix / ordering invariants.
    """
    n = traj.n_jumps
    if n == 0:
        raise EmptyTrajectory("trajectory has no jumps")
    if tail_guard is None:
        tail_guard = default_tail_guard(n)
    lengths = traj.lengths
    final = int(lengths[-1])
    if level_guard is None:
        level_guard = int(math.ceil(tail_guard * max(final, 1) / n))
    # above the final length a "last visit" is later undercut within the run
    max_level = final
    e = _kernels.last_exit_indices(lengths, max_level)
    tip = traj.tips[e].astype(np.int64)
    levels = np.arange(max_level + 1)
    provisional = (e > n - tail_guard) | (levels > final - level_guard)
    provisional[0] = e[0] > n - tail_guard
    bad = _kernels.prefix_violations(traj.codes, lengths, e, tip.astype(np.int16))
    if bad:
        raise BoundaryError(f"{bad} boundary invariant violations")
    return BoundaryView(e, tip, provisional, int(tail_guard), int(level_guard), traj.jump_times)


def boundary_violations(traj: Trajectory, bv: BoundaryView,
                        sample_times: Optional[Sequence[float]] = None) -> int:
    """Count prefix-property and staircase-below-trajectory violations."""
    bad = int(_kernels.prefix_violations(traj.codes, traj.lengths, bv.e, bv.tip.astype(np.int16)))
    if sample_times is None:
        sample_times = np.concatenate(([0.0], traj.jump_times))
    sample_times = np.asarray(sample_times, dtype=float)
    bad += int(np.sum(bv.length_at(sample_times) > length_series(traj, sample_times)))
    return bad


@dataclass
class ConeChainEstimate:
    rows: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        rows = [None if np.isnan(row).any() else row.tolist() for row in self.rows]
        return {"rows": rows, "counts": self.counts.tolist()}


def cone_chain_empirical(bv: Union[BoundaryView, Sequence[int]], d: Optional[int] = None
                         ) -> ConeChainEstimate:
    """Empirical transition matrix of the boundary tip sequence.

    ``bv`` is either a :class:`BoundaryView` (only its settled levels are
    used) or a plain sequence of 0-based tips for levels ``1, 2, ...``.
    Rows without departures are NaN.
    """
    if isinstance(bv, BoundaryView):
        tips = bv.tip[1:bv.settled_levels + 1]
    else:
        tips = np.asarray(bv, dtype=np.int64)
    if d is None:
        d = int(tips.max()) + 1 if tips.size else 0
    if tips.shape[0] < 2:
        raise InsufficientData("need at least two settled boundary levels")
    counts = np.zeros((d, d), dtype=np.int64)
    np.add.at(counts, (tips[:-1], tips[1:]), 1)
    departures = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(departures > 0, counts / np.where(departures > 0, departures, 1), np.nan)
    return ConeChainEstimate(rows, counts)


def level_fraction_empirical(traj: Trajectory) -> tuple:
    """Visit fractions ``chi_i(n)/n`` by tip type and ``chi_o(n)/n`` for the root.

    Visits are counted over the ``n + 1`` states ``Z_0 .. Z_n``.
    """
    n = traj.n_jumps
    if n == 0:
        raise EmptyTrajectory("trajectory has no jumps")
    tips = traj.tips.astype(np.int64)
    root = int(np.sum(tips < 0))
    per_type = np.bincount(tips[tips >= 0], minlength=traj.d)
    return per_type / n, root / n


def root_occupation(traj: Trajectory) -> float:
    """Fraction of ``[0, T]`` spent at the root."""
    if traj.t_end <= 0:
        return 1.0
    at_root = traj.lengths == 0
    return float(np.sum(traj.holding_times[at_root]) / traj.t_end)


def length_occupation(traj: Trajectory, max_length: int) -> np.ndarray:
    """Time fraction spent at each length ``0 .. max_length - 1``, plus ``>= max_length`` last."""
    if traj.t_end <= 0:
        raise EmptyTrajectory("trajectory horizon is zero")
    L = np.minimum(traj.lengths, max_length)
    return np.bincount(L, weights=traj.holding_times, minlength=max_length + 1) / traj.t_end


def length_chisquare(traj: Trajectory, expected: Sequence[float], spacing: float) -> tuple:
    """Chi-square goodness of fit of thinned length samples.

    ``X`` is sampled every ``spacing`` time units so that samples are close to
    independent; the last bin of ``expected`` collects all longer lengths.
    Returns ``(statistic, p_value, n_samples)``.
    """
    expected = np.asarray(expected, dtype=float)
    n_bins = expected.shape[0]
    sample_times = np.arange(spacing, traj.t_end + 0.5 * spacing, spacing)
    sample_times = sample_times[sample_times <= traj.t_end]
    if sample_times.size < n_bins:
        raise InsufficientData("too few thinned samples for the chi-square test")
    L = np.minimum(length_series(traj, sample_times), n_bins - 1)
    observed = np.bincount(L, minlength=n_bins)
    stat, p = stats.chisquare(observed, expected / expected.sum() * observed.sum())
    return float(stat), float(p), int(sample_times.size)


def holding_statistics(traj: Trajectory) -> tuple:
    """Per-tip sojourn means, standard errors and sample sizes (uncensored only)."""
    tips = traj.tips[:-1].astype(np.int64)
    hold = traj.holding_times[:-1]
    means = np.full(traj.d, np.nan)
    ses = np.full(traj.d, np.nan)
    ns = np.zeros(traj.d, dtype=np.int64)
    for i in range(traj.d):
        h = hold[tips == i]
        ns[i] = h.size
        if h.size > 1:
            means[i] = h.mean()
            ses[i] = h.std(ddof=1) / math.sqrt(h.size)
    return means, ses, ns


def jump_frequencies(traj: Trajectory) -> tuple:
    """Empirical next-event frequencies given the tip.

    Returns ``(freq, counts)`` with shape ``(d + 1, d + 1)``: row ``i < d`` is
    tip ``Mi``, row ``d`` the root; columns ``0 .. d-1`` attach, ``d`` detach.
    """
    d = traj.d
    tips = traj.tips[:-1].astype(np.int64)
    rows = np.where(tips < 0, d, tips)
    cols = np.where(traj.codes < 0, d, traj.codes).astype(np.int64)
    counts = np.zeros((d + 1, d + 1), dtype=np.int64)
    np.add.at(counts, (rows, cols), 1)
    tot = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = counts / np.where(tot > 0, tot, 1)
    return freq, counts


@dataclass
class ComparisonReport:
    """Empirical-vs-theory series for one or more replicas.

    ``sigma_emp`` has shape ``(n_times, d)`` (replica mean) and
    ``sigma_emp_replicas`` shape ``(R, n_times, d)``. Sections that do not
    apply in the regime are ``None``.
    """

    regime: RegimeClass
    times: np.ndarray
    length: np.ndarray
    length_replicas: np.ndarray
    sigma_emp: Optional[np.ndarray] = None
    sigma_emp_replicas: Optional[np.ndarray] = None
    sigma_theory: Optional[np.ndarray] = None
    vel_emp: Optional[np.ndarray] = None
    vel_theory: Optional[float] = None
    velocity_window: Optional[float] = None
    velocity_window_replicas: Optional[np.ndarray] = None
    cone_chain: Optional[ConeChainEstimate] = None
    cone_chain_replicas: Optional[list] = None
    V_theory: Optional[np.ndarray] = None
    level_emp: Optional[np.ndarray] = None
    level_emp_replicas: Optional[np.ndarray] = None
    level_theory: Optional[np.ndarray] = None
    root_visit_fraction: Optional[float] = None
    root_occupation: Optional[float] = None
    root_occupation_replicas: Optional[np.ndarray] = None
    root_mass_theory: Optional[float] = None
    boundaries: Optional[list] = None
    max_dev: dict = field(default_factory=dict)


def _sample_grid(horizon: float, n_points: int) -> np.ndarray:
    if n_points < 1:
        raise OutOfRange("grid needs at least one point")
    return horizon * np.arange(1, n_points + 1) / n_points


def compare(trajs: Union[Trajectory, Sequence[Trajectory]], summary: TheorySummary,
            grid: Union[int, Sequence[float]] = 200, burn_in_fraction: float = 0.2,
            tail_guard: Optional[int] = None, root_only: bool = False) -> ComparisonReport:
    """Assemble the empirical-vs-theory report, averaging replicas pointwise.

    ``grid`` is a number of equally spaced sample times in ``(0, T]`` (``T``
    the shortest replica horizon) or an explicit array of times.
    """
    if isinstance(trajs, Trajectory):
        trajs = [trajs]
    trajs = list(trajs)
    if not trajs:
        raise EmptyTrajectory("no trajectories given")
    for tr in trajs:
        if tr.rates != summary.rates:
            raise OutOfRange("trajectory rates differ from the summary rates")
    horizon = min(tr.t_end for tr in trajs)
    times = _sample_grid(horizon, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)

    length_reps = np.stack([length_series(tr, times) for tr in trajs]).astype(float)
    report = ComparisonReport(regime=summary.regime, times=times,
                              length=length_reps.mean(axis=0), length_replicas=length_reps)

    occ = np.array([root_occupation(tr) for tr in trajs])
    report.root_occupation = float(occ.mean())
    report.root_occupation_replicas = occ
    if summary.root_mass is not None:
        report.root_mass_theory = summary.root_mass
        report.max_dev["root_occupation"] = abs(report.root_occupation - summary.root_mass)

    if root_only or not summary.transient:
        return report

    d = summary.rates.d
    comp = np.stack([empirical_composition(tr, times) for tr in trajs])
    report.sigma_emp_replicas = comp
    report.sigma_emp = comp.mean(axis=0)
    report.sigma_theory = np.asarray(summary.sigma_bar)
    report.max_dev["sigma_final"] = float(np.max(np.abs(report.sigma_emp[-1] - summary.sigma_bar)))

    with np.errstate(divide="ignore", invalid="ignore"):
        report.vel_emp = np.where(times > 0, report.length / np.where(times > 0, times, 1), 0.0)
    report.vel_theory = summary.v
    if horizon > 0:
        win = np.array([empirical_velocity(tr, burn_in_fraction) for tr in trajs])
        report.velocity_window_replicas = win
        report.velocity_window = float(win.mean())
        report.max_dev["velocity_rel"] = abs(report.velocity_window - summary.v) / summary.v

    boundaries, cone_reps = [], []
    pooled = np.zeros((d, d), dtype=np.int64)
    for tr in trajs:
        if tr.n_jumps == 0:
            continue
        bv = extract_boundary(tr, tail_guard)
        boundaries.append(bv)
        try:
            est = cone_chain_empirical(bv, d)
        except InsufficientData:
            continue
        cone_reps.append(est)
        pooled += est.counts
    report.boundaries = boundaries
    report.V_theory = summary.V
    if cone_reps:
        dep = pooled.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(dep > 0, pooled / np.where(dep > 0, dep, 1), np.nan)
        report.cone_chain = ConeChainEstimate(rows, pooled)
        report.cone_chain_replicas = cone_reps
        report.max_dev["cone_chain"] = float(np.nanmax(np.abs(rows - summary.V)))

    lev = [level_fraction_empirical(tr) for tr in trajs if tr.n_jumps > 0]
    if lev:
        report.level_emp_replicas = np.stack([lv[0] for lv in lev])
        report.level_emp = report.level_emp_replicas.mean(axis=0)
        report.root_visit_fraction = float(np.mean([lv[1] for lv in lev]))
        report.level_theory = summary.level_fractions
        report.max_dev["level_fractions"] = float(
            np.max(np.abs(report.level_emp - summary.level_fractions)))
    return report
