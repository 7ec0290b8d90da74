"""The geometric transform from a potential to its quasipotential.

For a potential S with drift S(1), the transform is

    Phi(x) = S(x) - max_{y in [x, x+1]} S(y),

computed three ways that must agree:

* phi_direct: sliding-window maxima over two periods of S (monotone deque,
  O(n) total).
* phi_constructive: the light-source sweep. Think of the graph of S on
  [b, b+1] as a mountain profile lit horizontally from the left (drift > 0)
  or from the right (drift < 0), starting from a base peak b chosen so the
  window maximum sits at its far end. Lit stretches are flat pieces of Phi at
  the value min{0, -S(1)}; shadowed stretches follow S. The trace records the
  decreasing sequence of peak levels L_k, the peaks z_k, and the crossing
  points y_k bounding each lit stretch.
* phi_tilde: the variational form min over y of (downhill mass from x to y
  plus uphill mass from y to x+1), which equals Phi plus the uphill mass of
  one full period. Computed from two cumulative arrays and one
  sliding-window minimum.

All routes return a QuasiPotential on the same grid with flat intervals
extracted at tolerance tau_flat (default 8 * max|F| / n).
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ChainMismatch, NumericalCheckError, ValidationError
from .fields import (SampledPotential, component_index_span, cumulative_clipped,
                     find_components, _circular_runs)
from .validation import wrap_unit


def sliding_window_max(values, width):
    """max(values[i:i+width]) for every window, via a monotone deque.

    Ties keep the earliest index, so tied argmax positions resolve to the
    smallest point. O(len(values)) overall.
    """
    values = np.asarray(values, dtype=float)
    size = len(values)
    if not 1 <= width <= size:
        raise ValidationError(f"window width {width} out of range for {size} values")
    out = np.empty(size - width + 1)
    dq = deque()
    for j in range(size):
        while dq and values[dq[-1]] < values[j]:
            dq.pop()
        dq.append(j)
        if dq[0] <= j - width:
            dq.popleft()
        if j >= width - 1:
            out[j - width + 1] = values[dq[0]]
    return out


def sliding_window_min(values, width):
    return -sliding_window_max(-np.asarray(values, dtype=float), width)


@dataclass(frozen=True)
class ConstructionTrace:
    """Bookkeeping of the light sweep, in window coordinates [b, b+1].

    levels is strictly decreasing; z are the peaks realizing each level;
    y are the crossing points that open each flat stretch; flat_union is the
    list of lit intervals. direction is +1 for drift > 0, -1 for drift < 0,
    0 for the shortcut branches (monotone or zero drift), which carry an
    empty trace.
    """

    base: float | None
    levels: tuple
    z: tuple
    y: tuple
    flat_union: tuple
    direction: int

    def to_dict(self):
        return {
            "b": self.base,
            "levels": list(self.levels),
            "z": list(self.z),
            "y": list(self.y),
        }


@dataclass(frozen=True)
class QuasiPotential:
    """Phi on the grid, with flat structure and provenance.

    phi_values has n+1 entries (both endpoints), exactly periodic. offset is
    zero for the direct and constructive routes; the tilde route carries the
    uphill mass of one period, so its flat level is min{0, -drift} + offset.
    """

    n: int
    phi_values: np.ndarray
    method: str
    drift: float
    offset: float
    tau_flat: float
    flat_mask: np.ndarray
    flat_intervals: tuple
    trace: ConstructionTrace | None
    potential: SampledPotential = field(repr=False)
    under_resolved: bool = False

    @property
    def flat_level(self):
        return min(0.0, -self.drift) + self.offset

    def evaluate(self, x):
        grid = np.arange(self.n + 1) / self.n
        return np.interp(wrap_unit(np.asarray(x, dtype=float)), grid, self.phi_values)

    def validate(self):
        phi = self.phi_values
        if phi[0] != phi[-1]:
            raise NumericalCheckError("quasipotential is not periodic at grid level")
        bound = self.potential.field_bound
        slope = np.max(np.abs(np.diff(phi))) * self.n if self.n else 0.0
        if slope > 2.0 * bound + 1e-9 * (1.0 + bound):
            raise NumericalCheckError(
                f"quasipotential slope {slope:.3e} exceeds twice the field bound {bound:.3e}")
        top = float(np.max(phi))
        if abs(top - self.flat_level) > self.tau_flat + 1e-12 * (1.0 + abs(self.flat_level)):
            raise NumericalCheckError(
                f"max of quasipotential {top:.6e} misses flat level {self.flat_level:.6e}")
        return self


def _flat_structure(phi, level, tau, n):
    mask = np.abs(phi - level) <= tau
    runs = _circular_runs(mask[:n])
    intervals = tuple((run[0] / n, run[-1] / n) for run in runs)
    single = any(len(run) == 1 for run in runs)
    return mask, intervals, single


def _assemble(S, phi, method, trace, tau_flat, offset=0.0):
    n = S.n
    phi = np.asarray(phi, dtype=float)
    phi.flags.writeable = False
    tau = 8.0 * S.field_bound / n if tau_flat is None else float(tau_flat)
    level = min(0.0, -S.drift) + offset
    mask, intervals, single = _flat_structure(phi, level, tau, n)
    if single:
        warnings.warn("flat structure at grid resolution; the transform may be under-resolved",
                      RuntimeWarning, stacklevel=3)
    qp = QuasiPotential(n=n, phi_values=phi, method=method, drift=S.drift, offset=offset,
                        tau_flat=tau, flat_mask=mask, flat_intervals=intervals, trace=trace,
                        potential=S, under_resolved=single)
    return qp.validate()


def phi_direct(S, tau_flat=None):
    """Transform by brute window maxima over the doubled grid."""
    n = S.n
    ext = S.extended(2)
    win = sliding_window_max(ext, n + 1)
    phi = ext[:n + 1] - win
    phi[n] = phi[0]
    return _assemble(S, phi, "direct", None, tau_flat)


_EMPTY_TRACE = ConstructionTrace(None, (), (), (), (), 0)


def phi_constructive(S, chain=None, tau_flat=None):
    """Transform by the light-source sweep, with a construction trace.

    Shortcut branches: monotone S gives the constant min{0, -drift}; zero
    drift gives S - max S. Both carry an empty trace.
    """
    n = S.n
    s = S.s_values
    bound = S.field_bound
    delta = np.diff(s)
    tol = 1e-12 * (1.0 + bound) / n

    if np.all(delta >= -tol) or np.all(delta <= tol):
        phi = np.full(n + 1, min(0.0, -S.drift))
        return _assemble(S, phi, "constructive", _EMPTY_TRACE, tau_flat)
    if abs(S.drift) <= 1e-12 * (1.0 + bound):
        phi = s - np.max(s)
        phi = phi.copy()
        phi[n] = phi[0]
        return _assemble(S, phi, "constructive", _EMPTY_TRACE, tau_flat)

    if chain is None:
        if S.field_ref is None:
            raise ValidationError("constructive transform needs a component chain")
        chain = find_components(S.field_ref, n)
    if chain.ell == 0:
        raise ChainMismatch("non-monotone potential but no unstable components found")

    ext = S.extended(4)
    start, end = component_index_span(chain.unstable[0], n)
    probe = np.arange(n + start, n + end + 1)
    a_idx = n + int(probe[np.argmax(ext[probe])]) % n

    if S.drift > 0:
        search = ext[a_idx:a_idx + n + 1]
        b_idx = a_idx + int(np.argmax(search))
    else:
        search = ext[a_idx - n:a_idx + 1]
        b_idx = a_idx - n + int(np.argmax(search))

    window = ext[b_idx:b_idx + n + 1]
    if S.drift > 0:
        running = np.maximum.accumulate(window)
        phi_win = window - S.drift - running
    else:
        running = np.maximum.accumulate(window[::-1])[::-1]
        phi_win = window - running

    trace = _sweep_trace(window, b_idx, n, bound, S.drift, chain.ell)

    phi = np.empty(n + 1)
    idx = (b_idx + np.arange(n)) % n
    phi[idx] = phi_win[:n]
    phi[n] = phi[0]
    return _assemble(S, phi, "constructive", trace, tau_flat)


def _plateau_peaks(window, tol, right_edges=False):
    """Indices of interior local maxima after collapsing near-equal plateaus."""
    n = len(window) - 1
    d = np.diff(window)
    sig = np.where(np.abs(d) <= tol, 0, np.sign(d)).astype(int)
    peaks = []
    j = 0
    while j < n:
        if sig[j] == 0:
            j += 1
            continue
        if sig[j] > 0:
            k = j + 1
            while k < n and sig[k] == 0:
                k += 1
            if k < n and sig[k] < 0:
                # plateau [j+1, k] between a rise and a fall
                peaks.append(k if right_edges else j + 1)
            j = k
        else:
            j += 1
    return peaks


def _sweep_trace(window, b_idx, n, bound, drift, ell):
    base = (b_idx % n) / n
    tau_eq = 4e-9 * bound / n
    interior = _plateau_peaks(window, tau_eq, right_edges=drift < 0)
    gamma = sorted(set([0, n] + interior))
    distinct = len(gamma) - 1  # 0 and n are the same point mod 1
    if distinct != ell:
        raise ChainMismatch(
            f"level sweep found {distinct} local maxima per period, chain has {ell}")

    vals = {g: window[g] for g in gamma}
    levels, zs = [], []
    if drift > 0:
        remaining = list(gamma)
        while remaining:
            top = max(vals[g] for g in remaining)
            z = min(g for g in remaining if vals[g] == top)
            levels.append(top)
            zs.append(z)
            remaining = [g for g in remaining if g < z]
        if zs[-1] != 0:
            raise ChainMismatch("level sweep did not terminate at the base point")
        ys = []
        for k in range(len(zs) - 1):
            lo, hi, lvl = zs[k + 1], zs[k], levels[k + 1]
            j = lo + 1
            while j <= hi and window[j] < lvl:
                j += 1
            ys.append(j)
        flat = tuple((base + y / n, base + z / n) for y, z in zip(ys, zs[:-1]))
    else:
        remaining = list(gamma)
        while remaining:
            top = max(vals[g] for g in remaining)
            z = max(g for g in remaining if vals[g] == top)
            levels.append(top)
            zs.append(z)
            remaining = [g for g in remaining if g > z]
        if zs[-1] != n:
            raise ChainMismatch("level sweep did not terminate at the base point")
        ys = []
        for k in range(len(zs) - 1):
            lo, hi, lvl = zs[k], zs[k + 1], levels[k + 1]
            j = hi - 1
            while j >= lo and window[j] < lvl:
                j -= 1
            ys.append(j)
        flat = tuple((base + z / n, base + y / n) for z, y in zip(zs[:-1], ys))

    return ConstructionTrace(base=base, levels=tuple(levels),
                             z=tuple(base + z / n for z in zs),
                             y=tuple(base + y / n for y in ys),
                             flat_union=flat, direction=1 if drift > 0 else -1)


def _extend_by_rule(values, periods):
    n = len(values) - 1
    drift = values[-1]
    out = np.empty(periods * n + 1)
    for k in range(periods):
        out[k * n:(k + 1) * n] = values[:n] + k * drift
    out[periods * n] = periods * drift
    return out


def phi_tilde(f, n, tau_flat=None):
    """The two-sided mass transform; differs from Phi by int_0^1 max(F, 0)."""
    pos = cumulative_clipped(f, n, sign=1)
    neg = cumulative_clipped(f, n, sign=-1)
    gap = neg - pos
    mn = sliding_window_min(_extend_by_rule(gap, 2), n + 1)
    tilde = mn + pos + pos[-1] - neg
    tilde[n] = tilde[0]

    s_values = pos - neg
    s_values[0] = 0.0
    if f.form == "grid":
        bound = float(np.max(np.abs(f.samples)))
    else:
        xs = np.arange(2 * n + 1) / (2.0 * n)
        bound = float(np.max(np.abs(f(xs))))
    S = SampledPotential(n=n, s_values=s_values, drift=float(s_values[-1]),
                         field_bound=bound, field_ref=f)
    return _assemble(S, tilde, "tilde", None, tau_flat, offset=float(pos[-1]))
