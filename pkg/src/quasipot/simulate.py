"""Monte Carlo cross-validation of the exact stationary densities.

Euler-Maruyama for the torus diffusion and event-driven thinning for the
two-state transport process. Both simulators are deterministic given a seed:
the generator is counter-based (Philox) keyed by (seed, path), so results do
not depend on scheduling or chunk sizes.

The drift and the velocities are evaluated through a dense lookup table
(2^15 entries, linear in nothing: nearest sample). At histogram resolution
this is indistinguishable from exact evaluation and it keeps the inner loop
in plain Python arithmetic. Switching-rate evaluations at proposed events use
the exact field call, since the thinning correctness argument needs the true
rate compared against the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ThinningBoundViolated, ValidationError
from .fields import as_field
from .validation import check_positive

_LUT_BITS = 15
_LUT_SIZE = 1 << _LUT_BITS


@dataclass(frozen=True)
class Histogram:
    """Empirical density on [0, 1) with its run manifest in meta."""

    bins: int
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    total: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(np.sum(self.counts)) != self.total:
            raise ValidationError("histogram counts do not sum to the total")
        mass = float(np.sum(self.density) / self.bins)
        if abs(mass - 1.0) > 1e-9:
            raise ValidationError(f"histogram density integrates to {mass!r}")

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _make_histogram(samples, bins, seed, meta):
    counts, edges = np.histogram(samples, bins=bins, range=(0.0, 1.0))
    total = int(counts.sum())
    density = counts * (bins / max(total, 1))
    return Histogram(bins=bins, edges=edges, counts=counts, density=density,
                     total=total, seed=seed, meta=meta)


def _rng(seed, path=0):
    return np.random.Generator(np.random.Philox(key=[seed, path]))


def _lut(f, factor=1.0):
    vals = f(np.arange(_LUT_SIZE) / _LUT_SIZE) * factor
    return vals.tolist()


def simulate_diffusion(b, eps, T, dt=1e-3, burn_in=None, seed=0, bins=50,
                       stride=10):
    """Histogram of X after burn-in, for dX = b(X)dt + eps dW wrapped mod 1.

    Samples are taken every `stride` steps to cut autocorrelation. burn_in
    defaults to T/10.
    """
    check_positive("eps", eps)
    check_positive("T", T)
    if dt > 1e-3:
        raise ValidationError(f"dt must be <= 1e-3, got {dt}")
    if burn_in is None:
        burn_in = T / 10.0
    if not 0.0 <= burn_in < T:
        raise ValidationError("burn_in must lie in [0, T)")
    b = as_field(b)

    steps = int(round(T / dt))
    skip = int(round(burn_in / dt))
    drift = _lut(b, factor=dt)
    sig = eps * math.sqrt(dt)
    rng = _rng(seed)
    x = 0.0
    out = []
    done = 0
    chunk = 1 << 16
    while done < steps:
        m = min(chunk, steps - done)
        noise = rng.standard_normal(m).tolist()
        for j, z in enumerate(noise):
            x += drift[int(x * _LUT_SIZE)] + sig * z
            x %= 1.0
            k = done + j
            if k >= skip and (k - skip) % stride == 0:
                out.append(x)
        done += m
    meta = {"kind": "diffusion", "eps": eps, "T": T, "dt": dt,
            "burn_in": burn_in, "stride": stride, "seed": seed, "bins": bins}
    return _make_histogram(np.array(out), bins, seed, meta)


def _flow_to(x, lut, h, span):
    """Advance x' = F(x) by `span` using classical one-step 4th order."""
    left = span
    while left > 1e-15:
        hh = h if h < left else left
        k1 = lut[int(x % 1.0 * _LUT_SIZE)]
        x2 = x + 0.5 * hh * k1
        k2 = lut[int(x2 % 1.0 * _LUT_SIZE)]
        x3 = x + 0.5 * hh * k2
        k3 = lut[int(x3 % 1.0 * _LUT_SIZE)]
        x4 = x + hh * k3
        k4 = lut[int(x4 % 1.0 * _LUT_SIZE)]
        x = (x + hh * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0) % 1.0
        left -= hh
    return x


def simulate_pdmp(p, lam, T, burn_in=None, seed=0, bins=50):
    """Histogram of the x-marginal of the transport process.

    Between switches x follows the current velocity field; switching is
    sampled by thinning against 1.1 * lam * (max grid rate). meta records
    occupancy of state 0 and the accepted-event gap statistics used by the
    exponential-law checks.
    """
    check_positive("lam", lam)
    check_positive("T", T)
    if burn_in is None:
        burn_in = T / 10.0
    if not 0.0 <= burn_in < T:
        raise ValidationError("burn_in must lie in [0, T)")
    p.validate()

    grid = np.arange(4096) / 4096
    r_max = max(float(np.max(p.r01(grid))), float(np.max(p.r10(grid))))
    bound = 1.1 * lam * r_max
    h = min(1e-3, 0.1 / (lam * r_max))
    luts = (_lut(p.f0), _lut(p.f1))
    rates = (p.r01, p.r10)
    sample_gap = 10.0 * h

    rng = _rng(seed)
    x = 0.0
    sigma = 0
    t = 0.0
    next_prop = rng.exponential(1.0 / bound)
    next_sample = burn_in
    out = []
    occupancy = [0, 0]
    proposals = 0
    accepted = 0
    last_event = 0.0
    gap_sum = 0.0
    gap_sq = 0.0

    while t < T:
        target = min(next_prop, next_sample, T)
        x = _flow_to(x, luts[sigma], h, target - t)
        t = target
        if t == next_sample:
            out.append(x)
            occupancy[sigma] += 1
            next_sample += sample_gap
            continue
        if t == next_prop:
            proposals += 1
            rho = lam * float(rates[sigma](x))
            if rho > bound:
                raise ThinningBoundViolated(
                    f"rate {rho:.6g} exceeds the thinning bound {bound:.6g}")
            if rng.random() * bound < rho:
                sigma = 1 - sigma
                accepted += 1
                gap = t - last_event
                last_event = t
                gap_sum += gap
                gap_sq += gap * gap
            next_prop = t + rng.exponential(1.0 / bound)

    total = max(sum(occupancy), 1)
    meta = {"kind": "pdmp", "lam": lam, "T": T, "burn_in": burn_in,
            "seed": seed, "bins": bins, "flow_step": h,
            "sigma0_fraction": occupancy[0] / total,
            "proposals": proposals, "events": accepted,
            "gap_mean": gap_sum / max(accepted, 1),
            "gap_var": gap_sq / max(accepted, 1) - (gap_sum / max(accepted, 1)) ** 2}
    return _make_histogram(np.array(out), bins, seed, meta)


def tv_distance(hist, reference):
    """Total-variation distance between a histogram and a reference density.

    reference may be a DensityCurve, an array of density values on a uniform
    grid, or a scalar (constant density). Grid values are averaged per bin.
    """
    if np.isscalar(reference):
        ref = np.full(hist.bins, float(reference))
    else:
        vals = getattr(reference, "density", reference)
        vals = np.asarray(vals, dtype=float)
        # integer bucketing; scaling fractional positions jitters at bin edges
        which = np.minimum(np.arange(len(vals)) * hist.bins // len(vals),
                           hist.bins - 1)
        ref = np.bincount(which, weights=vals, minlength=hist.bins)
        ref /= np.bincount(which, minlength=hist.bins)
    return float(0.5 * np.sum(np.abs(hist.density - ref)) / hist.bins)
