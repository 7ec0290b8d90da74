"""Viscosity-solution verification for stationary Hamilton-Jacobi equations.

A continuous periodic candidate phi solves H(x, grad phi) = 0 in the
viscosity sense when H <= 0 on every superdifferential slope and H >= 0 on
every subdifferential slope. On a grid the one-sided slopes are estimated by
second-order differences; where they disagree beyond the kink threshold the
point carries an interval differential (concave kink: superdifferential
between the slopes; convex kink: subdifferential), mirroring the calculus of
piecewise smooth functions.

Hamiltonians are admitted under two hypotheses, checked numerically on a
sampled box: convexity in the momentum (midpoint inequality) and the double
root H(x, 0) = H(x, F(x)) = 0 tying H to its drift field. The quadratic
p(p - F(x)) is the canonical instance; two further built-in families keep the
verification honest against shape-specific coincidences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisFailed, ValidationError
from .fields import as_field

_P_SAMPLES = 17


class Hamiltonian:
    """H(x, p) with its declared drift field.

    fn must broadcast over numpy arrays in both arguments. The drift field
    enters the double-root hypothesis and sets the momentum box for the
    convexity check.
    """

    def __init__(self, name, drift_field, fn):
        self.name = name
        self.field = as_field(drift_field)
        self.fn = fn
        xs = np.arange(512) / 512
        self.field_bound = max(float(np.max(np.abs(self.field(xs)))), 1e-12)

    def __call__(self, x, p):
        return self.fn(np.asarray(x, dtype=float), np.asarray(p, dtype=float))

    def check_hypotheses(self, nx=256, np_samples=33):
        """Convexity (midpoint inequality on a momentum box) and the double
        root at p = 0 and p = F(x). Raises HypothesisFailed with the worst
        offending point; returns a summary dict when both pass."""
        xs = np.arange(nx) / nx
        fv = self.field(xs)
        k = 3.0 * max(self.field_bound, 1.0)
        ps = np.linspace(-k, k, np_samples)
        grid = self(xs[:, None], ps[None, :])
        tau = 1e-6 * (1.0 + float(np.max(np.abs(grid))))

        at_zero = np.abs(self(xs, np.zeros(nx)))
        at_f = np.abs(self(xs, fv))
        worst_root = float(max(np.max(at_zero), np.max(at_f)))
        if worst_root > tau:
            i = int(np.argmax(np.maximum(at_zero, at_f)))
            raise HypothesisFailed(
                f"{self.name}: double-root hypothesis fails at x = {xs[i]:.6g} "
                f"(|H| = {worst_root:.3e} > {tau:.3e})")

        ii, jj = np.meshgrid(np.arange(np_samples), np.arange(np_samples),
                             indexing="ij")
        pick = (ii < jj) & ((ii + jj) % 2 == 0)
        ii, jj = ii[pick], jj[pick]
        excess = grid[:, (ii + jj) // 2] - 0.5 * (grid[:, ii] + grid[:, jj])
        worst_mid = float(np.max(excess))
        if worst_mid > tau:
            row, col = np.unravel_index(np.argmax(excess), excess.shape)
            raise HypothesisFailed(
                f"{self.name}: midpoint convexity fails at x = {xs[row]:.6g}, "
                f"p pair ({ps[ii[col]]:.4g}, {ps[jj[col]]:.4g}) "
                f"(excess {worst_mid:.3e} > {tau:.3e})")
        return {"tau": tau, "worst_root": worst_root, "worst_midpoint": worst_mid}


def builtin_hamiltonians(drift_field):
    """Three conforming Hamiltonians for the given drift field.

    The quadratic p(p - F); a shifted cosh, convex with the same double
    root; and a quartic, the quadratic damped by 1 + c u^2 with c small
    enough (relative to the field bound) to keep it convex. Each instance is
    hypothesis-checked before being returned.
    """
    f = as_field(drift_field)
    xs = np.arange(512) / 512
    kf = max(float(np.max(np.abs(f(xs)))), 1e-12)
    c = 1.0 / (1.0 + kf * kf)

    def quadratic(x, p):
        return p * (p - f(x))

    def shifted_cosh(x, p):
        half = 0.5 * f(x)
        return np.cosh(p - half) - np.cosh(half)

    def guarded_quartic(x, p):
        u = p - 0.5 * f(x)
        return (u * u - 0.25 * f(x) ** 2) * (1.0 + c * u * u)

    out = []
    for name, fn in (("quadratic", quadratic), ("shifted-cosh", shifted_cosh),
                     ("guarded-quartic", guarded_quartic)):
        h = Hamiltonian(name, f, fn)
        h.check_hypotheses()
        out.append(h)
    return out


def _phi_values(phi):
    values = getattr(phi, "phi_values", phi)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 9:
        raise ValidationError("candidate must be a 1-d periodic grid function")
    if values[0] != values[-1]:
        raise ValidationError("candidate grid function must close periodically")
    return values


def _one_sided_slopes(values):
    n = len(values) - 1
    v = values[:n]
    left = (3.0 * v - 4.0 * np.roll(v, 1) + np.roll(v, 2)) * (0.5 * n)
    right = (-3.0 * v + 4.0 * np.roll(v, -1) - np.roll(v, -2)) * (0.5 * n)
    return left, right


def sub_super_differentials(phi, i, tau=None):
    """(subdifferential, superdifferential) at grid point i, as closed
    intervals (lo, hi) or None.

    Slopes within tau of each other count as smooth: both differentials are
    the singleton midpoint slope. tau defaults to ten grid-slopes of the
    candidate's own slope scale.
    """
    values = _phi_values(phi)
    n = len(values) - 1
    left, right = _one_sided_slopes(values)
    if tau is None:
        tau = 10.0 * float(np.max(np.abs(np.diff(values))))
    a, b = float(left[i % n]), float(right[i % n])
    if abs(a - b) <= tau:
        mid = 0.5 * (a + b)
        return (mid, mid), (mid, mid)
    if a > b:
        return None, (b, a)
    return (a, b), None


@dataclass(frozen=True)
class ViscosityReport:
    """Per-point margins and the overall verdict."""

    n: int
    tau: float
    verdict: bool
    left_slopes: np.ndarray = field(repr=False)
    right_slopes: np.ndarray = field(repr=False)
    kinds: tuple = field(repr=False)
    sub_margins: np.ndarray = field(repr=False)
    sup_margins: np.ndarray = field(repr=False)
    violations: tuple = ()
    hypothesis_summary: dict = field(default_factory=dict)

    def record(self, i):
        a, b = float(self.left_slopes[i]), float(self.right_slopes[i])
        kind = self.kinds[i]
        if kind == "smooth":
            mid = 0.5 * (a + b)
            dm = dp = (mid, mid)
        elif kind == "concave":
            dm, dp = None, (b, a)
        else:
            dm, dp = (a, b), None
        return {"x": i / self.n, "left_slope": a, "right_slope": b,
                "d_minus": dm, "d_plus": dp,
                "sub_margin": _opt(self.sub_margins[i]),
                "sup_margin": _opt(self.sup_margins[i])}

    def to_dict(self):
        from collections import Counter
        return {"verdict": self.verdict, "tau": self.tau, "n": self.n,
                "counts": dict(Counter(self.kinds)),
                "violations": [dict(v) for v in self.violations]}


def _opt(v):
    return None if np.isnan(v) else float(v)


def check_viscosity(phi, hamiltonian, tau=None):
    """Verify the candidate against one Hamiltonian.

    Checks the Hamiltonian's hypotheses first (HypothesisFailed propagates),
    then evaluates H on every point's differential intervals, each sampled at
    17 Chebyshev nodes. Subsolution margins are max H over the
    superdifferential, supersolution margins are -min H over the
    subdifferential; the verdict requires every margin <= tau.
    """
    values = _phi_values(phi)
    n = len(values) - 1
    summary = hamiltonian.check_hypotheses()
    tau_kink = 10.0 * hamiltonian.field_bound / n
    left, right = _one_sided_slopes(values)

    smooth = np.abs(left - right) <= tau_kink
    concave = ~smooth & (left > right)
    convex = ~smooth & (left < right)
    kinds = tuple(np.where(smooth, "smooth",
                           np.where(concave, "concave", "convex")))

    lo = np.where(smooth, 0.5 * (left + right), np.minimum(left, right))
    hi = np.where(smooth, 0.5 * (left + right), np.maximum(left, right))
    theta = np.pi * np.arange(_P_SAMPLES) / (_P_SAMPLES - 1)
    nodes = (0.5 * (lo + hi)[:, None]
             + 0.5 * (hi - lo)[:, None] * np.cos(theta)[None, :])
    xs = np.arange(n) / n
    hvals = hamiltonian(xs[:, None], nodes)

    if tau is None:
        # scale by the Hamiltonian's magnitude over the momentum box, not
        # just the evaluated nodes; near-exact candidates keep those close
        # to the roots where H vanishes, which would understate the
        # second-order error of the slope estimates
        kf = 3.0 * max(hamiltonian.field_bound, 1.0)
        wide = np.stack([np.full(n, -kf), 0.5 * hamiltonian.field(xs),
                         np.full(n, kf)], axis=1)
        box = max(float(np.max(np.abs(hamiltonian(xs[:, None], wide)))),
                  float(np.max(np.abs(hvals))))
        tau = (1e-6 + 100.0 / n ** 2) * (1.0 + box)

    has_plus = smooth | concave
    has_minus = smooth | convex
    sub = np.where(has_plus, np.max(hvals, axis=1), np.nan)
    sup = np.where(has_minus, -np.min(hvals, axis=1), np.nan)

    violations = []
    for i in np.flatnonzero(np.nan_to_num(sub, nan=-np.inf) > tau):
        violations.append({"x": i / n, "condition": "subsolution",
                           "margin": float(sub[i])})
    for i in np.flatnonzero(np.nan_to_num(sup, nan=-np.inf) > tau):
        violations.append({"x": i / n, "condition": "supersolution",
                           "margin": float(sup[i])})
    verdict = not violations
    return ViscosityReport(n=n, tau=float(tau), verdict=verdict,
                           left_slopes=left, right_slopes=right, kinds=kinds,
                           sub_margins=sub, sup_margins=sup,
                           violations=tuple(violations),
                           hypothesis_summary=summary)
