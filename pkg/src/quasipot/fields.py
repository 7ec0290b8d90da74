"""Field specifications on the unit torus and their basic analysis.

A field F is given in one of three forms: parsed expression text, a finite
Fourier sum, or uniform grid samples with linear interpolation. Evaluation is
1-periodic for every form (positions are wrapped into [0, 1) first).

This module also builds the integrated potential S(x) = int_0^x F and locates
the components of the zero set {F = 0}, classified by the sign of F on either
side: stable (minus to plus), totally unstable (plus to minus), or neither.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassificationAmbiguous, FieldEvaluationError, ValidationError
from .expr import compile_expression
from .validation import check_grid_size, wrap_unit

_FORMS = ("expression", "fourier", "grid")


@dataclass(frozen=True)
class FieldSpec:
    """Immutable description of a scalar field on the torus."""

    form: str
    text: str | None = None
    a0: float = 0.0
    cos: tuple = ()
    sin: tuple = ()
    samples: tuple = ()

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ValidationError(f"unknown field form {self.form!r}")
        if self.form == "expression":
            if not isinstance(self.text, str):
                raise ValidationError("expression form needs text")
            fn = compile_expression(self.text)
        elif self.form == "fourier":
            cos = tuple(float(c) for c in self.cos)
            sin = tuple(float(s) for s in self.sin)
            k = max(len(cos), len(sin))
            cos = cos + (0.0,) * (k - len(cos))
            sin = sin + (0.0,) * (k - len(sin))
            object.__setattr__(self, "cos", cos)
            object.__setattr__(self, "sin", sin)
            object.__setattr__(self, "a0", float(self.a0))
            fn = self._fourier_fn()
        else:
            samples = tuple(float(v) for v in self.samples)
            if len(samples) < 8:
                raise ValidationError(f"grid form needs >= 8 samples, got {len(samples)}")
            if not all(np.isfinite(samples)):
                raise ValidationError("grid samples contain non-finite entries")
            object.__setattr__(self, "samples", samples)
            fn = self._grid_fn()
        object.__setattr__(self, "_fn", fn)

    def _fourier_fn(self):
        a0 = self.a0
        cos = np.asarray(self.cos, dtype=float)
        sin = np.asarray(self.sin, dtype=float)
        modes = 2.0 * np.pi * np.arange(1, len(cos) + 1)

        def fn(x):
            ang = np.multiply.outer(x, modes)
            return a0 + np.cos(ang) @ cos + np.sin(ang) @ sin

        return fn

    def _grid_fn(self):
        vals = np.asarray(self.samples, dtype=float)
        m = len(vals)
        xp = np.arange(m + 1) / m
        fp = np.concatenate([vals, vals[:1]])
        return lambda x: np.interp(x, xp, fp)

    def __call__(self, x):
        scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
        xa = wrap_unit(np.asarray(x, dtype=float))
        out = np.asarray(self._fn(xa), dtype=float)
        if out.shape != xa.shape:
            out = np.broadcast_to(out, xa.shape).copy()
        return float(out) if scalar else out

    @classmethod
    def expression(cls, text):
        return cls(form="expression", text=text)

    @classmethod
    def fourier(cls, a0=0.0, cos=(), sin=()):
        return cls(form="fourier", a0=a0, cos=tuple(cos), sin=tuple(sin))

    @classmethod
    def grid(cls, samples):
        return cls(form="grid", samples=tuple(samples))

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "form" not in data:
            raise ValidationError("field spec must be an object with a 'form' key")
        form = data["form"]
        if form == "expression":
            return cls.expression(data.get("text", ""))
        if form == "fourier":
            return cls.fourier(data.get("a0", 0.0), data.get("cos", ()), data.get("sin", ()))
        if form == "grid":
            return cls.grid(data.get("samples", ()))
        raise ValidationError(f"unknown field form {form!r}")

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad field JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        if self.form == "expression":
            return {"form": "expression", "text": self.text}
        if self.form == "fourier":
            return {"form": "fourier", "a0": self.a0, "cos": list(self.cos), "sin": list(self.sin)}
        return {"form": "grid", "samples": list(self.samples)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def parse_field(text):
    """Parse expression text into a FieldSpec (errors carry byte offsets)."""
    return FieldSpec.expression(text)


def as_field(obj):
    """Coerce a FieldSpec, dict, JSON text, or expression text into a FieldSpec."""
    if isinstance(obj, FieldSpec):
        return obj
    if isinstance(obj, dict):
        return FieldSpec.from_dict(obj)
    if isinstance(obj, str):
        stripped = obj.lstrip()
        if stripped.startswith("{"):
            return FieldSpec.from_json(obj)
        return FieldSpec.expression(obj)
    raise ValidationError(f"cannot interpret {type(obj).__name__} as a field")


def scaled_field(f, factor):
    """FieldSpec evaluating factor * F(x), exact for every concrete form.

    The main use is the drift b = -F/2 of the diffusion attached to a force
    field F: the density and simulation routines take b, the transform takes
    F, and this keeps the two tied without re-deriving expressions by hand.
    """
    f = as_field(f)
    factor = float(factor)
    if f.form == "fourier":
        return FieldSpec.fourier(factor * f.a0,
                                 [factor * c for c in f.cos],
                                 [factor * s for s in f.sin])
    if f.form == "grid":
        return FieldSpec.grid([factor * v for v in f.samples])
    return FieldSpec.expression(f"({f.text})*({factor!r})")


@dataclass(frozen=True)
class SampledPotential:
    """S sampled at i/n for i = 0..n, with S(0) = 0 and drift = S(1).

    Extension beyond one period follows S(x + 1) = S(x) + drift by rule,
    never by re-integration.
    """

    n: int
    s_values: np.ndarray
    drift: float
    field_bound: float
    field_ref: FieldSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=float)
        if s.shape != (self.n + 1,):
            raise ValidationError(f"expected {self.n + 1} potential samples, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise FieldEvaluationError("non-finite potential sample")
        if s[0] != 0.0:
            raise ValidationError("potential must start at zero")
        if s[-1] != self.drift:
            raise ValidationError("drift must equal the final potential sample")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "s_values", s)

    def extended(self, periods=2):
        """Samples of S on [0, periods] at the same resolution."""
        n = self.n
        out = np.empty(periods * n + 1)
        for k in range(periods):
            out[k * n:(k + 1) * n] = self.s_values[:n] + k * self.drift
        out[periods * n] = periods * self.drift
        return out


def _simpson_increments(values, n):
    # values sampled at j/(2n): one Simpson cell per grid interval
    h = 1.0 / n
    return (h / 6.0) * (values[0:2 * n:2] + 4.0 * values[1:2 * n:2] + values[2:2 * n + 1:2])


def _field_half_grid(f, n):
    xs = np.arange(2 * n + 1) / (2.0 * n)
    vals = f(xs)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise FieldEvaluationError(f"non-finite field value at x = {xs[bad]:.6g}")
    return vals


def _pl_cumulative(samples, n, clip=None):
    """Exact cumulative integral of the periodic linear interpolant at j/n.

    clip = +1 integrates the positive part, -1 the negative part (as a
    non-negative mass), None the signed function. Exact for every piece,
    including cells where the interpolant crosses zero.
    """
    vals = np.asarray(samples, dtype=float)
    m = len(vals)
    ext = np.concatenate([vals, vals[:1]])
    cuts = np.union1d(np.arange(n + 1) / n, np.arange(m + 1) / m)
    bins = np.zeros(n)
    for p, q in zip(cuts[:-1], cuts[1:]):
        width = q - p
        if width <= 0.0:
            continue
        k = min(int(p * m + 1e-9), m - 1)
        slope = (ext[k + 1] - ext[k]) * m
        u = ext[k] + slope * (p - k / m)
        w = ext[k] + slope * (q - k / m)
        if clip is not None and clip < 0:
            u, w = -u, -w
        if clip is None:
            piece = 0.5 * (u + w) * width
        elif u >= 0.0 and w >= 0.0:
            piece = 0.5 * (u + w) * width
        elif u <= 0.0 and w <= 0.0:
            piece = 0.0
        else:
            theta = u / (u - w)
            if u > 0.0:
                piece = 0.5 * u * theta * width
            else:
                piece = 0.5 * w * (1.0 - theta) * width
        bins[min(int(p * n + 1e-9), n - 1)] += piece
    return np.concatenate([[0.0], np.cumsum(bins)])


def integrate_potential(f, n):
    """Integrate a field into its potential S on an n-point grid.

    Expression and Fourier forms use composite Simpson with mid-cell samples
    (fourth order). Grid forms are integrated exactly as piecewise-linear
    functions.
    """
    n = check_grid_size(n)
    if f.form == "grid":
        s = _pl_cumulative(f.samples, n, clip=None)
        bound = float(np.max(np.abs(f.samples)))
    else:
        vals = _field_half_grid(f, n)
        s = np.concatenate([[0.0], np.cumsum(_simpson_increments(vals, n))])
        bound = float(np.max(np.abs(vals)))
    return SampledPotential(n=n, s_values=s, drift=float(s[-1]), field_bound=bound, field_ref=f)


def cumulative_clipped(f, n, sign=1):
    """Cumulative integral of the positive (sign=+1) or negative (sign=-1)
    part of F at grid points, as a non-negative increasing array."""
    n = check_grid_size(n)
    if f.form == "grid":
        return _pl_cumulative(f.samples, n, clip=sign)
    vals = _field_half_grid(f, n)
    clipped = np.maximum(vals, 0.0) if sign > 0 else np.maximum(-vals, 0.0)
    return np.concatenate([[0.0], np.cumsum(_simpson_increments(clipped, n))])


def positive_mass(f, n):
    """int_0^1 max(F, 0), by the same quadrature family as the potential."""
    return float(cumulative_clipped(f, n, sign=1)[-1])


@dataclass(frozen=True)
class ZeroComponent:
    """One component of {F = 0}: the interval [lo, hi] on the torus.

    lo > hi means the component wraps through 0. Point components found by a
    sign change between samples have lo == hi at the refined root.
    """

    lo: float
    hi: float
    kind: str

    @property
    def midpoint(self):
        if self.hi >= self.lo:
            return 0.5 * (self.lo + self.hi)
        return wrap_unit(0.5 * (self.lo + self.hi + 1.0))

    @property
    def width(self):
        return self.hi - self.lo if self.hi >= self.lo else self.hi - self.lo + 1.0


def component_index_span(comp, n):
    """Grid-vertex index range [start, end] bracketing a component.

    Indices are unwrapped: for a component through 0 the range continues past
    n - 1. A point component between two vertices gets both neighbors.
    """
    start = int(np.floor(comp.lo * n + 1e-9))
    hi = comp.hi if comp.hi >= comp.lo else comp.hi + 1.0
    end = int(np.floor(hi * n + 1e-9))
    if end == start:
        end = start + 1
    return start, end


@dataclass(frozen=True)
class ComponentChain:
    """Alternating chain of stable and totally unstable components.

    stable[i] and stable[i+1] enclose unstable[i] clockwise (the last
    unstable component wraps back to stable[0]). Components classified as
    neither are excluded from the chain but reported.
    """

    stable: tuple
    unstable: tuple
    neither: tuple
    n: int
    tau_zero: float

    @property
    def ell(self):
        return len(self.stable)


def _refine_root(f, lo, hi, f_lo):
    s0 = np.sign(f_lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = f(mid) if mid < 1.0 else f(mid - 1.0)
        if val == 0.0:
            return mid
        if np.sign(val) == s0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _circular_runs(mask):
    n = len(mask)
    if not mask.any():
        return []
    idx = np.flatnonzero(mask)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    runs = np.split(idx, breaks + 1)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
        runs[0] = np.concatenate([runs[-1], runs[0]])
        runs.pop()
    return runs


def find_components(f, n, tau_zero=None, strict=False):
    """Locate and classify the components of {F = 0} at grid resolution 1/n.

    Zero-sample runs (|F| <= tau_zero) become interval components; sign
    changes between adjacent non-zero samples become point components at the
    bisection-refined root. Components closer than 2/n are merged. Signs for
    classification are taken at distance 2/n outside each component.
    """
    n = check_grid_size(n)
    xs = np.arange(n) / n
    vals = f(xs)
    if not np.all(np.isfinite(vals)):
        raise FieldEvaluationError("non-finite field value on the component grid")
    bound = float(np.max(np.abs(vals)))
    tau = 1e-9 * bound if tau_zero is None else float(tau_zero)
    if bound <= tau:
        comp = ZeroComponent(0.0, (n - 1) / n, "neither")
        if strict:
            raise ClassificationAmbiguous("field vanishes identically at grid resolution")
        return ComponentChain((), (), (comp,), n, tau)

    zero = np.abs(vals) <= tau
    intervals = [(run[0] / n, run[-1] / n) for run in _circular_runs(zero)]
    for i in range(n):
        j = (i + 1) % n
        if zero[i] or zero[j]:
            continue
        if np.sign(vals[i]) != np.sign(vals[j]):
            root = wrap_unit(_refine_root(f, i / n, (i + 1) / n, vals[i]))
            intervals.append((root, root))

    intervals.sort(key=lambda iv: iv[0])
    intervals = _merge_close(intervals, 2.0 / n)

    stable, unstable, neither = [], [], []
    for lo, hi in intervals:
        left = f(wrap_unit(lo - 2.0 / n))
        right = f(wrap_unit(hi + 2.0 / n))
        if left < -tau and right > tau:
            kind = "stable"
        elif left > tau and right < -tau:
            kind = "unstable"
        else:
            kind = "neither"
        comp = ZeroComponent(lo, hi, kind)
        {"stable": stable, "unstable": unstable, "neither": neither}[kind].append(comp)

    if strict and neither:
        raise ClassificationAmbiguous(
            f"{len(neither)} component(s) are neither stable nor totally unstable")

    stable.sort(key=lambda c: c.midpoint)
    unstable.sort(key=lambda c: c.midpoint)
    if stable:
        if len(unstable) != len(stable):
            raise ClassificationAmbiguous(
                f"{len(stable)} stable but {len(unstable)} unstable components")
        if unstable[0].midpoint < stable[0].midpoint:
            unstable = unstable[1:] + unstable[:1]
        order = []
        for s, u in zip(stable, unstable):
            order.extend([s.midpoint, wrap_unit(u.midpoint - stable[0].midpoint) + stable[0].midpoint])
        if any(b <= a for a, b in zip(order, order[1:])):
            raise ClassificationAmbiguous("stable and unstable components do not alternate")
    elif unstable:
        raise ClassificationAmbiguous("unstable components without stable ones")

    return ComponentChain(tuple(stable), tuple(unstable), tuple(neither), n, tau)


def _merge_close(intervals, gap):
    """Merge components whose circular separation is below `gap`.

    Works in unwrapped coordinates (each arc is [lo, hi] with hi possibly
    above 1 for components passing through zero) and re-wraps at the end.
    """
    if len(intervals) <= 1:
        return intervals
    arcs = [(lo, hi if hi >= lo else hi + 1.0) for lo, hi in sorted(intervals)]
    changed = True
    while changed and len(arcs) > 1:
        changed = False
        for i in range(len(arcs)):
            j = (i + 1) % len(arcs)
            lo_a, hi_a = arcs[i]
            lo_b, hi_b = arcs[j]
            if wrap_unit(lo_b - hi_a) < gap:
                while hi_b < hi_a:
                    hi_b += 1.0
                arcs[i] = (lo_a, max(hi_a, hi_b))
                arcs.pop(j)
                changed = True
                break
    return [(lo, hi if hi < 1.0 else hi - 1.0) for lo, hi in arcs]
