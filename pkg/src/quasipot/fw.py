"""Freidlin-Wentzell weights on the chain of stable components.

The stable components K_0 < K_1 < ... of {F = 0} form a cycle. An arrow
m -> n costs V(K_m, K_n), the cheaper of moving clockwise (paying the uphill
mass V+) or anticlockwise (paying V-). The weight W(K_i) is the minimum total
cost over directed trees rooted at i; W(x) extends it to every point by
adding the cost of reaching x from the best component.

Two independent solvers are provided. The brute-force one enumerates every
parent map and is the test oracle. The fast one uses the reduction to comb
trees: cutting the cycle at the barrier A_j leaves everything left of the cut
flowing clockwise into the root and everything right of it anticlockwise,
with cost t(i, j) = V-(K_j, K_i) + V+(K_{j+1}, K_i), and the optimal cut J
sits at the barrier realizing the unit-window maximum of S seen from K_i.

Discretization: all costs come from the positive/negative variation of the
sampled potential, and component representatives are snapped to the grid
vertex minimizing (stable) or maximizing (unstable) S over the component.
This makes every identity of the continuum theory hold for the piecewise
linear interpolant exactly, so the cross-checks against the window-maximum
transform close to rounding error instead of quadrature error.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (CaseClassificationFailed, TooManyComponents, ValidationError)
from .fields import (component_index_span, find_components, integrate_potential,
                     positive_mass)
from .maxwell import sliding_window_max
from .validation import wrap_unit

_BRUTE_CAP = 8


@dataclass(frozen=True)
class RootedTree:
    """Directed tree on vertices {0..ell-1} rooted at root.

    parent maps every non-root vertex to the target of its unique outgoing
    arrow; the root has none. validate() checks exactly that: one arrow out
    of each non-root vertex, none out of the root, and every vertex reaches
    the root (no cycles).
    """

    ell: int
    root: int
    parent: dict

    def arrows(self):
        return sorted(self.parent.items())

    def validate(self):
        verts = set(range(self.ell))
        if self.root not in verts:
            raise ValidationError(f"root {self.root} outside 0..{self.ell - 1}")
        if set(self.parent) != verts - {self.root}:
            raise ValidationError("parent map must cover exactly the non-root vertices")
        if any(p not in verts for p in self.parent.values()):
            raise ValidationError("arrow target outside the vertex set")
        for v in self.parent:
            seen = set()
            while v != self.root:
                if v in seen:
                    raise ValidationError("parent map contains a cycle")
                seen.add(v)
                v = self.parent[v]
        return self

    def to_dict(self):
        return {"ell": self.ell, "root": self.root,
                "arrows": [[m, n] for m, n in self.arrows()]}


def comb_tree(ell, root, cut):
    """The comb g_{root,cut}: vertices within (cut - root) mod ell steps
    clockwise of the root point anticlockwise, the rest clockwise."""
    span = (cut - root) % ell
    parent = {}
    for v in range(ell):
        if v == root:
            continue
        d = (v - root) % ell
        parent[v] = (v - 1) % ell if d <= span else (v + 1) % ell
    return RootedTree(ell, root, parent).validate()


class _Problem:
    """Shared discrete context: representatives, variations, window maxima."""

    def __init__(self, S, chain):
        self.S = S
        self.chain = chain
        n = S.n
        self.n = n
        ext = S.extended(2)
        self.ext = ext
        d = np.diff(S.s_values)
        self.pv = np.concatenate([[0.0], np.cumsum(np.maximum(d, 0.0))])
        self.nv = np.concatenate([[0.0], np.cumsum(np.maximum(-d, 0.0))])
        self.windowmax = sliding_window_max(ext, n + 1)
        self.scale = float(np.max(np.abs(S.s_values))) + abs(S.drift) + S.field_bound
        self.stable_idx = np.array([self._rep(c, np.argmin) for c in chain.stable], dtype=int)
        self.unstable_idx = np.array([self._rep(c, np.argmax) for c in chain.unstable], dtype=int)

    def _rep(self, comp, pick):
        start, end = component_index_span(comp, self.n)
        return (start + int(pick(self.ext[start:end + 1]))) % self.n

    def arc_pv(self, u, v):
        """Uphill mass clockwise from vertex u to vertex v (0 if u == v)."""
        pv = self.pv
        out = pv[v] - pv[u]
        return out if v >= u else out + pv[self.n]

    def arc_nv(self, u, v):
        nv = self.nv
        out = nv[v] - nv[u]
        return out if v >= u else out + nv[self.n]

    def pair_cost(self, m, nn):
        """V(K_m, K_nn) = min(clockwise uphill, anticlockwise downhill)."""
        if m == nn:
            return 0.0
        u, v = self.stable_idx[m], self.stable_idx[nn]
        return min(self.arc_pv(u, v), self.arc_nv(v, u))

    def t_cost(self, i, j):
        ell = self.chain.ell
        si = self.stable_idx[i]
        sj = self.stable_idx[j]
        sj1 = self.stable_idx[(j + 1) % ell]
        left = 0.0 if j == i else self.arc_nv(si, sj)
        right = 0.0 if (j + 1) % ell == i else self.arc_pv(sj1, si)
        return left + right

    def netti_cut(self, i):
        """Barrier label whose peak realizes the window max seen from K_i;
        smallest label among ties."""
        si = self.stable_idx[i]
        E = self.S.s_values
        drift = self.S.drift
        best_j, best_v = 0, -np.inf
        for j, aj in enumerate(self.unstable_idx):
            v = E[aj] + drift if aj < si else E[aj]
            if v > best_v:
                best_j, best_v = j, v
        return best_j


def _problem(S, chain):
    if chain is None:
        if S.field_ref is None:
            raise ValidationError("need a component chain or a field reference")
        chain = find_components(S.field_ref, S.n)
    return _Problem(S, chain), chain


def w_stable_bruteforce(S, chain, root):
    """Minimum arrow-cost sum over all rooted trees, by full enumeration.

    This is the oracle for the fast solver; it grows as (ell-1)^(ell-1).
    """
    prob, chain = _problem(S, chain)
    ell = chain.ell
    if ell > _BRUTE_CAP:
        raise TooManyComponents(
            f"brute-force enumeration capped at {_BRUTE_CAP} components, got {ell}")
    if ell <= 1:
        return 0.0, RootedTree(max(ell, 1), root, {}).validate()
    cost = [[prob.pair_cost(m, nn) for nn in range(ell)] for m in range(ell)]
    verts = [v for v in range(ell) if v != root]
    choices = [[p for p in range(ell) if p != v] for v in verts]
    best_val, best_parent = np.inf, None
    for combo in itertools.product(*choices):
        parent = dict(zip(verts, combo))
        reaches = True
        for v in verts:
            seen = set()
            cur = v
            while cur != root and reaches:
                if cur in seen:
                    reaches = False
                seen.add(cur)
                cur = parent[cur]
        if not reaches:
            continue
        total = sum(cost[m][parent[m]] for m in verts)
        if total < best_val:
            best_val, best_parent = total, parent
    return float(best_val), RootedTree(ell, root, best_parent).validate()


def w_stable_fast(S, chain, root):
    """min_j t(root, j) together with the cut J given by the barrier whose
    peak realizes the unit-window maximum of S from K_root."""
    prob, chain = _problem(S, chain)
    ell = chain.ell
    if ell < 1:
        raise ValidationError("fast solver needs at least one stable component")
    if ell == 1:
        return 0.0, 0
    t_all = [prob.t_cost(root, j) for j in range(ell)]
    return float(min(t_all)), prob.netti_cut(root)


def v_costs(S, x, y):
    """(V+, V-, V, delta_S) between torus points by adaptive quadrature.

    V+ integrates the uphill mass max(F, 0) along the clockwise path x -> y,
    V- the downhill mass max(-F, 0) along the anticlockwise path, delta_S the
    signed increment along the clockwise path. x == y gives all zeros.
    """
    f = S.field_ref
    if f is None:
        raise ValidationError("point costs need a field reference on the potential")
    x = float(wrap_unit(x))
    y = float(wrap_unit(y))
    if x == y:
        return 0.0, 0.0, 0.0, 0.0
    up_hi = y if y > x else y + 1.0
    dn_hi = x if x > y else x + 1.0
    vp = quad(lambda s: max(f(s), 0.0), x, up_hi, limit=200)[0]
    vm = quad(lambda s: max(-f(s), 0.0), y, dn_hi, limit=200)[0]
    ds = quad(lambda s: f(s), x, up_hi, limit=200)[0]
    return float(vp), float(vm), float(min(vp, vm)), float(ds)


@dataclass(frozen=True)
class FwSolution:
    """Weights on components and on the grid, with the case bookkeeping."""

    n: int
    ell: int
    w_stable: np.ndarray
    j_per_root: tuple
    w_curve: np.ndarray
    case_labels: tuple
    neighbors: tuple
    windowmax: np.ndarray = field(repr=False)
    chain: object = field(repr=False)
    potential: object = field(repr=False)

    def to_dict(self):
        return {
            "n": self.n,
            "ell": self.ell,
            "w_stable": [float(v) for v in self.w_stable],
            "J_per_root": list(self.j_per_root),
            "cases": dict(Counter(self.case_labels[:self.n])),
        }


def solve(f, n, chain=None, tau_zero=None):
    """Full solve: weights at every stable component and on the whole grid."""
    S = integrate_potential(f, n)
    if chain is None:
        chain = find_components(f, n, tau_zero=tau_zero)
    ell = chain.ell
    if ell == 0:
        zeros = np.zeros(n + 1)
        return FwSolution(n=n, ell=0, w_stable=np.zeros(0), j_per_root=(),
                          w_curve=zeros, case_labels=("none",) * (n + 1),
                          neighbors=((),) * (n + 1),
                          windowmax=sliding_window_max(S.extended(2), n + 1),
                          chain=chain, potential=S)
    prob = _Problem(S, chain)
    w_st = np.empty(ell)
    cuts = []
    for i in range(ell):
        if ell == 1:
            w_st[i] = 0.0
            cuts.append(0)
            continue
        t_all = [prob.t_cost(i, j) for j in range(ell)]
        w_st[i] = min(t_all)
        cuts.append(prob.netti_cut(i))
    curve, labels, neigh = _grid_curve(prob, w_st)
    return FwSolution(n=n, ell=ell, w_stable=w_st, j_per_root=tuple(cuts),
                      w_curve=curve, case_labels=labels, neighbors=neigh,
                      windowmax=prob.windowmax, chain=chain, potential=S)


def _membership(chain, n):
    """(owner, basin): owner[k] = stable component containing vertex k or -1;
    basin[k] = stable component whose arc (K_i, K_{i+1}) holds vertex k."""
    owner = np.full(n, -1)
    pos = np.arange(n) / n
    for i, comp in enumerate(chain.stable):
        if comp.hi >= comp.lo:
            inside = (pos >= comp.lo - 1e-12) & (pos <= comp.hi + 1e-12)
        else:
            inside = (pos >= comp.lo - 1e-12) | (pos <= comp.hi + 1e-12)
        owner[inside] = i
    his = np.array([c.hi for c in chain.stable])
    order = np.argsort(his)
    pts = his[order]
    slot = np.searchsorted(pts, pos, side="right") - 1
    basin = order[slot]  # slot -1 wraps to the last breakpoint
    return owner, basin


def _grid_curve(prob, w_st):
    n = prob.n
    chain = prob.chain
    ell = chain.ell
    E = prob.S.s_values[:n]
    drift = prob.S.drift
    pv, nv = prob.pv, prob.nv
    wmax = prob.windowmax
    s_idx = prob.stable_idx
    owner, basin = _membership(chain, n)
    k = np.arange(n)

    full = np.full(n, np.inf)
    for r in range(ell):
        sr = s_idx[r]
        up = pv[k] - pv[sr] + np.where(k < sr, pv[n], 0.0)
        dn = nv[sr] - nv[k] + np.where(sr < k, nv[n], 0.0)
        full = np.minimum(full, w_st[r] + np.minimum(up, dn))

    si = s_idx[basin]
    ip1 = (basin + 1) % ell
    si1 = s_idx[ip1]
    m_i = wmax[si]
    m_x = wmax[k] + np.where(k < si, drift, 0.0)
    m_n = wmax[si1] + np.where(si1 <= si, drift, 0.0)
    tau_eq = 1e-9 * (1.0 + prob.scale)

    hi_k = np.array([c.hi for c in chain.stable])[basin]
    hi_a = np.array([c.hi for c in chain.unstable])[basin]
    lo_a = np.array([c.lo for c in chain.unstable])[basin]
    rel_x = wrap_unit(k / n - hi_k)
    left = rel_x <= wrap_unit(hi_a - hi_k) + 1e-12
    right = rel_x >= wrap_unit(lo_a - hi_k) - 1e-12

    eq_i = np.abs(m_i - m_x) <= tau_eq
    eq_n = np.abs(m_n - m_x) <= tau_eq
    case = np.where(left & eq_i, 1,
                    np.where(left & ~eq_i, 2,
                             np.where(right & eq_n, 3, 4)))

    via_i = w_st[basin] + pv[k] - pv[si] + np.where(k < si, pv[n], 0.0)
    via_n = w_st[ip1] + nv[si1] - nv[k] + np.where(si1 < k, nv[n], 0.0)
    shortcut = np.where((case == 1) | (case == 4), via_i, via_n)

    free = owner < 0
    gap = np.abs(shortcut - full)[free]
    tol = 1e-8 * (1.0 + prob.scale)
    if gap.size and np.max(gap) > tol:
        worst = int(np.flatnonzero(free)[np.argmax(gap)])
        raise CaseClassificationFailed(
            f"case shortcut misses the full minimum by {np.max(gap):.3e} "
            f"at x = {worst}/{n}; the grid may be too coarse")

    curve = np.where(free, full, w_st[np.maximum(owner, 0)])
    labels = []
    neigh = []
    for kk in range(n):
        if not free[kk]:
            labels.append("component")
            neigh.append(((int(owner[kk]), "="),))
            continue
        labels.append(str(int(case[kk])))
        prim = (int(basin[kk]), "+") if case[kk] in (1, 4) else (int(ip1[kk]), "-")
        alt = (int(ip1[kk]), "-") if case[kk] in (1, 4) else (int(basin[kk]), "+")
        alt_val = via_n[kk] if case[kk] in (1, 4) else via_i[kk]
        if abs(alt_val - full[kk]) <= tau_eq:
            neigh.append((prim, alt))
        else:
            neigh.append((prim,))
    curve_full = np.concatenate([curve, [curve[0]]])
    labels.append(labels[0])
    neigh.append(neigh[0])
    return curve_full, tuple(labels), tuple(neigh)


def w_point(S, chain, w_stable, x):
    """W at one point: full minimum over components, cross-checked against
    the case classification shortcut.

    Returns (value, case label, realizing neighbors). Neighbors are (index,
    sign) pairs; two entries mean both directions realize the minimum within
    tolerance.
    """
    ell = chain.ell
    if ell < 1:
        raise ValidationError("point weights need at least one stable component")
    x = float(wrap_unit(x))
    prob = _Problem(S, chain)
    n = prob.n

    for i, comp in enumerate(chain.stable):
        if _contains(comp, x):
            return float(w_stable[i]), "component", ((i, "="),)

    reps = prob.stable_idx / n
    full = np.inf
    best = None
    per_comp = []
    for r in range(ell):
        vp, vm, v, _ = v_costs(S, reps[r], x)
        cand = w_stable[r] + v
        per_comp.append((cand, vp, vm))
        if cand < full:
            full, best = cand, r

    i = _basin_of(chain, x)
    ip1 = (i + 1) % ell
    tau_eq = 1e-9 * (1.0 + prob.scale)
    m_i = prob.windowmax[prob.stable_idx[i]]
    m_n = prob.windowmax[prob.stable_idx[ip1]] + (
        prob.S.drift if prob.stable_idx[ip1] <= prob.stable_idx[i] else 0.0)
    m_x = _window_max_at(prob, x if x > reps[i] else x + 1.0)

    hi_k = chain.stable[i].hi
    left = wrap_unit(x - hi_k) <= wrap_unit(chain.unstable[i].hi - hi_k) + 1e-12
    if left and abs(m_i - m_x) <= tau_eq:
        case, short = "1", w_stable[i] + per_comp[i][1]
        prim, alt = (i, "+"), (ip1, "-")
        alt_val = w_stable[ip1] + per_comp[ip1][2]
    elif left:
        case, short = "2", w_stable[ip1] + per_comp[ip1][2]
        prim, alt = (ip1, "-"), (i, "+")
        alt_val = w_stable[i] + per_comp[i][1]
    elif abs(m_n - m_x) <= tau_eq:
        case, short = "3", w_stable[ip1] + per_comp[ip1][2]
        prim, alt = (ip1, "-"), (i, "+")
        alt_val = w_stable[i] + per_comp[i][1]
    else:
        case, short = "4", w_stable[i] + per_comp[i][1]
        prim, alt = (i, "+"), (ip1, "-")
        alt_val = w_stable[ip1] + per_comp[ip1][2]

    if abs(short - full) > 1e-8 * (1.0 + prob.scale):
        raise CaseClassificationFailed(
            f"case ({case}) shortcut {short:.9e} misses the full minimum "
            f"{full:.9e} at x = {x:.9g}")
    neighbors = (prim, alt) if abs(alt_val - full) <= tau_eq else (prim,)
    return float(full), case, neighbors


def _contains(comp, x):
    if comp.hi >= comp.lo:
        return comp.lo - 1e-12 <= x <= comp.hi + 1e-12
    return x >= comp.lo - 1e-12 or x <= comp.hi + 1e-12


def _basin_of(chain, x):
    best, best_rel = 0, np.inf
    for i, comp in enumerate(chain.stable):
        rel = wrap_unit(x - comp.hi)
        if rel < best_rel:
            best, best_rel = i, rel
    return best


def _window_max_at(prob, xbar):
    """max of S over grid vertices in [xbar, xbar + 1], lifted xbar in [0, 2).

    Deliberately vertex-only so that comparisons against the anchored window
    maxima are exact whenever the same peak vertex dominates both windows.
    """
    n = prob.n
    ext3 = prob.S.extended(3)
    lo = int(np.ceil(xbar * n - 1e-9))
    hi = int(np.floor((xbar + 1.0) * n + 1e-9))
    return float(np.max(ext3[lo:hi + 1]))


def check_identities(S, phi, fw_solution):
    """Report the two cross-identities tying W to the transform of S.

    The sum W(x) + (window max of S from x) - S(x) should be the constant
    int_0^1 max(F, 0); and W - min W should equal Phi - min Phi. Returns a
    dict report; nothing is asserted here.
    """
    if phi.n != fw_solution.n:
        raise ValidationError("transform and weights live on different grids")
    n = fw_solution.n
    E = S.s_values
    expr = fw_solution.w_curve + (fw_solution.windowmax - E)
    if S.field_ref is not None:
        ref = positive_mass(S.field_ref, n)
    else:
        d = np.diff(S.s_values)
        ref = float(np.sum(np.maximum(d, 0.0)))
    a = fw_solution.w_curve - np.min(fw_solution.w_curve)
    b = phi.phi_values - np.min(phi.phi_values)
    return {
        "n": n,
        "ell": fw_solution.ell,
        "pisolo_constant": float(np.mean(expr)),
        "pisolo_gap": float(np.max(np.abs(expr - ref))),
        "equivalence_gap": float(np.max(np.abs(a - b))),
        "cases": dict(Counter(fw_solution.case_labels[:n])),
    }
