"""Acceptance gate: eight headline checks with frozen tolerances.

Every test prints a single summary line (run with -s to see them all on
a green suite) and then asserts. Wall-clock budgets are generous upper
bounds; the measured runtimes sit far below them on any recent machine.
"""

import time

import numpy as np

from conftest import CORPUS_SEEDS, DOUBLE, SIN, TILTED, corpus, \
    multiwell, random_three_mode
from quasipot import (FieldSpec, PdmpSpec, builtin_hamiltonians,
                      check_identities, check_viscosity, comb_tree,
                      diffusion_density, find_components, integrate_potential,
                      pdmp_density, phi_direct, phi_constructive,
                      rate_convergence, scaled_field, simulate_diffusion,
                      simulate_pdmp, solve, tv_distance, w_stable_bruteforce,
                      w_stable_fast)


def report(num, ok, detail):
    line = "[criterion %d] %s: %s" % (num, "PASS" if ok else "FAIL", detail)
    print(line)
    assert ok, line


def test_criterion_1_transform_routes_agree():
    fields = [FieldSpec.expression(t) for t in (SIN, TILTED, DOUBLE)]
    fields += [random_three_mode(s) for s in CORPUS_SEEDS]
    t0 = time.perf_counter()
    worst = 0.0
    for f in fields:
        S = integrate_potential(f, 4096)
        gap = np.max(np.abs(phi_direct(S).phi_values
                            - phi_constructive(S).phi_values))
        worst = max(worst, float(gap))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    report(1, ok, "sup gap %.3e over %d fields at n=4096 in %.3fs"
           % (worst, len(fields), elapsed))


def test_criterion_2_tree_reduction_matches_enumeration():
    t0 = time.perf_counter()
    worst = 0.0
    problems = 0
    shapes_ok = True
    for ell in range(2, 7):
        for seed in range(4):
            f = multiwell(ell, seed)
            S = integrate_potential(f, 1024)
            ch = find_components(f, 1024)
            shapes_ok = shapes_ok and ch.ell == ell
            combs = [[comb_tree(ell, root, cut).to_dict()["arrows"]
                      for cut in range(ell)] for root in range(ell)]
            for root in range(ell):
                fast, _ = w_stable_fast(S, ch, root)
                brute, btree = w_stable_bruteforce(S, ch, root)
                worst = max(worst, abs(fast - brute))
                shapes_ok = shapes_ok and \
                    btree.to_dict()["arrows"] in combs[root]
                problems += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and shapes_ok and elapsed < 30.0
    report(2, ok, "|fast - brute| <= %.3e over %d rooted problems, "
           "minimizers comb shaped: %s, %.2fs"
           % (worst, problems, shapes_ok, elapsed))


def test_criterion_3_constant_and_equivalence_identities():
    worst_eq = 0.0
    worst_const = 0.0
    sine_const = None
    for i, f in enumerate(corpus()):
        S = integrate_potential(f, 4096)
        ident = check_identities(S, phi_direct(S), solve(f, 4096))
        worst_eq = max(worst_eq, ident["equivalence_gap"])
        worst_const = max(worst_const, ident["pisolo_gap"])
        if i == 0:
            sine_const = ident["pisolo_constant"]
    sine_gap = abs(sine_const - 1.0 / np.pi)
    ok = worst_eq <= 1e-6 and worst_const <= 1e-6 and sine_gap <= 1e-6
    report(3, ok, "equivalence gap %.3e, constant gap %.3e, "
           "sine constant off 1/pi by %.3e" % (worst_eq, worst_const,
                                               sine_gap))


def test_criterion_4_diffusion_rate_convergence():
    F = FieldSpec.expression("sin(2*pi*x)+0.3")
    t0 = time.perf_counter()
    qp = phi_direct(integrate_potential(F, 1024))
    out = rate_convergence(scaled_field(F, -0.5),
                           [0.4, 0.3, 0.2, 0.15, 0.1], qp)
    elapsed = time.perf_counter() - t0
    gaps = [g for _, g in out["rows"]]
    frozen = [0.1237, 0.1072, 0.0718, 0.0485, 0.0259]
    ok = (out["monotone_decreasing"]
          and all(b < a for a, b in zip(gaps, gaps[1:]))
          and gaps[-1] <= 0.15
          and max(abs(g - e) for g, e in zip(gaps, frozen)) <= 1e-3
          and elapsed < 10.0)
    report(4, ok, "eps sweep gaps %s in %.2fs"
           % (", ".join("%.4f" % g for g in gaps), elapsed))


def test_criterion_5_transport_rate_convergence():
    spec = PdmpSpec("1", "-1", "1 + 0.5*sin(2*pi*x)^2", "1")
    qp = phi_direct(integrate_potential(spec.potential_field, 1024))
    target = (qp.phi_values - qp.phi_values.min())[:1024]
    gaps = [float(np.max(np.abs(pdmp_density(spec, lam, 1024).rate - target)))
            for lam in (20.0, 50.0, 100.0)]
    frozen = [0.0330, 0.0259, 0.0179]
    ok = (all(b < a for a, b in zip(gaps, gaps[1:]))
          and gaps[-1] <= 0.15
          and max(abs(g - e) for g, e in zip(gaps, frozen)) <= 1e-3)
    report(5, ok, "lam sweep gaps %s"
           % ", ".join("%.4f" % g for g in gaps))


def test_criterion_6_monte_carlo_histograms():
    b = scaled_field(FieldSpec.expression(SIN), -0.5)
    t0 = time.perf_counter()
    hist = simulate_diffusion(b, 0.3, 2000.0, dt=1e-3, seed=0, bins=50)
    tv_diff = tv_distance(hist, diffusion_density(b, 0.3, 1024))
    e_diff = time.perf_counter() - t0
    spec = PdmpSpec("1", "-1", "1", "1")
    t0 = time.perf_counter()
    hist2 = simulate_pdmp(spec, 50.0, 2000.0, seed=0, bins=50)
    tv_pdmp = tv_distance(hist2, pdmp_density(spec, 50.0, 1024))
    e_pdmp = time.perf_counter() - t0
    ok = (tv_diff <= 0.05 and tv_pdmp <= 0.05
          and abs(tv_diff - 0.0128) <= 5e-3 and abs(tv_pdmp - 0.0307) <= 5e-3
          and e_diff < 60.0 and e_pdmp < 60.0)
    report(6, ok, "TV diffusion %.4f (%.1fs), TV transport %.4f (%.1fs)"
           % (tv_diff, e_diff, tv_pdmp, e_pdmp))


def test_criterion_7_viscosity_verifier():
    passes_ok = True
    worst_ratio = 0.0
    for f in corpus():
        qp = phi_direct(integrate_potential(f, 4096))
        for ham in builtin_hamiltonians(f):
            rep = check_viscosity(qp, ham)
            passes_ok = passes_ok and rep.verdict
            ratio = max(np.nanmax(rep.sub_margins),
                        np.nanmax(rep.sup_margins)) / rep.tau
            worst_ratio = max(worst_ratio, float(ratio))

    # three wrong candidates on the tilted field must be flagged hard
    f = FieldSpec.expression(TILTED)
    qp = phi_direct(integrate_potential(f, 4096))
    xs = np.arange(qp.n + 1) / qp.n
    rate = qp.phi_values - qp.phi_values.min()
    controls = {
        "reversible-shape": (1.0 - np.cos(2.0 * np.pi * xs)) / (2.0 * np.pi),
        "half-rate": 0.5 * rate,
        "negated": -rate,
    }
    controls_ok = True
    least_excess = np.inf
    for ham in builtin_hamiltonians(f):
        for cand in controls.values():
            rep = check_viscosity(cand, ham)
            worst = max(v["margin"] for v in rep.violations) \
                if rep.violations else 0.0
            controls_ok = controls_ok and not rep.verdict \
                and worst >= 10.0 * rep.tau
            least_excess = min(least_excess, worst / rep.tau)
    ok = passes_ok and controls_ok
    report(7, ok, "corpus margins <= %.3f tau, all verdicts %s; "
           "controls flagged at >= %.0f tau"
           % (worst_ratio, passes_ok, least_excess))


def test_criterion_8_structural_invariants():
    periodic_ok = True
    value_gap = 0.0
    lipschitz_ok = True
    for f in corpus():
        S = integrate_potential(f, 4096)
        qp = phi_direct(S)
        xs = np.arange(4097) / 4096
        bound = float(np.max(np.abs(f(xs))))
        periodic_ok = periodic_ok and \
            qp.phi_values[0] == qp.phi_values[-1]
        value_gap = max(value_gap, abs(float(qp.phi_values.max())
                                       - min(0.0, -S.drift)))
        slopes = np.abs(np.diff(qp.phi_values)) * 4096
        lipschitz_ok = lipschitz_ok and np.max(slopes) <= 2.0 * bound + 1e-9

    # reversible fields: the transform is the anchored potential and the
    # flat set is one interval per global maximum of S
    reversible_gap = 0.0
    flats = []
    for text in (SIN, DOUBLE):
        S = integrate_potential(FieldSpec.expression(text), 4096)
        qp = phi_direct(S)
        reversible_gap = max(reversible_gap, float(np.max(np.abs(
            qp.phi_values - (S.s_values - S.s_values.max())))))
        flats.append(len(qp.flat_intervals))
    ok = (periodic_ok and value_gap <= 1e-12 and lipschitz_ok
          and reversible_gap <= 1e-12 and flats == [1, 2])
    report(8, ok, "periodic %s, max-value gap %.1e, Lipschitz bound %s, "
           "reversible gap %.1e, flat counts %s"
           % (periodic_ok, value_gap, lipschitz_ok, reversible_gap, flats))
