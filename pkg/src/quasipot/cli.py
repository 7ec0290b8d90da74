"""Command-line front-end.

Every subcommand resolves its flags into a plain configuration dict, runs
the corresponding pipeline, and writes its artifacts under --out together
with manifest.json holding that dict. `pipeline --config out/manifest.json`
replays a recorded run and reproduces the CSV outputs byte-for-byte. CSV
floats carry 17 significant digits; nothing is written outside --out.

Exit codes: 0 success, 2 malformed input (bad flag, bad spec, unreadable
file), 3 failed numerical cross-check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import densities, fw, maxwell, simulate, svgplot, viscosity
from .densities import PdmpSpec
from .errors import (FieldEvaluationError, NumericalCheckError, ParseError,
                     TooManyComponents, ValidationError, VelocityVanishes)
from .fields import (FieldSpec, as_field, find_components,
                     integrate_potential, scaled_field)

try:
    from importlib.metadata import version as _dist_version
    _VERSION = _dist_version("quasipot")
except Exception:
    _VERSION = "0.1.0"


def _fmt(v):
    return f"{float(v):.17g}"


# ---------------------------------------------------------------- ingestion

def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(
            f"cannot read {path}: {exc.strerror or exc}") from None


def field_spec_from_arg(text):
    """--field accepts expression text, inline JSON, or @file."""
    if text.startswith("@"):
        text = _read_text(text[1:])
    return as_field(text)


def pdmp_spec_from_arg(text):
    """--pdmp accepts inline JSON or @file with keys f0, f1, r01, r10."""
    if text.startswith("@"):
        text = _read_text(text[1:])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad process spec JSON: {exc}") from None
    if not isinstance(data, dict) or any(
            k not in data for k in ("f0", "f1", "r01", "r10")):
        raise ValidationError("process spec needs keys f0, f1, r01, r10")
    return PdmpSpec.from_dict(data)


def _float_list(name, text):
    out = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(float(token))
        except ValueError:
            raise ValidationError(f"{name}: {token!r} is not a number") from None
    if not out:
        raise ValidationError(f"{name}: empty list")
    return out


def _decreasing(values, name):
    out = sorted(set(values), reverse=True)
    if len(out) != len(values):
        raise ValidationError(f"{name}: values must be distinct")
    return out


def _thread_count(cfg):
    t = cfg.get("threads")
    if t in (None, 0):
        t = os.environ.get("QUASIPOT_THREADS", "1")
    try:
        t = int(t)
    except (TypeError, ValueError):
        raise ValidationError(f"--threads must be an integer, got {t!r}") from None
    if t < 1:
        raise ValidationError("--threads must be >= 1")
    return t


def _map_threaded(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------- artifacts

def _outdir(cfg):
    path = cfg.get("out") or "out"
    os.makedirs(path, exist_ok=True)
    return path


def _write_csv(out, name, header, columns):
    rows = list(zip(*columns))
    with open(os.path.join(out, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                cell if isinstance(cell, str) else _fmt(cell)
                for cell in row) + "\n")
    return name


def _write_json(out, name, obj):
    with open(os.path.join(out, name), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return name


def _manifest(out, command, cfg):
    return _write_json(out, "manifest.json", {
        "tool": "quasipot", "version": _VERSION,
        "command": command, "config": cfg})


def _finish_run(out, command, cfg, artifacts):
    artifacts.append(_manifest(out, command, cfg))
    print("wrote " + " ".join(os.path.join(out, a) for a in artifacts))


def _chain_dict(chain):
    def one(c):
        return {"lo": c.lo, "hi": c.hi, "kind": c.kind}
    return {"ell": chain.ell,
            "stable": [one(c) for c in chain.stable],
            "unstable": [one(c) for c in chain.unstable],
            "neither": [one(c) for c in chain.neither],
            "tau_zero": chain.tau_zero}


def _neighbor_text(entry):
    return ";".join(f"{idx}{sym}" for idx, sym in entry)


def _bin_average(curve, bins):
    vals = curve.density
    which = np.minimum((curve.grid * bins).astype(int), bins - 1)
    ref = np.bincount(which, weights=vals, minlength=bins)
    return ref / np.bincount(which, minlength=bins)


# ---------------------------------------------------------------- handlers

def _run_phi(cfg):
    out = _outdir(cfg)
    f = FieldSpec.from_dict(cfg["field"])
    n, method = int(cfg["n"]), cfg["method"]
    tau_flat = cfg.get("tau_flat")
    S = integrate_potential(f, n)
    chain = find_components(f, n)

    route_gap = None
    if method == "both":
        direct = maxwell.phi_direct(S, tau_flat=tau_flat)
        qp = maxwell.phi_constructive(S, chain=chain, tau_flat=tau_flat)
        route_gap = float(np.max(np.abs(direct.phi_values - qp.phi_values)))
        tol = 1e-8 * (1.0 + float(np.max(np.abs(S.s_values))))
        if route_gap > tol:
            raise NumericalCheckError(
                f"transform routes disagree: sup-gap {route_gap:.3e} > {tol:.3e}")
    elif method == "direct":
        qp = maxwell.phi_direct(S, tau_flat=tau_flat)
    elif method == "constructive":
        qp = maxwell.phi_constructive(S, chain=chain, tau_flat=tau_flat)
    else:
        qp = maxwell.phi_tilde(f, n, tau_flat=tau_flat)

    xs = np.arange(n + 1) / n
    phi = qp.phi_values
    trace = qp.trace.to_dict() if qp.trace is not None \
        else {"b": None, "levels": [], "z": [], "y": []}
    artifacts = [
        _write_csv(out, "phi.csv", ["x", "S", "Phi", "is_flat"],
                   [xs, S.s_values, phi, qp.flat_mask.astype(int)]),
        _write_json(out, "trace.json", {
            **trace,
            "method": qp.method, "n": n, "drift": qp.drift,
            "flat_level": qp.flat_level, "tau_flat": qp.tau_flat,
            "under_resolved": qp.under_resolved, "route_gap": route_gap,
            "flat_intervals": [list(iv) for iv in qp.flat_intervals],
            "chain": _chain_dict(chain)}),
    ]
    if cfg.get("plot"):
        svgplot.emit_plot(
            [("potential S", xs, S.s_values), ("transform", xs, phi)],
            os.path.join(out, "phi.svg"),
            shaded=qp.flat_intervals, title=f"potential and transform, n={n}")
        artifacts.append("phi.svg")
    _finish_run(out, "phi", cfg, artifacts)
    return 0


def _run_fw(cfg):
    out = _outdir(cfg)
    f = FieldSpec.from_dict(cfg["field"])
    n = int(cfg["n"])
    chain = find_components(f, n, tau_zero=cfg.get("tau_zero"))
    sol = fw.solve(f, n, chain=chain)
    S = sol.potential
    qp = maxwell.phi_direct(S)
    ident = fw.check_identities(S, qp, sol)
    scale = 1.0 + float(np.max(np.abs(S.s_values)))
    if ident["equivalence_gap"] > 1e-6 * scale:
        raise NumericalCheckError(
            "tree weights and transform disagree: sup-gap "
            f"{ident['equivalence_gap']:.3e} > {1e-6 * scale:.3e}")

    brute = None
    if cfg.get("brute"):
        brute = []
        for i in range(sol.ell):
            value, tree = fw.w_stable_bruteforce(S, sol.chain, i)
            gap = abs(value - float(sol.w_stable[i]))
            if gap > 1e-9 * (1.0 + abs(value)):
                raise NumericalCheckError(
                    f"enumeration disagrees with the reduction at root {i} "
                    f"(gap {gap:.3e})")
            brute.append({"root": i, "value": value, "gap": gap,
                          "tree": tree.to_dict()})

    xs = np.arange(n + 1) / n
    w = sol.w_curve
    artifacts = [
        _write_csv(out, "fw.csv", ["x", "w", "rate", "case", "neighbors"],
                   [xs, w, w - w.min(), list(sol.case_labels),
                    [_neighbor_text(e) for e in sol.neighbors]]),
        _write_json(out, "fw.json", {
            **sol.to_dict(), **ident,
            "trees": [fw.comb_tree(sol.ell, i, sol.j_per_root[i]).to_dict()
                      for i in range(sol.ell)],
            "brute_force": brute,
            "chain": _chain_dict(sol.chain)}),
    ]
    if cfg.get("plot"):
        phi = qp.phi_values
        svgplot.emit_plot(
            [("tree weight rate", xs, w - w.min()),
             ("transform rate", xs, phi - phi.min())],
            os.path.join(out, "fw.svg"),
            shaded=qp.flat_intervals, title=f"rate curves, n={n}")
        artifacts.append("fw.svg")
    _finish_run(out, "fw", cfg, artifacts)
    return 0


def _convergence_rows(parameters, curves, target):
    rows = [[p, float(np.max(np.abs(c.rate - target)))]
            for p, c in zip(parameters, curves)]
    gaps = [g for _, g in rows]
    return rows, all(b < a for a, b in zip(gaps, gaps[1:]))


def _run_density(cfg):
    out = _outdir(cfg)
    f = FieldSpec.from_dict(cfg["field"])
    n = int(cfg["n"])
    eps_list = _decreasing(cfg["eps"], "--eps")
    qp = maxwell.phi_direct(integrate_potential(f, n))
    target = qp.phi_values[:n] - qp.phi_values.min()
    drift_b = scaled_field(f, -0.5)
    threads = _thread_count(cfg)
    curves = _map_threaded(
        lambda e: densities.diffusion_density(drift_b, e, n),
        eps_list, threads)
    rows, monotone = _convergence_rows(eps_list, curves, target)

    xs = np.arange(n) / n
    artifacts = []
    for eps, curve in zip(eps_list, curves):
        artifacts.append(_write_csv(
            out, f"density_{eps:g}.csv",
            ["x", "log_density", "density", "rate"],
            [xs, curve.log_density, curve.density, curve.rate]))
    artifacts.append(_write_csv(
        out, "convergence.csv", ["eps_or_lambda", "sup_gap"],
        [[r[0] for r in rows], [r[1] for r in rows]]))
    artifacts.append(_write_json(out, "convergence.json", {
        "kind": "diffusion", "n": n, "parameters": eps_list,
        "rows": rows, "monotone_decreasing": monotone}))
    if cfg.get("plot"):
        overlay = [("transform rate", xs, target)]
        overlay += [(f"rate eps={eps:g}", xs, curve.rate)
                    for eps, curve in zip(eps_list, curves)]
        svgplot.emit_plot(overlay, os.path.join(out, "density.svg"),
                          shaded=qp.flat_intervals,
                          title=f"density rates vs transform, n={n}")
        artifacts.append("density.svg")
    _finish_run(out, "density", cfg, artifacts)
    return 0


def _run_pdmp_density(cfg):
    out = _outdir(cfg)
    spec = PdmpSpec.from_dict(cfg["pdmp"])
    n = int(cfg["n"])
    lam_list = sorted(set(cfg["lam"]))
    if len(lam_list) != len(cfg["lam"]):
        raise ValidationError("--lam: values must be distinct")
    S = densities.pdmp_potential(spec, n)
    qp = maxwell.phi_direct(S)
    target = qp.phi_values[:n] - qp.phi_values.min()
    threads = _thread_count(cfg)
    curves = _map_threaded(lambda lam: densities.pdmp_density(spec, lam, n),
                           lam_list, threads)
    rows = [[lam, float(np.max(np.abs(c.rate - target)))]
            for lam, c in zip(lam_list, curves)]
    gaps = [g for _, g in rows]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))

    xs = np.arange(n) / n
    artifacts = []
    for lam, curve in zip(lam_list, curves):
        artifacts.append(_write_csv(
            out, f"pdmp_density_{lam:g}.csv",
            ["x", "log_density", "density", "rate"],
            [xs, curve.log_density, curve.density, curve.rate]))
    artifacts.append(_write_csv(
        out, "convergence.csv", ["eps_or_lambda", "sup_gap"],
        [[r[0] for r in rows], [r[1] for r in rows]]))
    artifacts.append(_write_json(out, "convergence.json", {
        "kind": "pdmp", "n": n, "parameters": lam_list,
        "rows": rows, "monotone_decreasing": monotone}))
    if cfg.get("plot"):
        overlay = [("transform rate", xs, target)]
        overlay += [(f"rate lam={lam:g}", xs, curve.rate)
                    for lam, curve in zip(lam_list, curves)]
        svgplot.emit_plot(overlay, os.path.join(out, "pdmp_density.svg"),
                          shaded=qp.flat_intervals,
                          title=f"process rates vs transform, n={n}")
        artifacts.append("pdmp_density.svg")
    _finish_run(out, "pdmp-density", cfg, artifacts)
    return 0


def _hist_artifacts(out, cfg, hist, reference, name):
    tv = simulate.tv_distance(hist, reference)
    binned = _bin_average(reference, hist.bins)
    artifacts = [
        _write_csv(out, f"{name}.csv", ["bin_center", "density"],
                   [hist.centers, hist.density]),
        _write_json(out, f"{name}.json", {
            "tv_distance": tv, "total_samples": hist.total,
            "seed": hist.seed, "counts": [int(c) for c in hist.counts],
            "meta": hist.meta}),
    ]
    if cfg.get("plot"):
        svgplot.emit_plot(
            [("empirical", hist.centers, hist.density),
             ("reference", hist.centers, binned)],
            os.path.join(out, f"{name}.svg"),
            title=f"stationary histogram, {hist.bins} bins")
        artifacts.append(f"{name}.svg")
    return tv, artifacts


def _run_simulate(cfg):
    out = _outdir(cfg)
    drift_b = scaled_field(FieldSpec.from_dict(cfg["field"]), -0.5)
    hist = simulate.simulate_diffusion(
        drift_b, cfg["eps"], cfg["T"], dt=cfg["dt"],
        burn_in=cfg.get("burn_in"), seed=int(cfg["seed"]),
        bins=int(cfg["bins"]))
    reference = densities.diffusion_density(
        drift_b, cfg["eps"], int(cfg["ref_n"]))
    _, artifacts = _hist_artifacts(out, cfg, hist, reference, "sim")
    _finish_run(out, "simulate", cfg, artifacts)
    return 0


def _run_simulate_pdmp(cfg):
    out = _outdir(cfg)
    spec = PdmpSpec.from_dict(cfg["pdmp"])
    hist = simulate.simulate_pdmp(
        spec, cfg["lam"], cfg["T"], burn_in=cfg.get("burn_in"),
        seed=int(cfg["seed"]), bins=int(cfg["bins"]))
    reference = densities.pdmp_density(spec, cfg["lam"], int(cfg["ref_n"]))
    _, artifacts = _hist_artifacts(out, cfg, hist, reference, "sim_pdmp")
    _finish_run(out, "simulate-pdmp", cfg, artifacts)
    return 0


def _run_check_hj(cfg):
    out = _outdir(cfg)
    f = FieldSpec.from_dict(cfg["field"])
    n = int(cfg["n"])
    S = integrate_potential(f, n)
    if cfg["method"] == "constructive":
        qp = maxwell.phi_constructive(S)
    else:
        qp = maxwell.phi_direct(S)
    reports = {}
    for ham in viscosity.builtin_hamiltonians(f):
        reports[ham.name] = viscosity.check_viscosity(qp, ham, tau=cfg.get("tau"))
    all_pass = all(r.verdict for r in reports.values())
    artifacts = [_write_json(out, "hj.json", {
        "n": n, "method": qp.method, "all_pass": all_pass,
        "hamiltonians": {name: r.to_dict() for name, r in reports.items()}})]
    _finish_run(out, "check-hj", cfg, artifacts)
    if not all_pass:
        bad = ", ".join(name for name, r in reports.items() if not r.verdict)
        raise NumericalCheckError(
            f"candidate failed the viscosity check for: {bad} (see hj.json)")
    return 0


def _run_compare(cfg):
    out = _outdir(cfg)
    f = FieldSpec.from_dict(cfg["field"])
    n = int(cfg["n"])
    eps_list = _decreasing(cfg["eps"], "--eps")
    threads = _thread_count(cfg)

    S = integrate_potential(f, n)
    chain = find_components(f, n)
    direct = maxwell.phi_direct(S)
    constructive = maxwell.phi_constructive(S, chain=chain)
    route_gap = float(np.max(np.abs(direct.phi_values
                                    - constructive.phi_values)))

    sol = fw.solve(f, n, chain=chain)
    ident = fw.check_identities(S, direct, sol)

    target = direct.phi_values[:n] - direct.phi_values.min()
    drift_b = scaled_field(f, -0.5)
    curves = _map_threaded(
        lambda e: densities.diffusion_density(drift_b, e, n),
        eps_list, threads)
    rows, monotone = _convergence_rows(eps_list, curves, target)

    hist = simulate.simulate_diffusion(
        drift_b, eps_list[-1], cfg["T"], dt=cfg["dt"], seed=int(cfg["seed"]),
        bins=int(cfg["bins"]))
    tv = simulate.tv_distance(hist, curves[-1])

    verdicts = {ham.name: viscosity.check_viscosity(direct, ham).verdict
                for ham in viscosity.builtin_hamiltonians(f)}

    xs = np.arange(n + 1) / n
    report = {
        "n": n, "seed": int(cfg["seed"]), "parameters": eps_list,
        "route_gap": route_gap, "identities": ident,
        "density_rows": rows, "monotone_decreasing": monotone,
        "tv_distance": tv, "viscosity": verdicts,
    }
    artifacts = [
        _write_csv(out, "phi.csv", ["x", "potential", "phi", "rate"],
                   [xs, S.s_values, direct.phi_values,
                    direct.phi_values - direct.phi_values.min()]),
        _write_csv(out, "fw.csv", ["x", "w", "rate"],
                   [xs, sol.w_curve, sol.w_curve - sol.w_curve.min()]),
        _write_json(out, "gap_report.json", report),
    ]
    if cfg.get("plot"):
        svgplot.emit_plot(
            [("potential S", xs, S.s_values),
             ("transform", xs, direct.phi_values),
             ("tree weight", xs, sol.w_curve)],
            os.path.join(out, "compare.svg"),
            shaded=direct.flat_intervals, title=f"combined curves, n={n}")
        artifacts.append("compare.svg")
    _finish_run(out, "compare", cfg, artifacts)

    tol = 1e-8 * (1.0 + float(np.max(np.abs(S.s_values))))
    if route_gap > tol:
        raise NumericalCheckError(
            f"transform routes disagree: sup-gap {route_gap:.3e} > {tol:.3e}")
    if ident["equivalence_gap"] > tol:
        raise NumericalCheckError(
            "tree weights and transform disagree: sup-gap "
            f"{ident['equivalence_gap']:.3e} > {tol:.3e}")
    if not monotone:
        raise NumericalCheckError(
            "density rate gap is not strictly decreasing over the eps sweep")
    if not all(verdicts.values()):
        raise NumericalCheckError("transform failed a viscosity check")
    return 0


def _run_pipeline(cfg):
    data = json.loads(_read_text(cfg["config_path"]))
    if not isinstance(data, dict) or "command" not in data:
        raise ValidationError("config must be an object with a 'command' key")
    command = data["command"]
    if command == "pipeline":
        raise ValidationError("refusing to nest pipeline configs")
    handler = _HANDLERS.get(command)
    if handler is None:
        raise ValidationError(f"unknown command {command!r} in config")
    inner = data.get("config")
    if inner is None:
        inner = {k: v for k, v in data.items() if k != "command"}
    if not isinstance(inner, dict):
        raise ValidationError("config payload must be an object")
    if cfg.get("out"):
        inner = {**inner, "out": cfg["out"]}
    return handler(dict(inner))


_HANDLERS = {
    "phi": _run_phi,
    "fw": _run_fw,
    "density": _run_density,
    "pdmp-density": _run_pdmp_density,
    "simulate": _run_simulate,
    "simulate-pdmp": _run_simulate_pdmp,
    "check-hj": _run_check_hj,
    "compare": _run_compare,
}


# ---------------------------------------------------------------- arguments

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quasipot",
        description="Quasipotentials of stationary measures on the torus: "
                    "transform, tree weights, densities, simulation, and "
                    "viscosity checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, plot=True):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads for parameter sweeps "
                             "(default: QUASIPOT_THREADS or 1)")
        if plot:
            sp.add_argument("--plot", action="store_true",
                            help="also write an SVG chart")

    sp = sub.add_parser("phi", help="window-max transform of the potential")
    sp.add_argument("--field", required=True,
                    help="field: expression, inline JSON, or @file")
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--method", default="both",
                    choices=["direct", "constructive", "tilde", "both"])
    sp.add_argument("--tau-flat", type=float, default=None,
                    help="flat-detection tolerance (default 8*max|F|/n)")
    common(sp)

    sp = sub.add_parser("fw", help="optimal-tree weights on the grid")
    sp.add_argument("--field", required=True)
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--tau-zero", type=float, default=None,
                    help="zero-set detection tolerance")
    sp.add_argument("--brute", action="store_true",
                    help="cross-check each root by full tree enumeration")
    common(sp)

    sp = sub.add_parser("density", help="exact diffusion densities over eps")
    sp.add_argument("--field", required=True,
                    help="force field F; the diffusion drift is b = -F/2")
    sp.add_argument("--eps", default="0.4,0.3,0.2",
                    help="comma-separated noise levels")
    sp.add_argument("--n", type=int, default=1024)
    common(sp)

    sp = sub.add_parser("pdmp-density",
                        help="exact transport-process densities over lam")
    sp.add_argument("--pdmp", required=True,
                    help="process spec: inline JSON or @file")
    sp.add_argument("--lam", default="20,50,100",
                    help="comma-separated switching scales")
    sp.add_argument("--n", type=int, default=1024)
    common(sp)

    sp = sub.add_parser("simulate", help="diffusion Monte Carlo histogram")
    sp.add_argument("--field", required=True,
                    help="force field F; simulates dX = -F/2 dt + eps dW")
    sp.add_argument("--eps", type=float, default=0.3)
    sp.add_argument("--T", type=float, default=500.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--burn-in", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--ref-n", type=int, default=1024,
                    help="grid for the quadrature reference")
    common(sp)

    sp = sub.add_parser("simulate-pdmp",
                        help="transport-process Monte Carlo histogram")
    sp.add_argument("--pdmp", required=True)
    sp.add_argument("--lam", type=float, default=50.0)
    sp.add_argument("--T", type=float, default=500.0)
    sp.add_argument("--burn-in", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--ref-n", type=int, default=1024)
    common(sp)

    sp = sub.add_parser("check-hj",
                        help="viscosity-solution check of the transform")
    sp.add_argument("--field", required=True)
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--method", default="direct",
                    choices=["direct", "constructive"])
    sp.add_argument("--tau", type=float, default=None,
                    help="margin tolerance (default scales with H and n)")
    common(sp, plot=False)

    sp = sub.add_parser("compare",
                        help="run transform + trees + densities + simulation "
                             "and emit a combined gap report")
    sp.add_argument("--field", required=True)
    sp.add_argument("--eps", default="0.4,0.3,0.2")
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--T", type=float, default=200.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--bins", type=int, default=50)
    common(sp)

    sp = sub.add_parser("pipeline", help="replay a run from a config or "
                                         "manifest JSON file")
    sp.add_argument("--config", required=True, help="config/manifest path")
    sp.add_argument("--out", default=None,
                    help="override the recorded output directory")
    return parser


def _build_config(ns):
    cfg = {"out": ns.out}
    if getattr(ns, "threads", None) is not None:
        cfg["threads"] = ns.threads
    if hasattr(ns, "plot"):
        cfg["plot"] = bool(ns.plot)
    if hasattr(ns, "field"):
        cfg["field"] = field_spec_from_arg(ns.field).to_dict()
    if hasattr(ns, "pdmp"):
        cfg["pdmp"] = pdmp_spec_from_arg(ns.pdmp).to_dict()

    cmd = ns.command
    if cmd == "phi":
        cfg.update(n=ns.n, method=ns.method, tau_flat=ns.tau_flat)
    elif cmd == "fw":
        cfg.update(n=ns.n, tau_zero=ns.tau_zero, brute=bool(ns.brute))
    elif cmd == "density":
        cfg.update(n=ns.n, eps=_float_list("--eps", ns.eps))
    elif cmd == "pdmp-density":
        cfg.update(n=ns.n, lam=_float_list("--lam", ns.lam))
    elif cmd == "simulate":
        cfg.update(eps=ns.eps, T=ns.T, dt=ns.dt, burn_in=ns.burn_in,
                   seed=ns.seed, bins=ns.bins, ref_n=ns.ref_n)
    elif cmd == "simulate-pdmp":
        cfg.update(lam=ns.lam, T=ns.T, burn_in=ns.burn_in,
                   seed=ns.seed, bins=ns.bins, ref_n=ns.ref_n)
    elif cmd == "check-hj":
        cfg.update(n=ns.n, method=ns.method, tau=ns.tau)
    elif cmd == "compare":
        cfg.update(n=ns.n, eps=_float_list("--eps", ns.eps), seed=ns.seed,
                   T=ns.T, dt=ns.dt, bins=ns.bins)
    return cfg


_HINTS = (
    (ParseError, "fix the expression near the reported offset; see README "
                 "for the accepted grammar"),
    (VelocityVanishes, "transport velocities must be nonvanishing with "
                       "opposite signs; adjust f0/f1"),
    (TooManyComponents, "drop --brute or reduce the number of wells; "
                        "enumeration is capped"),
    (FieldEvaluationError, "the field must stay finite on [0, 1); check "
                           "divisions and arguments in the expression"),
    (ValidationError, "check the flag values and input files against --help"),
)


def _hint(exc):
    for cls, hint in _HINTS:
        if isinstance(exc, cls):
            return hint
    return "see --help"


def run(argv=None):
    """Parse argv and execute one subcommand; returns the exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if ns.command == "pipeline":
            return _run_pipeline({"config_path": ns.config, "out": ns.out})
        return _HANDLERS[ns.command](_build_config(ns))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"hint: {_hint(exc)}", file=sys.stderr)
        return 2
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
