"""Viscosity verification: differentials, hypotheses, verdicts, controls."""

import numpy as np
import pytest

from conftest import corpus
from quasipot import (FieldSpec, builtin_hamiltonians, check_viscosity,
                      integrate_potential, phi_direct, sub_super_differentials)
from quasipot.errors import HypothesisFailed, ValidationError
from quasipot.viscosity import Hamiltonian


def tilted_transform(n=4096):
    f = FieldSpec.expression("sin(2*pi*x)+0.5")
    return f, phi_direct(integrate_potential(f, n))


# ------------------------------------------------------------ differentials

def test_kink_differentials():
    n = 64
    xs = np.arange(n + 1) / n
    vee = np.abs(xs - 0.5)
    sub, sup = sub_super_differentials(vee, n // 2)
    assert sub == pytest.approx((-1.0, 1.0), abs=1e-9)
    assert sup is None
    sub, sup = sub_super_differentials(-vee, n // 2)
    assert sub is None
    assert sup == pytest.approx((-1.0, 1.0), abs=1e-9)


def test_smooth_differentials_are_singletons():
    n = 256
    values = np.cos(2.0 * np.pi * np.arange(n + 1) / n)
    sub, sup = sub_super_differentials(values, n // 4)
    assert sub == sup
    assert sub[0] == sub[1]
    assert sub[0] == pytest.approx(-2.0 * np.pi, abs=5e-3)


def test_candidate_shape_is_checked():
    ham = builtin_hamiltonians(FieldSpec.expression("sin(2*pi*x)"))[0]
    with pytest.raises(ValidationError):
        check_viscosity(np.linspace(0.0, 1.0, 257), ham)
    with pytest.raises(ValidationError):
        check_viscosity(np.zeros(8), ham)


# ------------------------------------------------------------- hamiltonians

def test_builtin_family():
    f = FieldSpec.expression("sin(2*pi*x)+0.5")
    hams = builtin_hamiltonians(f)
    assert [h.name for h in hams] == ["quadratic", "shifted-cosh",
                                      "guarded-quartic"]
    xs = np.linspace(0.0, 1.0, 33)
    fv = np.asarray(f(xs))
    for h in hams:
        np.testing.assert_allclose(h(xs, np.zeros_like(xs)), 0.0, atol=1e-12)
        np.testing.assert_allclose(h(xs, fv), 0.0, atol=1e-12)
        summary = h.check_hypotheses()
        assert summary["worst_root"] <= summary["tau"]
        assert summary["worst_midpoint"] <= summary["tau"]


def test_quadratic_values():
    h = builtin_hamiltonians(FieldSpec.expression("2"))[0]
    assert h(0.3, 1.0) == pytest.approx(-1.0, abs=1e-12)
    assert h(0.3, 0.0) == 0.0
    assert h(0.3, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_momentum_sign_convention():
    # between the double roots H is nonpositive, outside it is nonnegative
    f = FieldSpec.expression("sin(2*pi*x)+0.5")
    rng = np.random.default_rng(11)
    for h in builtin_hamiltonians(f):
        tau = h.check_hypotheses()["tau"]
        for _ in range(100):
            x = float(rng.uniform(0.0, 1.0))
            fx = float(f(x))
            lo, hi = min(0.0, fx), max(0.0, fx)
            inside = float(rng.uniform(lo, hi))
            assert float(h(x, inside)) <= tau
            out = hi + float(rng.uniform(0.0, 3.0)) if rng.uniform() < 0.5 \
                else lo - float(rng.uniform(0.0, 3.0))
            assert float(h(x, out)) >= -tau


def test_concave_hamiltonian_is_rejected():
    f = FieldSpec.expression("sin(2*pi*x)+0.5")
    bad = Hamiltonian("flipped", f, lambda x, p: -p * (p - f(x)))
    with pytest.raises(HypothesisFailed, match="midpoint convexity"):
        bad.check_hypotheses()


def test_rootless_hamiltonian_is_rejected():
    f = FieldSpec.expression("sin(2*pi*x)+0.5")
    bad = Hamiltonian("drift", f, lambda x, p: p + 0.0 * x)
    with pytest.raises(HypothesisFailed, match="double-root"):
        bad.check_hypotheses()


# ----------------------------------------------------------------- verdicts

def test_zero_candidate_passes():
    f = FieldSpec.expression("sin(2*pi*x)")
    rep = check_viscosity(np.zeros(1025), builtin_hamiltonians(f)[0])
    assert rep.verdict


def test_transform_passes_for_every_builtin():
    for f in corpus():
        qp = phi_direct(integrate_potential(f, 2048))
        for ham in builtin_hamiltonians(f):
            rep = check_viscosity(qp, ham)
            assert rep.verdict, (ham.name, rep.violations[:3])


def test_kink_census_on_the_tilted_field():
    f, qp = tilted_transform()
    rep = check_viscosity(qp, builtin_hamiltonians(f)[0])
    counts = {}
    for k in rep.kinds:
        counts[str(k)] = counts.get(str(k), 0) + 1
    assert counts == {"smooth": 4092, "convex": 3, "concave": 1}
    d = rep.to_dict()
    assert sorted(d) == ["counts", "n", "tau", "verdict", "violations"]


def test_negative_controls_are_flagged():
    f, qp = tilted_transform()
    n = qp.n
    xs = np.arange(n + 1) / n
    rate = qp.phi_values - qp.phi_values.min()
    controls = {
        "reversible-shape": (1.0 - np.cos(2.0 * np.pi * xs)) / (2.0 * np.pi),
        "half-rate": 0.5 * rate,
        "negated": -rate,
    }
    for ham in builtin_hamiltonians(f):
        for name, cand in controls.items():
            rep = check_viscosity(cand, ham)
            assert not rep.verdict, (name, ham.name)
            worst = max(v["margin"] for v in rep.violations)
            assert worst >= 10.0 * rep.tau, (name, ham.name)
            for v in rep.violations[:5]:
                assert set(v) == {"x", "condition", "margin"}
                assert v["condition"] in ("subsolution", "supersolution")


def test_point_records():
    f, qp = tilted_transform(1024)
    rep = check_viscosity(qp, builtin_hamiltonians(f)[0])
    rec = rep.record(256)
    assert set(rec) == {"x", "left_slope", "right_slope", "d_minus", "d_plus",
                        "sub_margin", "sup_margin"}
    assert rec["x"] == 256 / 1024
