"""Shared fields and generators for the test suite.

The corpus mirrors the one the acceptance tests run on: three analytic
fields plus seven random three-mode Fourier fields. Seeds are frozen so
that every expected value in the suite refers to a reproducible input.
"""

import numpy as np
import pytest

from quasipot import FieldSpec

SIN = "sin(2*pi*x)"
TILTED = "sin(2*pi*x)+0.5"
DOUBLE = "sin(4*pi*x)"

CORPUS_SEEDS = tuple(range(7))


def random_three_mode(seed):
    """Random field with three Fourier modes and a bounded mean."""
    rng = np.random.default_rng(seed)
    cos = rng.uniform(-1.0, 1.0, 3)
    sin = rng.uniform(-1.0, 1.0, 3)
    a0 = rng.uniform(-0.4, 0.4)
    return FieldSpec.fourier(float(a0), [float(c) for c in cos],
                             [float(s) for s in sin])


def multiwell(ell, seed):
    """A field with exactly ell stable components: a dominant mode-ell
    tone at a random phase plus a perturbation far too small to move or
    merge any zero crossing."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    cos = [0.0] * ell
    sin = [0.0] * ell
    cos[ell - 1] = float(np.sin(theta))
    sin[ell - 1] = float(np.cos(theta))
    for k in range(ell - 1):
        cos[k] = float(rng.uniform(-1.0, 1.0)) * 0.1 / max(ell - 1, 1)
        sin[k] = float(rng.uniform(-1.0, 1.0)) * 0.1 / max(ell - 1, 1)
    a0 = float(rng.uniform(-0.15, 0.15))
    return FieldSpec.fourier(a0, cos, sin)


def corpus():
    fields = [FieldSpec.expression(t) for t in (SIN, TILTED, DOUBLE)]
    fields += [random_three_mode(s) for s in CORPUS_SEEDS]
    return fields


@pytest.fixture
def sin_field():
    return FieldSpec.expression(SIN)


@pytest.fixture
def tilted_field():
    return FieldSpec.expression(TILTED)


@pytest.fixture
def double_field():
    return FieldSpec.expression(DOUBLE)


@pytest.fixture
def corpus_fields():
    return corpus()
