import math

import numpy as np
import pytest
from scipy import integrate

from levy_mmm import (
    DomainError,
    DoubleExpJumps,
    GaussianJumps,
    LevyModel,
    OneSidedExpJumps,
    esscher_tilt,
    psi,
    psi_prime,
    validate,
)
from levy_mmm.models import require_valid

from conftest import BM, KOU, MERTON, SN, SP


def quad_transform(density, theta, reach=400.0):
    """Independent oracle: int (e^{theta x} - 1) Pi(dx) by adaptive quadrature."""

    def f(x):
        d = float(density(x))
        return 0.0 if d == 0.0 else math.expm1(theta * x) * d

    edges = [-reach, -20.0, -2.0, 0.0, 2.0, 20.0, reach]
    return sum(integrate.quad(f, a, b, limit=400, epsabs=1e-13, epsrel=1e-11)[0] for a, b in zip(edges, edges[1:]))


def sample_thetas(model, k=7):
    dom = model.domain()
    lo = max(dom.lower, -3.0) * 0.9
    hi = min(dom.upper, 3.0) * 0.9
    return np.linspace(lo, hi, k)


def test_brownian_psi_is_quadratic():
    for th in (-2.0, -0.3, 0.0, 0.7, 4.0):
        assert psi(BM, th) == pytest.approx(-0.5 * th + 0.5 * th * th, abs=1e-15)


@pytest.mark.parametrize("model", [SN, SP, KOU, MERTON], ids=["sn", "sp", "kou", "merton"])
def test_jump_transform_matches_quadrature(model):
    for th in sample_thetas(model):
        brownian = model.drift * th + 0.5 * model.sigma2 * th * th
        assert psi(model, th) - brownian == pytest.approx(quad_transform(model.jumps.density, th), rel=1e-7, abs=1e-10)


def test_psi_prime_matches_central_difference(any_model):
    h = 1e-6
    for th in sample_thetas(any_model):
        fd = (psi(any_model, th + h) - psi(any_model, th - h)) / (2 * h)
        assert psi_prime(any_model, th) == pytest.approx(fd, rel=1e-6, abs=1e-7)


def test_psi_prime_at_zero_is_the_mean():
    # E X(1) = drift + rate * E[jump]
    assert psi_prime(SN, 0.0) == pytest.approx(-0.25 - 1.0 * 0.5)
    assert psi_prime(SP, 0.0) == pytest.approx(-1.0 + 0.5 / 3.0)
    assert psi_prime(MERTON, 0.0) == pytest.approx(-0.4 + 0.5 * -0.2)
    assert psi_prime(KOU, 0.0) == pytest.approx(-0.3 + 0.7 * (0.4 / 4.0 - 0.6 / 3.0))


def test_psi_is_convex(any_model):
    ths = sample_thetas(any_model, 41)
    vals = np.array([psi(any_model, t) for t in ths])
    assert np.all(np.diff(vals, 2) > -1e-12)


def test_domain_is_open():
    with pytest.raises(DomainError):
        psi(KOU, 4.0)
    with pytest.raises(DomainError):
        psi(KOU, -3.0)
    with pytest.raises(DomainError):
        psi_prime(SP, 3.0)
    assert psi(SN, -1.999) > 0
    assert 3.999 in KOU.domain() and 4.0 not in KOU.domain()


@pytest.mark.parametrize("model,nu", [(BM, 1.0), (SN, 0.8), (SP, 1.2), (KOU, 0.9), (MERTON, 0.6)])
def test_esscher_tilt_shifts_psi(model, nu):
    tilted = esscher_tilt(model, nu)
    for th in sample_thetas(tilted):
        if th + nu in model.domain():
            assert psi(tilted, th) == pytest.approx(psi(model, th + nu) - psi(model, nu), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("model,nu", [(SN, 0.8), (SP, 1.2), (KOU, 0.9), (MERTON, 0.6)])
def test_tilted_jump_measure_is_exponentially_weighted(model, nu):
    """Pi^nu(dx) = e^{nu x} Pi(dx), checked through its transform."""
    tilted = esscher_tilt(model, nu)
    def weighted(x):
        d = float(model.jumps.density(x))
        return 0.0 if d == 0.0 else math.exp(nu * x + math.log(d))
    for th in (-0.5, 0.3):
        if th in tilted.domain():
            assert tilted.jumps.transform(th) == pytest.approx(quad_transform(weighted, th), rel=1e-7)
    assert tilted.drift == model.drift + model.sigma2 * nu


def test_tilt_outside_domain_is_rejected():
    with pytest.raises(DomainError):
        esscher_tilt(SP, 3.5)


def test_negated_model_reflects_psi(any_model):
    neg = any_model.negated()
    for th in sample_thetas(neg):
        assert psi(neg, th) == pytest.approx(psi(any_model, -th), rel=1e-13, abs=1e-14)
    assert neg.spectrally_negative == any_model.spectrally_positive


def test_validate_reports_degenerate_models():
    diag = validate(LevyModel(-1.0, 0.0))
    assert not diag.ok
    assert any("monotone/degenerate" in v for v in diag.violations)
    assert not validate(LevyModel(-1.0, 1.0, OneSidedExpJumps(-1, -2.0, 1.0))).ok
    assert not validate(LevyModel(-1.0, 1.0, DoubleExpJumps(1.0, 1.5, 1.0, 1.0))).ok
    assert not validate(LevyModel(-1.0, 1.0, GaussianJumps(1.0, 0.0, 0.0))).ok
    assert validate(KOU).ok and validate(KOU).domain == KOU.domain()
    with pytest.raises(ValueError):
        require_valid(LevyModel(0.0, -1.0))


@pytest.mark.parametrize("model", [SN, SP, KOU, MERTON], ids=["sn", "sp", "kou", "merton"])
def test_sum_of_jumps_moments(model):
    rng = np.random.default_rng(5)
    counts = np.full(200_000, 3)
    s = model.jumps.sum_of_jumps(counts, rng)
    mean_one = integrate.quad(lambda x: x * float(model.jumps.density(x)), -np.inf, np.inf)[0] / model.jumps.rate
    se = s.std() / math.sqrt(s.size)
    assert abs(s.mean() - 3 * mean_one) < 4 * se


def test_models_are_hashable_and_immutable():
    assert hash(SN) == hash(LevyModel(-0.25, 1.0, OneSidedExpJumps(-1, 1.0, 2.0)))
    with pytest.raises(Exception):
        SN.drift = 0.0
