import numpy as np
import pytest

from frontcontrol.errors import DegeneracyError, DomainError
from frontcontrol.models import (eigen, eigen_residual, eval_flux, from_riemann, make_model, speed_bounds,
                                 to_riemann, validate_model)

MODELS = ["burgers", "temple2", "gas", "psystem"]


def test_burgers_flux_zero(burgers):
    # zero lies outside the default box, so use an unrestricted one
    m = make_model("burgers", box=((-1.0, 3.0),))
    assert eval_flux(m, [0.0])[0] == 0.0


def test_gas_flux_values(gas, oracle):
    assert np.allclose(eval_flux(gas, [1.0, 0.0]), [0.0, 1.0])
    assert np.allclose(eval_flux(gas, [1.0, 0.1]), oracle["gas_flux_1_01"], atol=1e-14)
    assert np.allclose(eval_flux(gas, [1.0, 0.1]), [0.1, 1.005], atol=1e-14)


def test_flux_outside_box_raises(gas):
    with pytest.raises(DomainError):
        eval_flux(gas, [2.0, 0.0])


def test_eigenvalues_examples(burgers, temple, gas, oracle):
    assert eigen(burgers, [2.0]).values[0] == 2.0
    assert np.allclose(eigen(temple, [-2.0, 2.0]).values, [-1.5, 1.5])
    lam = eigen(gas, [1.0, 0.0]).values
    assert np.allclose(lam, oracle["gas_eig_1_0"], atol=1e-8)
    assert np.allclose(lam, [-1.0, 1.0], atol=1e-12)


def test_degenerate_state_raises():
    m = make_model("temple2", box=((-3.0, 3.0), (-3.0, 3.0)))
    # lambda_1 == lambda_2 when w1 == w2
    with pytest.raises(DegeneracyError):
        eigen(m, [1.0, 1.0])


@pytest.mark.parametrize("name", MODELS)
def test_eigen_residual_on_grid(name):
    m = make_model(name)
    assert max(eigen_residual(m, u) for u in m.grid(11)) <= 1e-9


@pytest.mark.parametrize("name", MODELS)
def test_chart_round_trip(name):
    m = make_model(name)
    for u in m.grid(10):
        assert np.max(np.abs(from_riemann(m, to_riemann(m, u)) - u)) <= 1e-10


def test_temple_chart_identity(temple):
    assert np.array_equal(to_riemann(temple, [-2.0, 2.0]), [-2.0, 2.0])


def test_gas_riemann_invariants(gas):
    w = to_riemann(gas, [1.0, 0.0])
    assert w[0] == pytest.approx(-w[1])


@pytest.mark.parametrize("name", ["gas", "psystem"])
def test_riemann_invariants_are_invariant(name):
    # grad w_j . r_i = 0 for i != j, checked by finite differences
    m = make_model(name)
    for u in m.grid(6):
        R = m.eigenvectors(u)
        for i in range(2):
            j = 1 - i
            h = 1e-6
            d = (m.to_riemann(u + h * R[:, i])[j] - m.to_riemann(u - h * R[:, i])[j]) / (2 * h)
            assert abs(d) < 1e-7


def test_validate_temple(temple, oracle):
    rep = validate_model(temple)
    assert rep.ok
    assert rep.c0 == pytest.approx(oracle["temple_c0"])
    assert rep.lambda_min == pytest.approx(oracle["temple_lambda_min"])


def test_validate_gas_h7(gas, oracle):
    rep = validate_model(gas)
    assert rep.ok
    for k, v in oracle["gas_h7"].items():
        assert rep.h7[k] is v
    assert rep.lambda_min > 0


def test_validate_burgers(burgers):
    rep = validate_model(burgers)
    assert rep.strictly_hyperbolic and rep.ok


def test_psystem_fails_wedge_sign(psystem):
    rep = validate_model(psystem)
    assert not rep.ok
    assert rep.h7["r1_wedge_r2"] is False


@pytest.mark.parametrize("gamma", [1.2, 1.67, 2.5])
def test_gas_range_of_gamma(gamma):
    m = make_model("gas", gamma=gamma)
    rep = validate_model(m, k=9)
    assert rep.speed_separation and rep.c0 > 0


def test_temple_genuine_nonlinearity_exact(temple):
    for u in temple.grid(5):
        R = temple.eigenvectors(u)
        for i in range(2):
            d = (temple.eigenvalues(u + R[:, i])[i] - temple.eigenvalues(u)[i])
            assert d == 1.0


def test_speed_bounds_cached(temple):
    assert speed_bounds(temple) is speed_bounds(temple)


def test_unknown_model():
    with pytest.raises(ValueError):
        make_model("nope")
