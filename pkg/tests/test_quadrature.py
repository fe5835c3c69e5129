import numpy as np
import pytest
from scipy import integrate

from khmgof.quadrature import G7_WEIGHTS, GK15_NODES, GK15_WEIGHTS, segment_integrals


def test_rule_weights_sum_to_two():
    assert GK15_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert G7_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GK15_NODES.size == 15


@pytest.mark.parametrize("deg", [0, 1, 7, 15, 22, 29])
def test_kronrod_rule_exact_on_polynomials(deg):
    f = lambda x: (x ** deg)[:, None]
    val, _ = segment_integrals(f, np.array([-1.0, 1.0]), max_rounds=1)
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert val[0, 0] == pytest.approx(exact, abs=1e-14)


def test_many_segments_and_vector_integrand():
    edges = np.linspace(0.0, np.pi, 11)
    f = lambda x: np.stack([np.sin(x), np.cos(x), x * x], axis=1)
    val, err = segment_integrals(f, edges)
    assert val.shape == (10, 3)
    np.testing.assert_allclose(val[:, 0], np.cos(edges[:-1]) - np.cos(edges[1:]), atol=1e-14)
    np.testing.assert_allclose(val[:, 1], np.sin(edges[1:]) - np.sin(edges[:-1]), atol=1e-14)
    np.testing.assert_allclose(val[:, 2].sum(), np.pi ** 3 / 3, rtol=1e-13)
    assert np.all(err >= 0)


def test_endpoint_singularity_matches_scipy():
    f = lambda x: (np.log(x) * np.sqrt(x))[:, None]
    val, _ = segment_integrals(f, np.array([0.0, 1.0]))
    ref = integrate.quad(lambda x: np.log(x) * np.sqrt(x), 0, 1, epsabs=1e-14)[0]
    assert val[0, 0] == pytest.approx(ref, rel=1e-10)
    assert ref == pytest.approx(-4.0 / 9.0, rel=1e-12)


def test_inverse_square_root_blowup():
    f = lambda x: (1.0 / np.sqrt(1.0 - x))[:, None]
    val, _ = segment_integrals(f, np.array([0.0, 0.5, 1.0 - 1e-10]))
    assert val.sum() == pytest.approx(2.0 * (1 - np.sqrt(1e-10)), rel=1e-10)


def test_empty_segments():
    f = lambda x: np.ones((x.size, 1))
    val, _ = segment_integrals(f, np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(val[:, 0], [0.0, 1.0], atol=1e-15)
