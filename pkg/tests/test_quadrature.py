import numpy as np
import pytest

from gbdt.errors import DomainError
from gbdt.quadrature import cumulative_simpson, require_uniform, simpson


def test_quadratic_exact_at_every_node():
    xs = np.linspace(0.0, 2.0, 11)
    y = 3.0 * xs**2 - xs + 2.0
    exact = xs**3 - 0.5 * xs**2 + 2.0 * xs
    got = cumulative_simpson(y, xs[1] - xs[0])
    np.testing.assert_allclose(got, exact, rtol=0, atol=1e-13)


@pytest.mark.parametrize("n", [3, 4, 11, 12, 101])
def test_exponential_accuracy(n):
    # Odd nodes carry the half-pair truncation ~ f'''(x) dx^4 / 24.
    xs = np.linspace(0.0, 1.0, n)
    got = cumulative_simpson(np.exp(xs), xs[1] - xs[0])
    exact = np.exp(xs) - 1.0
    dx = xs[1] - xs[0]
    assert np.max(np.abs(got - exact)) <= 0.5 * dx**4


def test_fourth_order_convergence():
    def err(n):
        xs = np.linspace(0.0, 1.0, n)
        got = simpson(np.exp(xs), xs[1] - xs[0])
        return abs(got - (np.e - 1.0))

    ratio = err(11) / err(21)
    assert 10.0 < ratio < 25.0  # ~2^4


def test_matrix_valued_complex():
    a = 0.3 + 0.7j
    xs = np.linspace(0.0, 1.0, 201)
    y = np.exp(a * xs)[:, None, None] * np.array([[1.0, 2.0], [0.0, 1.0]])
    got = cumulative_simpson(y, xs[1] - xs[0])
    exact = ((np.exp(a * xs) - 1.0) / a)[:, None, None] * np.array(
        [[1.0, 2.0], [0.0, 1.0]]
    )
    assert np.max(np.abs(got - exact)) < 1e-9


def test_tiny_inputs():
    assert np.array_equal(cumulative_simpson(np.array([5.0]), 0.1), [0.0])
    got = cumulative_simpson(np.array([1.0, 3.0]), 0.5)
    np.testing.assert_allclose(got, [0.0, 1.0])


def test_require_uniform():
    assert require_uniform(np.array([0.0, 0.5, 1.0])) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        require_uniform(np.array([0.0, 0.5, 0.4]))
    with pytest.raises(DomainError):
        require_uniform(np.array([0.0, 0.5, 1.5]))
    with pytest.raises(DomainError):
        require_uniform(np.array([1.0]))
