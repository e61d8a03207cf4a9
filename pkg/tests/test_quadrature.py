import math

import numpy as np
import pytest

from lrcone.errors import NumericFailureError
from lrcone.quadrature import integrate_adaptive_simpson


def test_scalar_integral():
    value, error = integrate_adaptive_simpson(math.sin, 0.0, math.pi, tol=1e-10)
    assert isinstance(value, float)
    assert value == pytest.approx(2.0, abs=1e-9)
    assert error <= 1e-10


def test_vector_integrand_shares_the_subdivision():
    value, _ = integrate_adaptive_simpson(lambda x: np.array([x, x ** 2, math.exp(x)]), 0.0, 1.0, tol=1e-10)
    assert np.allclose(value, [0.5, 1.0 / 3.0, math.e - 1.0], atol=1e-9)


def test_reversed_and_empty_intervals():
    value, _ = integrate_adaptive_simpson(lambda x: x, 1.0, 0.0)
    assert value == pytest.approx(-0.5)
    value, error = integrate_adaptive_simpson(lambda x: x, 2.0, 2.0)
    assert value == 0.0
    assert error == 0.0


def test_kink_is_resolved_by_refinement():
    value, _ = integrate_adaptive_simpson(lambda x: abs(x - 0.3), 0.0, 1.0, tol=1e-8)
    assert value == pytest.approx(0.3 ** 2 / 2 + 0.7 ** 2 / 2, abs=1e-7)


def test_max_depth_raises_with_diagnostics():
    with pytest.raises(NumericFailureError) as excinfo:
        integrate_adaptive_simpson(math.sqrt, 0.0, 1.0, tol=1e-14, max_depth=2)
    assert excinfo.value.diagnostics["max_depth"] == 2
