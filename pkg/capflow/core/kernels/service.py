import math

import numpy as np

from capflow.core.geometry.schema import as_point
from capflow.core.kernels.schema import FourierPoly, KernelParams
from capflow.utils.cli_utils.exception import (
    AxisOutOfRange,
    ParameterDomainError,
    SingularPoint,
)

# Products of shifted odd numbers alternate in sign inside the Fourier
# coefficients; they are accumulated in extended precision.
_wide = np.longdouble


def kernel_field(params: KernelParams, vectors: np.ndarray) -> np.ndarray:
    """Evaluate ``K_{alpha,n}`` on an array of vectors of shape ``(..., d)``.

    Zero vectors map to zero, which is the diagonal convention used by every
    energy in this package.
    """
    vectors = np.asarray(vectors, dtype=float)
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = vectors / safe
    values = unit ** params.exponent * safe ** (-params.alpha)
    return np.where(norms > 0.0, values, 0.0)


def kernel_vector(params: KernelParams, x) -> np.ndarray:
    x = as_point(x, params.d)
    if not np.any(x):
        raise SingularPoint("the kernel is singular at the origin")
    return kernel_field(params, x)


def kernel_component(params: KernelParams, axis: int, x) -> float:
    if not 0 <= axis < params.d:
        raise AxisOutOfRange(f"axis {axis} is outside 0..{params.d - 1}")
    return float(kernel_vector(params, x)[axis])


def _check_open_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")


def _odd_shifted_product(k: int, alpha: float) -> np.longdouble:
    """``(1 - alpha)(3 - alpha)...(2k - 1 - alpha)``."""
    product = _wide(1)
    for j in range(1, k + 1):
        product *= _wide(2 * j - 1) - _wide(alpha)
    return product


def _even_shifted_product(l: int, alpha: float) -> np.longdouble:
    """``alpha(alpha + 2)...(alpha + 2(l - 1))``, empty for ``l = 0``."""
    product = _wide(1)
    for j in range(l):
        product *= _wide(alpha) + _wide(2 * j)
    return product


def _factorial(m: int) -> np.longdouble:
    return _wide(math.factorial(m))


def _coefficient_sum(n: int, l: int, alpha: float) -> np.longdouble:
    total = _wide(0)
    for k in range(1, l + 2):
        term = _odd_shifted_product(k, alpha) / (
            _wide(2) ** (n - k) * _factorial(2 * k - 1) * _factorial(l + 1 - k)
        )
        total += -term if k % 2 else term
    return total


def fourier_poly_coeffs(n: int, alpha: float) -> FourierPoly:
    if n < 1:
        raise ParameterDomainError(f"n must be positive, got {n}")
    _check_open_alpha(alpha)
    a = []
    for k in range(n):
        value = _odd_shifted_product(n - k, alpha) / (
            _factorial(2 * n - 1 - 2 * k) * _wide(2) ** k * _factorial(k)
        )
        a.append(float(value if (n - k) % 2 == 0 else -value))
    b = [float(_coefficient_sum(n, l, alpha) / _factorial(n - l - 1)) for l in range(n)]
    return FourierPoly(n=n, alpha=alpha, a=tuple(a), b=tuple(b))


def expand_fourier_poly(n: int, alpha: float) -> tuple[float, ...]:
    """Expand ``sum_k a_k x1^(2(n-k-1)) (x1^2 + x2^2)^k`` into monomials.

    Returns the coefficient of ``x1^(2l) x2^(2(n-1-l))`` for each ``l``.
    """
    poly = fourier_poly_coeffs(n, alpha)
    coefficients = [0.0] * n
    for k, a_k in enumerate(poly.a):
        for j in range(k + 1):
            # (x1^2 + x2^2)^k contributes x1^(2(k-j)) x2^(2j)
            l = n - 1 - j
            coefficients[l] += a_k * math.comb(k, j)
    return tuple(coefficients)


def _identity_rhs(n: int, l: int, alpha: float) -> np.longdouble:
    return -(_wide(1) - _wide(alpha)) * _even_shifted_product(l, alpha) / (
        _wide(2) ** (n - 1 - l) * _factorial(2 * l + 1)
    )


def _check_index(n: int, l: int) -> None:
    if n < 1 or not 0 <= l <= n - 1:
        raise AxisOutOfRange(f"index l={l} is outside 0..{n - 1}")


def coeff_identity_residual(n: int, l: int, alpha: float) -> float:
    """Left-hand side minus right-hand side of the alternating-sum identity."""
    _check_index(n, l)
    _check_open_alpha(alpha)
    return float(_coefficient_sum(n, l, alpha) - _identity_rhs(n, l, alpha))


def coeff_identity_rhs(n: int, l: int, alpha: float) -> float:
    """Right-hand side alone; the residual is normalised by its magnitude."""
    _check_index(n, l)
    _check_open_alpha(alpha)
    return float(_identity_rhs(n, l, alpha))


def riesz_exponent(alpha: float, d: int = 2) -> float:
    """Smoothness ``s`` with ``d - 3s/2 = alpha``, the Riesz capacity paired with ``p = 3/2``."""
    if not 0.0 < alpha <= 1.0:
        raise ParameterDomainError(f"alpha must lie in (0, 1], got {alpha}")
    return 2.0 * (d - alpha) / 3.0
