from pydantic import Field

from capflow.utils.base.schema import SchemaBase


class KernelParams(SchemaBase):
    """Parameters of the kernel ``K^i(x) = x_i^(2n-1) / |x|^(2n-1+alpha)``."""

    alpha: float = Field(gt=0.0, le=1.0)
    n: int = Field(ge=1)
    d: int = Field(2, ge=2)

    @property
    def exponent(self) -> int:
        return 2 * self.n - 1


class FourierPoly(SchemaBase):
    """Coefficients of the Fourier-side polynomial, up to a positive constant.

    ``a[k]`` multiplies ``x1^(2(n-k-1)) |x|^(2k)``; ``b[l]`` is the coefficient
    of the monomial ``x1^(2l) x2^(2(n-1-l))`` once that sum is expanded.
    """

    n: int = Field(ge=1)
    alpha: float = Field(gt=0.0, lt=1.0)
    a: tuple[float, ...]
    b: tuple[float, ...]

    @property
    def all_negative(self) -> bool:
        return all(coefficient < 0.0 for coefficient in self.b)
