"""Complex log-Gamma and the Gamma-product forms everything else is built from.

The Q-operator eigenvalue, the Harish-Chandra c-function and the renormalised
eigenfunction weights are all products of Gamma values.  Those products
overflow in linear space already for N ~ 6 and lam ~ 4, so they are assembled
here in log-polar form (log modulus + phase) and exponentiated last.

log_gamma is a fixed Lanczos approximation (g = 607/128, 15 terms) with the
reflection formula for Re z < 1/2, so results do not depend on the platform's
complex math library.  The coefficient set is validated against
arbitrary-precision reference values frozen into the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .chamber import REGULARITY_TOL, weyl_vector
from .errors import GammaPoleError, IrregularParameterError

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C0 = 0.99999999999999709182
_LANCZOS_COF = (
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_LOG_SQRT_2PI = 0.91893853320467274178
_POLE_TOL = 1e-12


def _check_pole(z: complex):
    if abs(z.imag) < _POLE_TOL:
        nearest = round(z.real)
        if nearest <= 0 and abs(z.real - nearest) < _POLE_TOL:
            raise GammaPoleError(f"Gamma pole at z = {z}")


def _log_gamma_right(z: complex) -> complex:
    # Lanczos sum, valid for Re z >= 0.5.
    zm1 = z - 1.0
    t = zm1 + _LANCZOS_G + 0.5
    ser = _LANCZOS_C0
    for j, c in enumerate(_LANCZOS_COF):
        ser += c / (zm1 + j + 1.0)
    return _LOG_SQRT_2PI + (zm1 + 0.5) * cmath.log(t) - t + cmath.log(ser)


def log_gamma(z) -> complex:
    """log Gamma(z), principal branch for Re z >= 1/2.

    For Re z < 1/2 the reflection formula is used; there the imaginary part
    may differ from the principal branch by a multiple of 2*pi (the exponential
    is always exactly Gamma(z), which is all the log-polar products need).

    Raises GammaPoleError at the nonpositive integers.
    """
    z = complex(z)
    _check_pole(z)
    if z.real >= 0.5:
        return _log_gamma_right(z)
    # Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return (
        math.log(math.pi)
        - cmath.log(cmath.sin(math.pi * z))
        - _log_gamma_right(1.0 - z)
    )


def gamma(z) -> complex:
    """Gamma(z) via exp(log_gamma(z))."""
    return cmath.exp(log_gamma(z))


@dataclass(frozen=True)
class GammaProduct:
    """A product of Gamma values in log-polar form.

    log_modulus is the log of the absolute value, phase the accumulated
    argument in radians (not reduced mod 2*pi; reduce when comparing).
    """

    log_modulus: float = 0.0
    phase: float = 0.0

    @classmethod
    def one(cls) -> "GammaProduct":
        return cls(0.0, 0.0)

    @classmethod
    def from_log(cls, log_value: complex) -> "GammaProduct":
        log_value = complex(log_value)
        return cls(log_value.real, log_value.imag)

    def times_gamma(self, z) -> "GammaProduct":
        lg = log_gamma(z)
        return GammaProduct(self.log_modulus + lg.real, self.phase + lg.imag)

    def div_gamma(self, z) -> "GammaProduct":
        lg = log_gamma(z)
        return GammaProduct(self.log_modulus - lg.real, self.phase - lg.imag)

    def times(self, other: "GammaProduct") -> "GammaProduct":
        return GammaProduct(
            self.log_modulus + other.log_modulus, self.phase + other.phase
        )

    def div(self, other: "GammaProduct") -> "GammaProduct":
        return GammaProduct(
            self.log_modulus - other.log_modulus, self.phase - other.phase
        )

    def scaled(self, factor: complex) -> "GammaProduct":
        factor = complex(factor)
        return GammaProduct(
            self.log_modulus + math.log(abs(factor)),
            self.phase + cmath.phase(factor),
        )

    @property
    def modulus(self) -> float:
        return math.exp(self.log_modulus)

    @property
    def value(self) -> complex:
        m = math.exp(self.log_modulus)
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))


def cosh_fourier_gamma(v: float, lam: float) -> float:
    """Gamma(lam/2 + iv) Gamma(lam/2 - iv) / Gamma(lam).

    Equals the Fourier integral of [2 cosh(w/2)]^(-lam) at frequency v;
    real and positive because the two Gamma factors are conjugate.
    """
    if lam <= 0:
        raise ValueError(f"need lam > 0, got {lam}")
    lg = log_gamma(complex(0.5 * lam, float(v)))
    return math.exp(2.0 * lg.real - log_gamma(lam).real)


def _ctilde(v: np.ndarray, lam: float) -> GammaProduct:
    out = GammaProduct.one()
    n = v.size
    for i in range(n):
        for j in range(i + 1, n):
            d = complex(v[i] - v[j])
            out = out.times_gamma(d).div_gamma(d + lam)
    return out


def _check_c_regular(v: np.ndarray, tol: float):
    n = v.size
    for i in range(n):
        for j in range(i + 1, n):
            d = complex(v[i] - v[j])
            nearest = round(d.real)
            if nearest <= 0 and abs(d - nearest) < tol:
                raise IrregularParameterError(
                    f"irregular spectral parameter: v_{i+1}-v_{j+1} = {d} "
                    f"within {tol:g} of a Gamma pole"
                )


def harish_chandra_c(v, lam: float, *, regularity_tol: float = REGULARITY_TOL) -> complex:
    """Generalised Harish-Chandra c-function c(v, lam) = ct(v)/ct(rho).

    ct(v) = prod_{i<j} Gamma(v_i - v_j) / Gamma(v_i - v_j + lam) and rho is
    the Weyl vector, so c(rho, lam) = 1 exactly by construction.
    """
    if lam <= 0:
        raise ValueError(f"need lam > 0, got {lam}")
    v = np.asarray(v, dtype=complex).reshape(-1)
    _check_c_regular(v, regularity_tol)
    if v.size < 2:
        return complex(1.0)
    rho = weyl_vector(v.size, lam)
    if np.allclose(v, rho, rtol=0.0, atol=0.0):
        return complex(1.0)
    return _ctilde(v, lam).div(_ctilde(rho.astype(complex), lam)).value


def harish_chandra_ctilde(v, lam: float) -> complex:
    """Unnormalised c-function ct(v, lam)."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return _ctilde(v, lam).value


@dataclass(frozen=True)
class SharpWeights:
    """Renormalisation factors of the sharp (momentum-space) eigenfunctions."""

    c_hat: GammaProduct
    w_hat: GammaProduct

    @property
    def c_hat_value(self) -> complex:
        return self.c_hat.value

    @property
    def w_hat_value(self) -> float:
        return self.w_hat.value.real


def sharp_weights(p, g: float, hbar: float = 1.0, mu: float = 1.0) -> SharpWeights:
    """C_hat(g;p) = prod_{i<j} Gamma(i b_ij) / Gamma(g/hbar + i b_ij) with
    b_ij = (p_i - p_j)/(hbar mu), and W_hat = 1 / |C_hat|^2.

    Each C_hat factor pairs with its conjugate under i <-> j, so W_hat is real
    and positive for real pairwise-distinct momenta.  Both are returned in
    log-polar form to avoid overflow.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if g <= 0 or hbar <= 0 or mu <= 0:
        raise ValueError("need g, hbar, mu > 0")
    lam = g / hbar
    c_hat = GammaProduct.one()
    n = p.size
    for i in range(n):
        for j in range(i + 1, n):
            b = (p[i] - p[j]) / (hbar * mu)
            if abs(b) < _POLE_TOL:
                raise GammaPoleError(
                    f"coincident momenta p_{i+1} = p_{j+1}: Gamma pole in C_hat"
                )
            c_hat = c_hat.times_gamma(complex(0.0, b)).div_gamma(complex(lam, b))
    w_hat = GammaProduct(-2.0 * c_hat.log_modulus, 0.0)
    return SharpWeights(c_hat=c_hat, w_hat=w_hat)
