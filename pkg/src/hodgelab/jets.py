"""Point-evaluable derivative stacks and truncated power-series arithmetic.

A jet provider presents a holomorphic function through
``evaluate(z, order) -> [f(z), f'(z), ..., f^(order)(z)]``.  Internally most
manipulation happens on truncated Taylor-coefficient arrays; helpers below
convert between the two forms.  Evaluations are cached per (point, order)
so replays are bit-identical.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "JetProvider",
    "ZeroJet",
    "ConstantJet",
    "PolynomialJet",
    "PowerJet",
    "RationalJet",
    "jet_of_rational",
    "taylor_from_jet",
    "jet_from_taylor",
    "series_mul",
    "series_compose",
    "series_recip",
    "series_int_pow",
    "series_deriv",
    "series_ode_extend",
    "mobius_shift_taylor",
    "linear_power_taylor",
]

_FACT = np.array([math.factorial(k) for k in range(40)], dtype=float)


def taylor_from_jet(jet: np.ndarray) -> np.ndarray:
    jet = np.asarray(jet, dtype=complex)
    return jet / _FACT[: jet.shape[-1]]


def jet_from_taylor(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    return c * _FACT[: c.shape[-1]]


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product; output length = min(len(a), len(b))."""
    m = min(a.shape[-1], b.shape[-1])
    out = np.zeros(a.shape[:-1] + (m,), dtype=complex)
    for k in range(m):
        out[..., k] = np.sum(a[..., : k + 1] * b[..., k::-1], axis=-1)
    return out


def series_compose(f: np.ndarray, u: np.ndarray) -> np.ndarray:
    """f(u(t)) truncated, where u has zero constant term.

    ``f`` holds Taylor coefficients of f about u's basepoint value, ``u``
    those of the inner shift (u[...,0] must vanish).  Batched on leading axes.
    """
    if np.max(np.abs(u[..., 0])) > 1e-13:
        raise ValueError("inner series must have zero constant term")
    m = min(f.shape[-1], u.shape[-1])
    shape = np.broadcast_shapes(f.shape[:-1], u.shape[:-1])
    out = np.zeros(shape + (m,), dtype=complex)
    out[..., 0] = f[..., m - 1]
    for k in range(m - 2, -1, -1):
        out = series_mul(out, u[..., :m])
        out[..., 0] += f[..., k]
    return out


def series_recip(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1]
    out = np.zeros_like(np.asarray(a, dtype=complex))
    out[..., 0] = 1.0 / a[..., 0]
    for k in range(1, m):
        acc = np.sum(a[..., 1 : k + 1] * out[..., k - 1 :: -1], axis=-1)
        out[..., k] = -acc / a[..., 0]
    return out


def series_int_pow(a: np.ndarray, p: int) -> np.ndarray:
    if p < 0:
        return series_int_pow(series_recip(a), -p)
    out = np.zeros_like(np.asarray(a, dtype=complex))
    out[..., 0] = 1.0
    base = a
    while p:
        if p & 1:
            out = series_mul(out, base)
        p >>= 1
        if p:
            base = series_mul(base, base)
    return out


def series_deriv(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1]
    k = np.arange(1, m)
    return a[..., 1:] * k


def series_ode_extend(coeff_taylors: list[np.ndarray], y_head: np.ndarray, order: int) -> np.ndarray:
    """Extend a solution jet of y^(n) + sum Q_j y^(n-j) = 0 to higher order.

    ``coeff_taylors`` are the Taylor series of Q_2..Q_n at the point (each of
    length >= order - n + 1), ``y_head`` the first n Taylor coefficients.
    Returns Taylor coefficients of y up to ``order``.
    """
    n = len(coeff_taylors) + 1
    y = np.zeros(order + 1, dtype=complex)
    y[:n] = y_head
    for m in range(n, order + 1):
        # Taylor coefficient m of y from derivative order m - n of the ODE:
        # (m)! / (m-n)! * y_m = - sum_j [Q_j * y^(n-j)]_{m-n}
        s = m - n
        acc = 0.0 + 0.0j
        for j, q in enumerate(coeff_taylors, start=2):
            # Taylor series of y^(n-j) has coefficient at index i:
            # y_{i+n-j} * (i+n-j)!/i!
            for i in range(s + 1):
                qi = q[s - i] if s - i < len(q) else 0.0
                acc += qi * y[i + n - j] * _FACT[i + n - j] / _FACT[i]
        y[m] = -acc * _FACT[s] / _FACT[m]
    return y


def mobius_shift_taylor(a, b, c, d, z0: complex, order: int) -> tuple[np.ndarray, np.ndarray]:
    """(w0, shift) for w = (az+b)/(cz+d) about z0; shift[0] = 0.

    Batched when a,b,c,d are arrays.  Uses w^(j)(z) = (-1)^{j-1} j! det *
    c^{j-1} (cz+d)^{-(j+1)}; generators are unimodular so det = 1.
    """
    a, b, c, d = (np.asarray(x) for x in (a, b, c, d))
    den = c * z0 + d
    w0 = (a * z0 + b) / den
    shape = np.broadcast_shapes(a.shape, b.shape, c.shape, d.shape)
    shift = np.zeros(shape + (order + 1,), dtype=complex)
    if order >= 1:
        j = np.arange(1, order + 1)
        shift[..., 1:] = (-c[..., None]) ** (j - 1) / den[..., None] ** (j + 1)
    return w0, shift


def _binom_gen(e: int, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= (e - i) / (i + 1)
    return out


def linear_power_taylor(c, d, z0: complex, exponent: int, order: int) -> np.ndarray:
    """Taylor coefficients of (cz+d)^exponent about z0 (integer exponent)."""
    c, d = np.asarray(c), np.asarray(d)
    den = c * z0 + d
    j = np.arange(order + 1)
    binom = np.array([_binom_gen(exponent, int(k)) for k in j])
    return binom * den[..., None] ** (exponent - j) * c[..., None] ** j


# ---------------------------------------------------------------------------
# providers
# ---------------------------------------------------------------------------

class JetProvider:
    """Base class: caching evaluate() over a _jet_taylor implementation."""

    max_order: int = 64

    def __init__(self):
        self._cache: dict[tuple[complex, int], np.ndarray] = {}

    def _taylor(self, z: complex, order: int) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, z: complex, order: int = 0) -> np.ndarray:
        """Derivative stack [f, f', ..., f^(order)] at z."""
        if order > self.max_order:
            raise ValueError(f"order {order} exceeds capability {self.max_order}")
        key = (complex(z), int(order))
        hit = self._cache.get(key)
        if hit is None:
            hit = jet_from_taylor(self._taylor(complex(z), int(order)))
            self._cache[key] = hit
        return hit.copy()

    def evaluate_batch(self, zs: np.ndarray, order: int = 0) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        out = np.empty(zs.shape + (order + 1,), dtype=complex)
        for idx in np.ndindex(zs.shape):
            out[idx] = self.evaluate(zs[idx], order)
        return out

    def __call__(self, z: complex) -> complex:
        return complex(self.evaluate(z, 0)[0])


class ZeroJet(JetProvider):
    def _taylor(self, z, order):
        return np.zeros(order + 1, dtype=complex)

    def evaluate_batch(self, zs, order=0):
        zs = np.asarray(zs, dtype=complex)
        return np.zeros(zs.shape + (order + 1,), dtype=complex)


class ConstantJet(JetProvider):
    def __init__(self, value: complex):
        super().__init__()
        self.value = complex(value)

    def _taylor(self, z, order):
        out = np.zeros(order + 1, dtype=complex)
        out[0] = self.value
        return out

    def evaluate_batch(self, zs, order=0):
        zs = np.asarray(zs, dtype=complex)
        out = np.zeros(zs.shape + (order + 1,), dtype=complex)
        out[..., 0] = self.value
        return out


class PolynomialJet(JetProvider):
    """p(z) with ascending coefficients."""

    def __init__(self, coeffs):
        super().__init__()
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def _taylor(self, z, order):
        out = np.zeros(order + 1, dtype=complex)
        n = len(self.coeffs)
        for k in range(min(order, n - 1) + 1):
            # Taylor coefficient k of p about z
            acc = 0.0 + 0.0j
            for m in range(k, n):
                acc += self.coeffs[m] * _binom_gen(m, k) * z ** (m - k)
            out[k] = acc
        return out


class PowerJet(JetProvider):
    """scale * (z - pole)^exponent with integer exponent (possibly negative)."""

    def __init__(self, scale: complex, pole: complex, exponent: int):
        super().__init__()
        self.scale = complex(scale)
        self.pole = complex(pole)
        self.exponent = int(exponent)

    def _taylor(self, z, order):
        if abs(z - self.pole) < 1e-8 and self.exponent < 0:
            raise ValueError(f"evaluation within 1e-8 of the pole {self.pole}")
        return self.scale * linear_power_taylor(
            np.asarray(1.0), -self.pole, z, self.exponent, order
        )

    def evaluate_batch(self, zs, order=0):
        zs = np.asarray(zs, dtype=complex)
        if self.exponent < 0 and np.any(np.abs(zs - self.pole) < 1e-8):
            raise ValueError(f"evaluation within 1e-8 of the pole {self.pole}")
        j = np.arange(order + 1)
        fall = np.array(
            [math.prod(range(self.exponent - k + 1, self.exponent + 1)) for k in j],
            dtype=float,
        )
        return self.scale * fall * (zs[..., None] - self.pole) ** (self.exponent - j)


class RationalJet(JetProvider):
    """num(z)/den(z) for polynomials given by ascending coefficient lists."""

    def __init__(self, num, den):
        super().__init__()
        self.num = np.asarray(num, dtype=complex)
        self.den = np.asarray(den, dtype=complex)
        self._roots = np.roots(self.den[::-1]) if len(self.den) > 1 else np.array([])

    def _taylor(self, z, order):
        if len(self._roots) and np.min(np.abs(z - self._roots)) < 1e-8:
            raise ValueError("evaluation within 1e-8 of a pole")
        pn = PolynomialJet(self.num)._taylor(z, order)
        pd = PolynomialJet(self.den)._taylor(z, order)
        return series_mul(pn, series_recip(pd))


def jet_of_rational(coeffs, poles) -> JetProvider:
    """Rational function coeffs(z) / prod (z - p)^m from a pole list.

    ``poles`` is a list of either bare pole locations or (pole, multiplicity)
    pairs.  Differentiation is exact to any order.
    """
    den = np.array([1.0 + 0.0j])
    for entry in poles:
        if isinstance(entry, (tuple, list)):
            p, m = complex(entry[0]), int(entry[1])
        else:
            p, m = complex(entry), 1
        for _ in range(m):
            den = np.convolve(den, np.array([-p, 1.0], dtype=complex))
    return RationalJet(coeffs, den)
