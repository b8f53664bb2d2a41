"""Holomorphic k-differentials on the quotient surface via Poincare series.

A weight-k form is realized as the truncated sum
Theta(z) = sum_{gamma} seed(gamma z) (gamma'(z))^k over the distinct group
elements of word length <= radius.  The truncation is never treated as
exactly automorphic: only the residual and its decay in the radius are
meaningful, and that is all the tests assert.
"""

from __future__ import annotations

import json

import numpy as np

from . import kernels
from .hyp import FuchsianGroup, GroupWord, Moebius, element_ball
from .jets import (
    JetProvider,
    PowerJet,
    jet_from_taylor,
    linear_power_taylor,
    mobius_shift_taylor,
    series_compose,
    series_mul,
    taylor_from_jet,
)

__all__ = [
    "AutomorphicForm",
    "poincare_series",
    "automorphy_residual",
    "default_seed",
    "default_samples",
    "form_from_descriptor",
]


def default_seed(k: int, pole: complex = -1j) -> PowerJet:
    """The standard decaying seed (z - pole)^(-2k) with the pole below R."""
    return PowerJet(1.0, pole, -2 * k)


class AutomorphicForm(JetProvider):
    """Truncated Poincare series of weight k over a Fuchsian group."""

    def __init__(self, group: FuchsianGroup, weight: int, seed: JetProvider, radius: int):
        super().__init__()
        if weight < 2:
            raise ValueError("weight must be >= 2 for an absolutely convergent series")
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.group = group
        self.weight = int(weight)
        self.radius = int(radius)
        self.seed = seed
        self._mats = element_ball(group, radius)

    @property
    def k(self) -> int:
        return self.weight

    def _taylor(self, z: complex, order: int) -> np.ndarray:
        if isinstance(self.seed, PowerJet):
            return kernels.poincare_taylor(
                self._mats, z, self.weight, order,
                self.seed.pole, self.seed.exponent, self.seed.scale,
            )
        return self._taylor_generic(z, order)

    def _taylor_generic(self, z: complex, order: int) -> np.ndarray:
        mats = self._mats
        a, b = mats[:, 0, 0], mats[:, 0, 1]
        c, d = mats[:, 1, 0], mats[:, 1, 1]
        w0, shift = mobius_shift_taylor(a, b, c, d, z, order)
        seed_tay = taylor_from_jet(self.seed.evaluate_batch(w0, order))
        comp = series_compose(seed_tay, shift)
        fac = linear_power_taylor(c, d, z, -2 * self.weight, order)
        return series_mul(comp, fac).sum(axis=0)

    def values(self, zs) -> np.ndarray:
        """Series values at many points with a single pass over the elements."""
        zs = np.asarray(zs, dtype=complex)
        if isinstance(self.seed, PowerJet):
            flat = kernels.poincare_values(
                self._mats, zs.ravel(), self.weight,
                self.seed.pole, self.seed.exponent, self.seed.scale,
            )
            return flat.reshape(zs.shape)
        return self.evaluate_batch(zs, 0)[..., 0]


def poincare_series(group: FuchsianGroup, k: int, seed: JetProvider, radius: int) -> AutomorphicForm:
    return AutomorphicForm(group, k, seed, radius)


def _as_moebius(g) -> Moebius:
    if isinstance(g, Moebius):
        return g
    if isinstance(g, GroupWord):
        return Moebius.from_array(g.matrix)
    return Moebius.from_array(np.asarray(g, dtype=float))


def automorphy_residual(form, samples) -> float:
    """max over samples (gamma, z) of |F(gamma z) (gamma'(z))^k - F(z)|."""
    worst = 0.0
    k = form.weight if isinstance(form, AutomorphicForm) else form.k
    for g, z in samples:
        m = _as_moebius(g)
        z = complex(z)
        if z.imag <= 0:
            raise ValueError("sample points must be interior to H")
        gz = (m.a * z + m.b) / (m.c * z + m.d)
        dg = (m.c * z + m.d) ** (-2)
        val = form.evaluate(gz, 0)[0] * dg**k - form.evaluate(z, 0)[0]
        worst = max(worst, abs(val))
    return worst


def default_samples(group: FuchsianGroup, points=(1j, 0.2 + 0.9j, -0.35 + 1.4j)):
    """Generator/point pairs used by the residual-decay checks."""
    out = []
    for i in range(2 * group.genus):
        w = group.word([i + 1])
        for z in points:
            out.append((w, complex(z)))
    return out


def form_from_descriptor(group: FuchsianGroup, descriptor: str | dict) -> AutomorphicForm:
    """Build a form from the JSON descriptor.

    Example: {"k": 2, "radius": 6,
              "seed": {"type": "rational", "poles": [[0, -1]], "power": -4}}
    where the pole entry is [re, im].
    """
    data = json.loads(descriptor) if isinstance(descriptor, str) else descriptor
    k = int(data["k"])
    radius = int(data["radius"])
    seed_spec = data.get("seed", {"type": "rational", "poles": [[0.0, -1.0]], "power": -2 * k})
    if seed_spec.get("type", "rational") != "rational":
        raise ValueError(f"unknown seed type {seed_spec.get('type')!r}")
    poles = seed_spec.get("poles", [[0.0, -1.0]])
    if len(poles) != 1:
        raise ValueError("power-type seeds take a single pole")
    pole = complex(poles[0][0], poles[0][1])
    if pole.imag >= 0:
        raise ValueError("seed pole must lie in the lower half-plane")
    power = int(seed_spec.get("power", -2 * k))
    scale = complex(seed_spec.get("scale", 1.0))
    return AutomorphicForm(group, k, PowerJet(scale, pole, power), radius)
