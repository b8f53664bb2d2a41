"""Representation-variety utilities for SL_n(C) surface-group images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Representation",
    "relation_residual_rep",
    "principal_embedding",
    "commutant_dimension",
    "unitarity_margin",
    "clebsch_gordon_dims",
    "moduli_dimensions",
    "ModuliDimensions",
]


@dataclass
class Representation:
    """Generator images A_1, B_1, ..., A_g, B_g in SL_n(C)."""

    n: int
    images: list[np.ndarray]
    genus: int = 2

    def __post_init__(self):
        self.images = [np.asarray(m, dtype=complex) for m in self.images]
        if len(self.images) != 2 * self.genus:
            raise ValueError("need 2*genus generator images")
        for m in self.images:
            if m.shape != (self.n, self.n):
                raise ValueError("image size does not match n")
            if abs(np.linalg.det(m) - 1.0) > 1e-8:
                raise ValueError("generator image is not special linear")

    def letter_image(self, letter: int) -> np.ndarray:
        m = self.images[abs(letter) - 1]
        return m if letter > 0 else np.linalg.inv(m)

    def word_image(self, letters) -> np.ndarray:
        out = np.eye(self.n, dtype=complex)
        for l in letters:
            out = out @ self.letter_image(l)
        return out


def relation_residual_rep(rho: Representation, signed: bool = False) -> float:
    """Max-entry norm of prod_i [A_i, B_i] - I (or min over +-I if signed)."""
    for m in rho.images:
        if abs(np.linalg.det(m)) < 1e-10:
            raise ValueError("singular generator image")
    out = np.eye(rho.n, dtype=complex)
    for i in range(rho.genus):
        a, b = rho.images[2 * i], rho.images[2 * i + 1]
        out = out @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    eye = np.eye(rho.n)
    plus = float(np.max(np.abs(out - eye)))
    if not signed:
        return plus
    return min(plus, float(np.max(np.abs(out + eye))))


def principal_embedding(n: int, m) -> np.ndarray:
    """Action of an SL2 matrix on binary forms of degree n-1.

    Row i holds the coefficients of (az+b)^(n-1-i) (cz+d)^i on the monomial
    basis z^(n-1), ..., z, 1, so emb(M N) = emb(M) emb(N) and the image of
    diag(l, 1/l) is diag(l^(n-1), ..., l^(1-n)).
    """
    m = np.asarray(m, dtype=complex)
    if abs(np.linalg.det(m) - 1.0) > 1e-10:
        raise ValueError("principal embedding needs a unimodular matrix")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        p = np.array([1.0 + 0.0j])  # ascending coefficients
        for _ in range(n - 1 - i):
            p = np.convolve(p, np.array([b, a]))
        for _ in range(i):
            p = np.convolve(p, np.array([d, c]))
        full = np.zeros(n, dtype=complex)
        full[: len(p)] = p
        out[i, :] = full[::-1]
    return out


def commutant_dimension(rho: Representation, svd_rtol: float = 1e-8) -> int:
    """dim of {X : X A_i = A_i X for all i} by stacked-Sylvester nullity."""
    n = rho.n
    eye = np.eye(n)
    blocks = []
    for m in rho.images:
        blocks.append(np.kron(eye, m) - np.kron(m.T, eye))
    stacked = np.concatenate(blocks, axis=0)
    sv = np.linalg.svd(stacked, compute_uv=False)
    top = sv[0] if len(sv) else 0.0
    if top == 0.0:
        return n * n
    return int(np.sum(sv <= svd_rtol * top))


def unitarity_margin(rho: Representation, radius: int, cap: int = 12) -> float:
    """Max over word-ball images of the max-entry norm of M*M - I."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > cap:
        raise ValueError(f"radius {radius} exceeds the cap {cap}")
    eye = np.eye(rho.n)
    letters = [l for i in range(1, 2 * rho.genus + 1) for l in (i, -i)]
    worst = 0.0
    frontier = [((), np.eye(rho.n, dtype=complex))]
    for _ in range(radius):
        nxt = []
        for word, mat in frontier:
            for l in letters:
                if word and word[-1] == -l:
                    continue
                m = mat @ rho.letter_image(l)
                nxt.append((word + (l,), m))
                worst = max(worst, float(np.max(np.abs(np.conj(m.T) @ m - eye))))
        frontier = nxt
    return worst


def clebsch_gordon_dims(n: int) -> list[int]:
    """Dimensions 2j-1, j = 2..n, of the traceless factors of End V_q."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return [2 * j - 1 for j in range(2, n + 1)]


@dataclass(frozen=True)
class ModuliDimensions:
    n: int
    g: int
    betti: int
    hitchin_base: int

    def eichler_h1(self, q: int) -> int:
        """dim H^1 of the weight-q local system: twice (2q-1)(g-1)."""
        if q < 2:
            raise ValueError("q must be >= 2")
        return 2 * (2 * q - 1) * (self.g - 1)


def moduli_dimensions(n: int, g: int) -> ModuliDimensions:
    if g < 2 or n < 2:
        raise ValueError("need n >= 2 and g >= 2")
    betti = (n * n - 1) * (2 * g - 2)
    base = sum((2 * j - 1) * (g - 1) for j in range(2, n + 1))
    dims = ModuliDimensions(n=n, g=g, betti=betti, hitchin_base=base)
    assert dims.betti == 2 * dims.hitchin_base
    return dims
