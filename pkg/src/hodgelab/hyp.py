"""Hyperbolic geometry of the upper half-plane and the built-in genus-2 group.

The built-in cocompact group is derived from the regular hyperbolic octagon
with vertex angle pi/4, centered at i.  Sides are labeled
a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1 counterclockwise, so the side pairings
satisfy the surface relation [a1,b1][a2,b2] = 1 (verified numerically at
import of the group, not assumed).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Moebius",
    "FuchsianGroup",
    "GroupWord",
    "HPath",
    "mobius_apply",
    "hyp_distance",
    "geodesic_point",
    "octagon_group",
    "octagon_vertices",
    "relation_residual",
    "word_ball",
    "translate_path",
    "element_ball",
]

_DET_TOL = 1e-12
_WORD_RADIUS_CAP = 12


@dataclass(frozen=True)
class Moebius:
    """Element of SL2(R) acting on the upper half-plane."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-9:
            raise ValueError(f"matrix is not unimodular: det = {det!r}")

    @staticmethod
    def identity() -> "Moebius":
        return Moebius(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_array(m) -> "Moebius":
        m = np.asarray(m, dtype=float)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        s = math.copysign(math.sqrt(abs(det)), 1.0)
        m = m / s
        return Moebius(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def __matmul__(self, other: "Moebius") -> "Moebius":
        return Moebius.from_array(self.array() @ other.array())

    def inv(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a)

    def trace(self) -> float:
        return self.a + self.d

    def is_hyperbolic(self) -> bool:
        return abs(self.trace()) > 2.0

    def __call__(self, z: complex) -> complex:
        return mobius_apply(self, z)


def mobius_apply(m: Moebius, z: complex) -> complex:
    """Apply (az+b)/(cz+d); the input must lie in the open upper half-plane."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError(f"point {z} is not in the upper half-plane")
    return (m.a * z + m.b) / (m.c * z + m.d)


def hyp_distance(z: complex, w: complex) -> float:
    """Distance for the metric |dz|/Im z: cosh d = 1 + |z-w|^2/(2 Im z Im w)."""
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag <= 0:
        raise ValueError("hyp_distance needs interior points of H")
    x = abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    # acosh(1+x) computed stably for small x
    return float(np.log1p(x + math.sqrt(x * (x + 2.0))))


def _to_disk(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def _from_disk(w: complex) -> complex:
    return 1j * (1 + w) / (1 - w)


def geodesic_point(z: complex, w: complex, t: float) -> complex:
    """Point at parameter t in [0,1] on the geodesic from z to w."""
    if t == 0.0 or z == w:
        return complex(z)
    if t == 1.0:
        return complex(w)
    # move z to the disk origin; geodesics through 0 are diameters
    y = z.imag
    tz = Moebius(1.0 / math.sqrt(y), -z.real / math.sqrt(y), 0.0, math.sqrt(y))
    u = _to_disk(mobius_apply(tz, w))
    d = hyp_distance(z, w)
    r = math.tanh(0.5 * t * d)
    p = _from_disk(r * u / abs(u))
    return mobius_apply(tz.inv(), p)


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word in the group generators with its cached matrix.

    Letters are signed generator indices: +k for generator k (1-based),
    -k for its inverse.
    """

    letters: tuple[int, ...]
    matrix: np.ndarray = field(compare=False, repr=False)

    def __post_init__(self):
        for x, y in zip(self.letters, self.letters[1:]):
            if x == -y:
                raise ValueError(f"word {self.letters} is not freely reduced")

    def __len__(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters


class FuchsianGroup:
    """Cocompact surface group given by 2g generator matrices in SL2(R)."""

    def __init__(self, generators: list[Moebius], genus: int = 2):
        if len(generators) != 2 * genus:
            raise ValueError("need 2*genus generators")
        self.genus = genus
        self.generators = list(generators)
        self._gen_arrays = np.stack(
            [g.array() for g in generators] + [g.inv().array() for g in generators]
        )
        self._ball_cache: dict[int, np.ndarray] = {}
        for g in generators:
            if not g.is_hyperbolic():
                raise ValueError(f"generator {g} is not hyperbolic")

    def letter_matrix(self, letter: int) -> Moebius:
        if letter > 0:
            return self.generators[letter - 1]
        return self.generators[-letter - 1].inv()

    def word(self, letters) -> GroupWord:
        letters = tuple(int(x) for x in letters)
        m = np.eye(2)
        for l in letters:
            m = m @ self.letter_matrix(l).array()
        return GroupWord(letters, m)

    def word_moebius(self, w: GroupWord) -> Moebius:
        return Moebius.from_array(w.matrix)

    def to_json(self) -> str:
        gens = [[f(x) for x in (g.a, g.b, g.c, g.d)] for g in self.generators for f in [float]]
        return json.dumps({"genus": self.genus, "generators": gens})

    @staticmethod
    def from_json(text: str) -> "FuchsianGroup":
        data = json.loads(text)
        gens = [Moebius(*row) for row in data["generators"]]
        return FuchsianGroup(gens, genus=int(data["genus"]))


def relation_residual(group: FuchsianGroup) -> float:
    """Max-entry norm of prod_i [A_i, B_i] - sI, minimized over the sign s."""
    m = np.eye(2)
    for i in range(group.genus):
        a = group.generators[2 * i].array()
        b = group.generators[2 * i + 1].array()
        m = m @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    return float(
        min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2))))
    )


# ---------------------------------------------------------------------------
# the built-in octagon group
# ---------------------------------------------------------------------------

def _disk_shift(p: complex) -> np.ndarray:
    """SU(1,1) element sending p to the disk origin."""
    s = math.sqrt(1.0 - abs(p) ** 2)
    return np.array([[1.0, -p], [-p.conjugate(), 1.0]], dtype=complex) / s


def _disk_rot(theta: float) -> np.ndarray:
    return np.array(
        [[cmath.exp(0.5j * theta), 0.0], [0.0, cmath.exp(-0.5j * theta)]],
        dtype=complex,
    )


def _disk_apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _disk_carrier(p, q, p2, q2) -> np.ndarray:
    """Disk isometry mapping the directed segment p->q onto p2->q2."""
    tp, tp2 = _disk_shift(p), _disk_shift(p2)
    u = _disk_apply(tp, q)
    u2 = _disk_apply(tp2, q2)
    rot = _disk_rot(cmath.phase(u2) - cmath.phase(u))
    return np.linalg.inv(tp2) @ rot @ tp


_CAYLEY = np.array([[1j, 1j], [-1.0, 1.0]], dtype=complex) / cmath.sqrt(2j)


def _disk_to_H(m: np.ndarray) -> Moebius:
    h = _CAYLEY @ m @ np.linalg.inv(_CAYLEY)
    h = h / cmath.sqrt(np.linalg.det(h))
    # SU(1,1) conjugates into SL2(R) up to an overall +-1 phase
    if np.max(np.abs(h.imag)) > np.max(np.abs((1j * h).imag)):
        h = 1j * h
    if np.max(np.abs(h.imag)) > 1e-10:
        raise RuntimeError("Cayley transport did not produce a real matrix")
    hr = h.real
    if np.trace(hr) < 0:
        hr = -hr
    return Moebius.from_array(hr)


def _octagon_disk_vertices() -> list[complex]:
    # regular octagon with vertex angle pi/4: circumradius R has
    # cosh R = cot^2(pi/8), so the euclidean vertex radius is tanh(R/2)
    cosh_r = 1.0 / math.tan(math.pi / 8) ** 2
    r = math.sqrt((cosh_r - 1.0) / (cosh_r + 1.0))
    return [r * cmath.exp(1j * j * math.pi / 4) for j in range(8)]


def octagon_vertices() -> list[complex]:
    """Corners of the fundamental octagon, in H, counterclockwise from i's east."""
    return [_from_disk(v) for v in _octagon_disk_vertices()]


def _build_octagon_group() -> FuchsianGroup:
    v = _octagon_disk_vertices()
    # Side s_j runs from v[j] to v[j+1].  The basic pairing map sends the
    # directed side s2 = (v3 -> v2) onto s0 = (v0 -> v1); its conjugates by
    # k steps of the pi/4 rotation pair s_{2+k} with s_k.  With p_k that
    # conjugate, the four maps (p0, p1^-1, p4, p5^-1) satisfy the surface
    # relation [a1,b1][a2,b2] = 1 (checked below against 1e-10).
    p0 = _disk_carrier(v[3], v[2], v[0], v[1])
    rot = _disk_rot(math.pi / 4)

    def conj(k: int) -> np.ndarray:
        rk = np.linalg.matrix_power(rot, k)
        return rk @ p0 @ np.linalg.inv(rk)

    gens = [
        _disk_to_H(conj(0)),
        _disk_to_H(np.linalg.inv(conj(1))),
        _disk_to_H(conj(4)),
        _disk_to_H(np.linalg.inv(conj(5))),
    ]
    group = FuchsianGroup(gens, genus=2)
    res = relation_residual(group)
    if res > 1e-10:
        raise RuntimeError(f"octagon side pairings fail the surface relation: {res}")
    return group


_OCTAGON: FuchsianGroup | None = None


def octagon_group() -> FuchsianGroup:
    """The genus-2 group of the regular octagon centered at i (cached)."""
    global _OCTAGON
    if _OCTAGON is None:
        _OCTAGON = _build_octagon_group()
    return _OCTAGON


# ---------------------------------------------------------------------------
# word and element enumeration
# ---------------------------------------------------------------------------

def _letter_order_key(letter: int) -> tuple[int, int]:
    return (abs(letter), 0 if letter > 0 else 1)


def word_ball(group: FuchsianGroup, radius: int, cap: int = _WORD_RADIUS_CAP) -> list[GroupWord]:
    """All freely reduced words of length <= radius, ordered by (length, lex).

    Words are deduplicated as words, not as group elements.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > cap:
        raise ValueError(f"radius {radius} exceeds the cap {cap}")
    letters = sorted(
        list(range(1, 2 * group.genus + 1)) + list(range(-2 * group.genus, 0)),
        key=_letter_order_key,
    )
    out = [GroupWord((), np.eye(2))]
    frontier = out[:]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for l in letters:
                if w.letters and w.letters[-1] == -l:
                    continue
                nxt.append(
                    GroupWord(w.letters + (l,), w.matrix @ group.letter_matrix(l).array())
                )
        out.extend(nxt)
        frontier = nxt
    return out


_DEDUP_GRID = 1e-8


def _element_keys(mats: np.ndarray) -> np.ndarray:
    flat = np.round(mats.reshape(len(mats), 4) / _DEDUP_GRID).astype(np.int64)
    flat = np.ascontiguousarray(flat)
    return flat.view(np.dtype((np.void, flat.dtype.itemsize * 4)))[:, 0]


def element_ball(group: FuchsianGroup, radius: int, cap: int = _WORD_RADIUS_CAP) -> np.ndarray:
    """Distinct group elements of word length <= radius as an (N,2,2) array.

    Deduplication is by matrix: beyond the free-group regime two distinct
    words can be the same element, and sums over the group must count each
    element once.  Order is deterministic (BFS level, then key order).
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > cap:
        raise ValueError(f"radius {radius} exceeds the cap {cap}")
    if radius in group._ball_cache:
        return group._ball_cache[radius]
    gens = group._gen_arrays  # (2*2g, 2, 2), generators then inverses
    levels = [np.eye(2)[None, :, :]]
    seen = np.sort(_element_keys(levels[0]))
    frontier = levels[0]
    chunk = 1 << 18
    for _ in range(radius):
        new_mats = []
        new_keys = []
        for lo in range(0, len(frontier), chunk):
            part = frontier[lo : lo + chunk]
            cand = np.einsum("fij,gjk->fgik", part, gens).reshape(-1, 2, 2)
            keys = _element_keys(cand)
            # first occurrence wins, in generation order
            uniq, first = np.unique(keys, return_index=True)
            pos = np.searchsorted(seen, uniq)
            pos = np.clip(pos, 0, len(seen) - 1)
            fresh = seen[pos] != uniq
            idx = np.sort(first[fresh])
            if len(idx):
                new_mats.append(cand[idx])
                new_keys.append(keys[idx])
                seen = np.sort(np.concatenate([seen, keys[idx]]))
        if not new_mats:
            break
        frontier = np.concatenate(new_mats)
        # in-level duplicates across chunks
        keys = np.concatenate(new_keys)
        uniq, first = np.unique(keys, return_index=True)
        frontier = frontier[np.sort(first)]
        levels.append(frontier)
    ball = np.concatenate(levels)
    group._ball_cache[radius] = ball
    return ball


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HPath:
    """Polyline in the upper half-plane with bounded hyperbolic step."""

    vertices: tuple[complex, ...]

    def __post_init__(self):
        for z in self.vertices:
            if complex(z).imag <= 0:
                raise ValueError("path leaves the upper half-plane")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def start(self) -> complex:
        return self.vertices[0]

    @property
    def end(self) -> complex:
        return self.vertices[-1]


def translate_path(
    group: FuchsianGroup, gamma: GroupWord, z0: complex, max_step: float = 0.5
) -> HPath:
    """Polyline z0 -> gamma.z0 along per-letter geodesic legs.

    Leg k joins the prefix orbits P_{k-1} z0 and P_k z0; each leg is
    subdivided so consecutive vertices are within max_step in hyperbolic
    distance.
    """
    z0 = complex(z0)
    if z0.imag <= 0:
        raise ValueError("basepoint must be interior to H")
    if max_step <= 0:
        raise ValueError("max_step must be positive")
    if gamma.is_identity():
        return HPath((z0,))
    pts = [z0]
    prefix = Moebius.identity()
    for letter in gamma.letters:
        prefix = prefix @ group.letter_matrix(letter)
        pts.append(mobius_apply(prefix, z0))
    verts = [pts[0]]
    for za, zb in zip(pts, pts[1:]):
        d = hyp_distance(za, zb)
        n = max(1, math.ceil(d / max_step))
        for k in range(1, n + 1):
            verts.append(geodesic_point(za, zb, k / n))
    return HPath(tuple(verts))
