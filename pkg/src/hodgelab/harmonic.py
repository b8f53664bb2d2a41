"""Discrete equivariant harmonic maps into positive hermitian det-1 matrices.

The fundamental octagon is fan-triangulated and midpoint-subdivided in the
hyperbolic metric; boundary sides carry the deck transformations that
identify them.  Edge decorations are the transport words w with the twisted
neighbor value rho(w)* u rho(w), and relaxation replaces each vertex by the
weighted Karcher mean of its twisted neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .hyp import (
    FuchsianGroup,
    Moebius,
    geodesic_point,
    hyp_distance,
    mobius_apply,
    octagon_group,
    octagon_vertices,
    word_ball,
)
from .rep import Representation

__all__ = [
    "EquivariantMesh",
    "EquivariantMap",
    "MeshEdge",
    "MeshFace",
    "dist_D",
    "geodesic",
    "random_pos_hermitian",
    "check_pos_hermitian",
    "build_equivariant_mesh",
    "discrete_energy",
    "harmonic_solve",
    "psi_field",
    "higgs_from_psi",
    "divergence_monitor",
    "SolveReport",
]

_WEIGHT_CLAMP = 1e-6


# ---------------------------------------------------------------------------
# the model space D
# ---------------------------------------------------------------------------

def check_pos_hermitian(m: np.ndarray, herm_tol=1e-10, det_tol=1e-8) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if np.max(np.abs(m - np.conj(m.T))) > herm_tol:
        raise ValueError("matrix is not hermitian")
    vals = np.linalg.eigvalsh(m)
    if vals.min() <= 0:
        raise ValueError("matrix is not positive")
    if abs(np.prod(vals) - 1.0) > det_tol:
        raise ValueError("matrix does not have unit determinant")
    return m


def _eig_fun(m: np.ndarray, fun) -> np.ndarray:
    lam, vec = np.linalg.eigh(m)
    return (vec * fun(lam)) @ np.conj(vec.T)


def dist_D(m: np.ndarray, n: np.ndarray) -> float:
    """Geodesic distance ||log(M^-1/2 N M^-1/2)||_F of the invariant metric."""
    m = np.asarray(m, dtype=complex)
    n = np.asarray(n, dtype=complex)
    lam, vec = np.linalg.eigh(m)
    if lam.min() < 1e-14:
        raise ValueError("eigenvalue underflow in dist_D")
    isq = (vec / np.sqrt(lam)) @ np.conj(vec.T)
    ev = np.linalg.eigvalsh(isq @ n @ isq)
    if ev.min() < 1e-14:
        raise ValueError("eigenvalue underflow in dist_D")
    return float(np.sqrt(np.sum(np.log(ev) ** 2)))


def geodesic(m: np.ndarray, n: np.ndarray, t: float) -> np.ndarray:
    """M^1/2 (M^-1/2 N M^-1/2)^t M^1/2; endpoints at t = 0, 1."""
    m = np.asarray(m, dtype=complex)
    n = np.asarray(n, dtype=complex)
    lam, vec = np.linalg.eigh(m)
    if lam.min() < 1e-14:
        raise ValueError("eigenvalue underflow in geodesic")
    sq = (vec * np.sqrt(lam)) @ np.conj(vec.T)
    isq = (vec / np.sqrt(lam)) @ np.conj(vec.T)
    mid = _eig_fun(isq @ n @ isq, lambda x: np.power(x, t))
    out = sq @ mid @ sq
    return 0.5 * (out + np.conj(out.T))


def random_pos_hermitian(n: int, rng, scale: float = 0.5) -> np.ndarray:
    """Random point of D: exp of a traceless hermitian matrix."""
    x = rng.normal(size=(n, n), scale=scale) + 1j * rng.normal(size=(n, n), scale=scale)
    h = 0.5 * (x + np.conj(x.T))
    h -= np.trace(h) / n * np.eye(n)
    return _eig_fun(h, np.exp)


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

def _reduce_letters(seq) -> tuple[int, ...]:
    out: list[int] = []
    for l in seq:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(int(l))
    return tuple(out)


def _invert_letters(seq) -> tuple[int, ...]:
    return tuple(-l for l in reversed(seq))


@dataclass(frozen=True)
class MeshEdge:
    src: int
    dst: int
    weight: float
    twist: tuple[int, ...]  # transport word; () on interior edges
    z_src: complex  # endpoints in the chart where src sits at its rep position
    z_dst: complex


@dataclass(frozen=True)
class MeshFace:
    verts: tuple[int, int, int]
    charts: tuple[tuple[int, ...], ...]  # chart word of each corner copy
    pos: tuple[complex, complex, complex]  # corner copies in the face chart
    area: float
    edge_refs: tuple[tuple[int, int], ...] = ()  # (edge index, +-1) per side


@dataclass
class EquivariantMesh:
    group: FuchsianGroup
    vertices: np.ndarray  # representative positions, complex (V,)
    edges: list[MeshEdge]
    faces: list[MeshFace]
    basepoint: int
    refinement: int
    cycle_residual: float
    sweep_order: np.ndarray = field(default=None)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    def total_area(self) -> float:
        return float(sum(f.area for f in self.faces))

    def word_matrix(self, letters) -> Moebius:
        m = Moebius.identity()
        for l in letters:
            m = m @ self.group.letter_matrix(l)
        return m


def _side_transport_words():
    """side index -> (letters of the map sending that side to its partner)."""
    return {2: (1,), 0: (-1,), 1: (2,), 3: (-2,), 6: (3,), 4: (-3,), 5: (4,), 7: (-4,)}


def _apply_letters(group, letters, z):
    m = Moebius.identity()
    for l in letters:
        m = m @ group.letter_matrix(l)
    return mobius_apply(m, z)


def build_equivariant_mesh(group: FuchsianGroup | None = None, refinement: int = 0, cap: int = 6) -> EquivariantMesh:
    """Triangulate the octagon fundamental domain and glue its boundary.

    Fan from the center then ``refinement`` rounds of hyperbolic midpoint
    quadrisection; cotangent weights from the hyperbolic metric, clamped at
    1e-6.  Only the built-in octagon group carries a fundamental domain.
    """
    if refinement < 0:
        raise ValueError("refinement must be nonnegative")
    if refinement > cap:
        raise ValueError(f"refinement {refinement} exceeds the cap {cap}")
    if group is None:
        group = octagon_group()
    if group is not octagon_group():
        raise ValueError("mesh construction is tied to the built-in octagon domain")

    corners = octagon_vertices()
    center = 1j
    pts: list[complex] = [center] + list(corners)
    # side membership bookkeeping: side j runs from corner j to corner j+1
    side_sets: list[frozenset] = [frozenset()] + [
        frozenset({(j - 1) % 8, j}) for j in range(8)
    ]
    tris = [(0, 1 + j, 1 + (j + 1) % 8) for j in range(8)]

    midpoint_cache: dict[tuple[int, int], int] = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        hit = midpoint_cache.get(key)
        if hit is not None:
            return hit
        z = geodesic_point(pts[i], pts[j], 0.5)
        pts.append(z)
        side_sets.append(side_sets[i] & side_sets[j])
        midpoint_cache[key] = len(pts) - 1
        return len(pts) - 1

    for _ in range(refinement):
        nxt = []
        for (i, j, k) in tris:
            a, b, c = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            nxt.extend([(i, a, c), (a, j, b), (c, b, k), (a, b, c)])
        tris = nxt

    # ------------------------------------------------------------------
    # quotient classes and chart words
    # ------------------------------------------------------------------
    transport = _side_transport_words()
    n_pts = len(pts)
    cls = [-1] * n_pts
    chart: list[tuple[int, ...]] = [()] * n_pts

    def match_point(z, candidates, tol=1e-8):
        for idx in candidates:
            if abs(pts[idx] - z) < tol:
                return idx
        raise RuntimeError("boundary identification failed to match a point")

    # the single corner class, represented by corner 0 (point index 1)
    corner_ids = list(range(1, 9))
    n_classes = 0
    cls[1] = n_classes
    chart[1] = ()
    ball = word_ball(group, 4)
    for j in range(1, 8):
        target = pts[1 + j]
        found = None
        for w in ball:
            if not w.letters:
                continue
            if abs(_apply_letters(group, w.letters, pts[1]) - target) < 1e-8:
                found = w.letters
                break
        if found is None:
            raise RuntimeError("corner orbit word not found within radius 4")
        cls[1 + j] = n_classes
        chart[1 + j] = found
    n_classes += 1

    # side points: representative on the source side of each transport word
    rep_sides = {0, 1, 4, 5}
    side_points: dict[int, list[int]] = {j: [] for j in range(8)}
    for idx in range(n_pts):
        s = side_sets[idx]
        if len(s) == 1:
            side_points[next(iter(s))].append(idx)
    for j in rep_sides:
        partner = {0: 2, 1: 3, 4: 6, 5: 7}[j]
        # map from the partner side onto the rep side
        to_rep = transport[partner]
        for idx in side_points[j]:
            cls[idx] = n_classes
            chart[idx] = ()
            image = _apply_letters(group, _invert_letters(to_rep), pts[idx])
            twin = match_point(image, side_points[partner])
            cls[twin] = n_classes
            chart[twin] = _invert_letters(to_rep)
            n_classes += 1
    # interior points
    for idx in range(n_pts):
        if cls[idx] == -1:
            if side_sets[idx]:
                raise RuntimeError("unclassified boundary point")
            cls[idx] = n_classes
            chart[idx] = ()
            n_classes += 1

    reps = np.zeros(n_classes, dtype=complex)
    for idx in range(n_pts):
        if not chart[idx]:
            reps[cls[idx]] = pts[idx]

    # chart-position residual: copy position vs chart word applied to rep
    cycle_residual = 0.0
    for idx in range(n_pts):
        img = _apply_letters(group, chart[idx], reps[cls[idx]])
        cycle_residual = max(cycle_residual, abs(img - pts[idx]))

    # ------------------------------------------------------------------
    # faces, edges, cotangent weights
    # ------------------------------------------------------------------
    faces: list[MeshFace] = []
    edge_weight: dict[tuple, float] = {}
    edge_geom: dict[tuple, tuple[complex, complex]] = {}
    edge_count: dict[tuple, int] = {}
    edge_letters: dict[tuple, tuple[int, ...]] = {}

    def word_mat(letters) -> np.ndarray:
        m = Moebius.identity()
        for l in letters:
            m = m @ group.letter_matrix(l)
        return m.array()

    def mat_key(m: np.ndarray) -> tuple:
        # deck transformations are discrete; 1e-5 rounding separates them
        flat = np.round(m.reshape(4) / 1e-5).astype(np.int64)
        if flat[0] < 0 or (flat[0] == 0 and flat[1] < 0):
            flat = -flat  # projective sign normalization
        return tuple(int(x) for x in flat)

    def edge_key(u, cu, v, cv):
        """Canonical key and orientation for the quotient edge u -> v.

        Transitions are compared as group elements (matrices), since chart
        words for the same deck transformation need not match letterwise.
        """
        gamma = _reduce_letters(_invert_letters(cu) + cv)
        gm = word_mat(gamma)
        fwd = (u, v) + mat_key(gm)
        rev = (v, u) + mat_key(np.linalg.inv(gm))
        if fwd <= rev:
            return fwd, True, gamma
        return rev, False, _invert_letters(gamma)

    def tri_angle(opp, x, y):
        val = (math.cosh(x) * math.cosh(y) - math.cosh(opp)) / (
            math.sinh(x) * math.sinh(y)
        )
        return math.acos(max(-1.0, min(1.0, val)))

    angle_sum = np.zeros(n_classes)
    for (i, j, k) in tris:
        zi, zj, zk = pts[i], pts[j], pts[k]
        a = hyp_distance(zj, zk)
        b = hyp_distance(zi, zk)
        c = hyp_distance(zi, zj)
        ang_i = tri_angle(a, b, c)
        ang_j = tri_angle(b, a, c)
        ang_k = tri_angle(c, a, b)
        area = math.pi - ang_i - ang_j - ang_k
        angle_sum[cls[i]] += ang_i
        angle_sum[cls[j]] += ang_j
        angle_sum[cls[k]] += ang_k
        faces.append(
            MeshFace(
                verts=(cls[i], cls[j], cls[k]),
                charts=(chart[i], chart[j], chart[k]),
                pos=(zi, zj, zk),
                area=area,
            )
        )
        for (u, v, opp_ang, zu, zv) in (
            (i, j, ang_k, zi, zj),
            (j, k, ang_i, zj, zk),
            (k, i, ang_j, zk, zi),
        ):
            key, forward, gamma = edge_key(cls[u], chart[u], cls[v], chart[v])
            w = 0.5 / math.tan(opp_ang)
            edge_weight[key] = edge_weight.get(key, 0.0) + w
            edge_count[key] = edge_count.get(key, 0) + 1
            if key not in edge_geom:
                src_chart = chart[u] if forward else chart[v]
                m = Moebius.identity()
                for l in _invert_letters(src_chart):
                    m = m @ group.letter_matrix(l)
                za, zb = (zu, zv) if forward else (zv, zu)
                edge_geom[key] = (mobius_apply(m, za), mobius_apply(m, zb))
                edge_letters[key] = gamma

    if any(c != 2 for c in edge_count.values()):
        raise RuntimeError("mesh gluing left an edge without two faces")

    edges = []
    for key in sorted(edge_weight):
        za, zb = edge_geom[key]
        edges.append(
            MeshEdge(
                src=key[0],
                dst=key[1],
                weight=max(edge_weight[key], _WEIGHT_CLAMP),
                twist=_invert_letters(edge_letters[key]),
                z_src=za,
                z_dst=zb,
            )
        )

    # angle closure around every vertex class (2 pi on a smooth surface)
    cycle_residual = max(cycle_residual, float(np.max(np.abs(angle_sum - 2 * math.pi))))

    # face -> directed edge references
    key_index = {}
    for t, key in enumerate(sorted(edge_weight)):
        key_index[key] = t
    faces2 = []
    for f in faces:
        refs = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key, forward, _ = edge_key(f.verts[a], f.charts[a], f.verts[b], f.charts[b])
            refs.append((key_index[key], 1 if forward else -1))
        faces2.append(
            MeshFace(
                verts=f.verts, charts=f.charts, pos=f.pos, area=f.area,
                edge_refs=tuple(refs),
            )
        )
    faces = faces2

    mesh = EquivariantMesh(
        group=group,
        vertices=reps,
        edges=edges,
        faces=faces,
        basepoint=int(cls[0]),
        refinement=refinement,
        cycle_residual=cycle_residual,
    )
    mesh.sweep_order = _color_order(mesh)
    if mesh.euler_characteristic() != 2 - 2 * group.genus:
        raise RuntimeError("glued complex has the wrong Euler characteristic")
    return mesh


def _color_order(mesh: EquivariantMesh) -> np.ndarray:
    """Vertices sorted by greedy color class then index.

    No edge joins two vertices of one color class, so updates within a class
    commute and may run in parallel without changing the sweep result.
    """
    nv = mesh.n_vertices
    adj = [set() for _ in range(nv)]
    for e in mesh.edges:
        if e.src != e.dst:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    colors = [-1] * nv
    for v in range(nv):
        used = {colors[u] for u in adj[v] if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    order = sorted(range(nv), key=lambda v: (colors[v], v))
    return np.array(order, dtype=np.int64)


@dataclass
class EquivariantMap:
    """Vertex-indexed field of positive hermitian det-1 matrices."""

    values: np.ndarray  # (V, n, n) complex

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def validate(self):
        for m in self.values:
            check_pos_hermitian(m)

    @staticmethod
    def constant_identity(mesh: EquivariantMesh, n: int) -> "EquivariantMap":
        return EquivariantMap(np.broadcast_to(np.eye(n, dtype=complex), (mesh.n_vertices, n, n)).copy())


def _edge_transports(mesh: EquivariantMesh, rho: Representation):
    """rho matrices of each edge twist, forward and reversed."""
    fwd, rev = [], []
    for e in mesh.edges:
        r = rho.word_image(e.twist)
        fwd.append(r)
        rev.append(np.linalg.inv(r))
    return np.array(fwd), np.array(rev)


def twisted_value(rho: Representation, letters, value: np.ndarray) -> np.ndarray:
    """rho(w)* u rho(w), the far-endpoint value seen from the near chart."""
    r = rho.word_image(letters)
    return np.conj(r.T) @ value @ r


def discrete_energy(mesh: EquivariantMesh, rho: Representation, u: EquivariantMap) -> float:
    """sum_e w_e dist_D(u_src, twist_e(u_dst))^2."""
    if rho.n != u.n:
        raise ValueError("representation size does not match the map")
    vals = u.values
    total = 0.0
    for e in mesh.edges:
        tw = twisted_value(rho, e.twist, vals[e.dst])
        total += e.weight * dist_D(vals[e.src], tw) ** 2
    return float(total)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    energy_trace: np.ndarray
    grad_trace: np.ndarray
    cond_trace: np.ndarray
    converged: bool
    iterations: int
    tol: float
    diverged: bool = False
    monitor_slope: float = 0.01
    monitor_window: int = 50

    def to_dict(self) -> dict:
        return {
            "energy_trace": [float(x) for x in self.energy_trace],
            "grad_norm": float(self.grad_trace[-1]) if len(self.grad_trace) else 0.0,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "diverged": bool(self.diverged),
        }


def _adjacency(mesh: EquivariantMesh, rho: Representation):
    nv = mesh.n_vertices
    half: list[list[tuple[int, float, np.ndarray]]] = [[] for _ in range(nv)]
    fwd, rev = _edge_transports(mesh, rho)
    for e, (rf, rr) in zip(mesh.edges, zip(fwd, rev)):
        half[e.src].append((e.dst, e.weight, rf))
        half[e.dst].append((e.src, e.weight, rr))
    ptr = np.zeros(nv + 1, dtype=np.int64)
    idx, ws, tws = [], [], []
    for v in range(nv):
        ptr[v + 1] = ptr[v] + len(half[v])
        for (d, w, r) in half[v]:
            idx.append(d)
            ws.append(w)
            tws.append(r)
    return (
        ptr,
        np.array(idx, dtype=np.int64),
        np.ascontiguousarray(np.array(tws, dtype=complex)),
        np.array(ws, dtype=float),
    )


def harmonic_solve(
    mesh: EquivariantMesh,
    rho: Representation,
    u0: EquivariantMap | None = None,
    tol: float = 1e-8,
    max_iters: int = 5000,
    subiters: int = 5,
    monitor_slope: float = 0.01,
    monitor_window: int = 50,
) -> tuple[EquivariantMap, SolveReport]:
    """Karcher-mean relaxation sweeps until the sup gradient norm is < tol.

    The energy trace is recorded every sweep and is nonincreasing; the
    report carries the basepoint condition-number trace feeding the
    divergence monitor.
    """
    if rho.n < 1:
        raise ValueError("empty representation")
    n = rho.n
    u = EquivariantMap.constant_identity(mesh, n) if u0 is None else EquivariantMap(u0.values.copy())
    ptr, idx, tws, ws = _adjacency(mesh, rho)
    order = mesh.sweep_order
    energies = [discrete_energy(mesh, rho, u)]
    grads = []
    conds = [float(np.linalg.cond(u.values[mesh.basepoint]))]
    converged = False
    iters = 0
    g0 = _sup_gradient(u.values, ptr, idx, tws, ws)
    if g0 < tol:
        # already critical, zero sweeps needed
        report = SolveReport(
            energy_trace=np.array(energies),
            grad_trace=np.array([g0]),
            cond_trace=np.array(conds),
            converged=True,
            iterations=0,
            tol=tol,
            monitor_slope=monitor_slope,
            monitor_window=monitor_window,
        )
        return u, report
    for sweep in range(max_iters):
        g = kernels.karcher_sweep(u.values, order, ptr, idx, tws, ws, subiters)
        iters = sweep + 1
        grads.append(float(g))
        energies.append(discrete_energy(mesh, rho, u))
        conds.append(float(np.linalg.cond(u.values[mesh.basepoint])))
        if g < tol:
            converged = True
            break
    report = SolveReport(
        energy_trace=np.array(energies),
        grad_trace=np.array(grads),
        cond_trace=np.array(conds),
        converged=converged,
        iterations=iters,
        tol=tol,
        monitor_slope=monitor_slope,
        monitor_window=monitor_window,
    )
    report.diverged = divergence_monitor(report)
    return u, report


def _sup_gradient(vals, ptr, idx, tws, ws) -> float:
    """Sup over vertices of the weighted Karcher log-mean norm (no update)."""
    sup = 0.0
    n = vals.shape[1]
    for v in range(len(ptr) - 1):
        lo, hi = ptr[v], ptr[v + 1]
        if hi == lo:
            continue
        lam, vec = np.linalg.eigh(vals[v])
        isq = (vec / np.sqrt(lam)) @ np.conj(vec.T)
        s = np.zeros((n, n), dtype=complex)
        for e in range(lo, hi):
            t = tws[e]
            y = isq @ (np.conj(t.T) @ vals[idx[e]] @ t) @ isq
            s += ws[e] * _logm_pd(0.5 * (y + np.conj(y.T)))
        sup = max(sup, float(np.linalg.norm(s)))
    return sup


def divergence_monitor(report: SolveReport, slope: float | None = None, window: int | None = None) -> bool:
    """True when log cond(u at the basepoint) grows faster than the slope
    over a trailing window while the gradient norm stalls above tol."""
    slope = report.monitor_slope if slope is None else slope
    window = report.monitor_window if window is None else window
    logc = np.log(np.maximum(report.cond_trace, 1.0))
    grads = report.grad_trace
    for k in range(window, len(logc)):
        if logc[k] - logc[k - window] > slope * window:
            g = grads[min(k - 1, len(grads) - 1)] if len(grads) else 0.0
            if g > report.tol:
                return True
    return False


# ---------------------------------------------------------------------------
# Psi and Higgs extraction
# ---------------------------------------------------------------------------

def _logm_pd(m: np.ndarray) -> np.ndarray:
    return _eig_fun(m, np.log)


def psi_field(mesh: EquivariantMesh, rho: Representation, u: EquivariantMap):
    """Per-edge hermitian Psi_e = -1/2 log(u_src^-1/2 twist(u_dst) u_src^-1/2).

    Returns (psi, report); the report cross-checks the energy against
    4 sum_e w_e ||Psi_e||_F^2 computed through the independent log route.
    """
    vals = u.values
    psi = []
    e_psi = 0.0
    for e in mesh.edges:
        m = vals[e.src]
        lam, vec = np.linalg.eigh(m)
        if lam.min() < 1e-14:
            raise ValueError("eigenvalue underflow in psi_field")
        isq = (vec / np.sqrt(lam)) @ np.conj(vec.T)
        tw = twisted_value(rho, e.twist, vals[e.dst])
        p = -0.5 * _logm_pd(isq @ tw @ isq)
        p = 0.5 * (p + np.conj(p.T))
        psi.append(p)
        e_psi += 4.0 * e.weight * float(np.sum(np.abs(p) ** 2))
    e_direct = discrete_energy(mesh, rho, u)
    gap = abs(e_direct - e_psi) / max(e_direct, 1e-300)
    report = {"energy": e_direct, "energy_from_psi": e_psi, "identity_gap": gap}
    return np.array(psi), report


def psi_reversed(mesh: EquivariantMesh, rho: Representation, u: EquivariantMap, e_index: int) -> np.ndarray:
    """Psi of the reversed edge (source frame at dst)."""
    e = mesh.edges[e_index]
    vals = u.values
    m = vals[e.dst]
    lam, vec = np.linalg.eigh(m)
    isq = (vec / np.sqrt(lam)) @ np.conj(vec.T)
    tw = twisted_value(rho, _invert_letters(e.twist), vals[e.src])
    p = -0.5 * _logm_pd(isq @ tw @ isq)
    return 0.5 * (p + np.conj(p.T))


def edge_twist_frame(mesh: EquivariantMesh, rho: Representation, u: EquivariantMap, e_index: int) -> np.ndarray:
    """Frame transport D = u_dst^1/2 rho(w) u_src^-1/2 relating the two
    source-frame Psi values: Psi_rev = -D Psi D^-1."""
    e = mesh.edges[e_index]
    vals = u.values
    lam_s, vec_s = np.linalg.eigh(vals[e.src])
    lam_d, vec_d = np.linalg.eigh(vals[e.dst])
    isq_s = (vec_s / np.sqrt(lam_s)) @ np.conj(vec_s.T)
    sq_d = (vec_d * np.sqrt(lam_d)) @ np.conj(vec_d.T)
    return sq_d @ rho.word_image(e.twist) @ isq_s


def fit_face_one_forms(mesh: EquivariantMesh, edge_field: np.ndarray, area_floor: float = 1e-12):
    """Least-squares constant 1-form (P, Q) per face from three edge values.

    ``edge_field`` holds one matrix per canonical edge; traversing an edge
    against its orientation flips the sign.
    """
    n = edge_field.shape[1]
    ps, qs = [], []
    for f in mesh.faces:
        if f.area < area_floor:
            raise ValueError("degenerate face")
        rows, rhs = [], []
        for (a, b), (t, sgn) in zip(((0, 1), (1, 2), (2, 0)), f.edge_refs):
            dz = f.pos[b] - f.pos[a]
            rows.append([dz.real, dz.imag])
            rhs.append(sgn * edge_field[t].reshape(-1))
        sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
        ps.append(sol[0].reshape(n, n))
        qs.append(sol[1].reshape(n, n))
    return np.array(ps), np.array(qs)


def higgs_from_psi(mesh: EquivariantMesh, psi: np.ndarray, area_floor: float = 1e-12):
    """Per-face (1,0) parts of the edge field, with the traceless parts.

    Fits a constant matrix 1-form P dx + Q dy to the three edge values in
    the face chart and projects to Phi = (P - iQ)/2.
    """
    p, q = fit_face_one_forms(mesh, psi, area_floor)
    n = psi.shape[1]
    phis = 0.5 * (p - 1j * q)
    eye = np.eye(n)
    traceless = phis - np.trace(phis, axis1=1, axis2=2)[:, None, None] / n * eye
    return phis, traceless
