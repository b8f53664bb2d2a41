"""Discrete gauge theory on the glued octagon mesh.

Connections are per-edge unitaries, Higgs fields per-vertex traceless
matrices.  Curvature is the principal log of face holonomy divided by face
area; f = i F + vertex-averaged [Phi, Phi*]; areas are normalized so the
surface has total area 2 pi, matching the continuum volume convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harmonic import EquivariantMesh, fit_face_one_forms

__all__ = [
    "DiscreteConnection",
    "DiscreteHiggs",
    "MomentResiduals",
    "identity_connection",
    "random_connection",
    "random_higgs",
    "face_holonomy",
    "face_curvature",
    "moment_residuals",
    "ymh_value",
    "ymh_gradient",
    "ymh_flow_step",
    "hitchin_map_point",
    "donaldson_j",
    "simpson_bound_probe",
    "upper_triangular_commutator_floor",
    "gauge_transform",
]


@dataclass
class DiscreteConnection:
    """Per-edge unitary transports, indexed like mesh.edges.

    The matrix of a reversed edge is the adjoint; only the canonical
    orientation is stored.
    """

    transports: np.ndarray  # (E, n, n) complex

    def __post_init__(self):
        self.transports = np.asarray(self.transports, dtype=complex)
        eye = np.eye(self.transports.shape[1])
        for u in self.transports:
            if np.max(np.abs(np.conj(u.T) @ u - eye)) > 1e-10:
                raise ValueError("edge transport is not unitary")

    @property
    def n(self) -> int:
        return self.transports.shape[1]


@dataclass
class DiscreteHiggs:
    """Per-vertex traceless matrices, indexed like mesh.vertices."""

    values: np.ndarray  # (V, n, n) complex

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        for m in self.values:
            if abs(np.trace(m)) > 1e-10:
                raise ValueError("Higgs value is not traceless")

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass
class MomentResiduals:
    mu1: np.ndarray  # per face
    mu2: np.ndarray  # per vertex
    mu3: np.ndarray  # per vertex
    mu1_norm: float
    mu2_norm: float
    mu3_norm: float


def identity_connection(mesh: EquivariantMesh, n: int) -> DiscreteConnection:
    return DiscreteConnection(np.broadcast_to(np.eye(n, dtype=complex), (len(mesh.edges), n, n)).copy())


def _expm_skew(x: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(1j * x)  # 1j * skew-hermitian is hermitian
    return (vec * np.exp(-1j * lam)) @ np.conj(vec.T)


def random_connection(mesh: EquivariantMesh, n: int, rng, scale: float = 0.1) -> DiscreteConnection:
    out = []
    for _ in mesh.edges:
        h = rng.normal(size=(n, n), scale=scale) + 1j * rng.normal(size=(n, n), scale=scale)
        x = 0.5 * (h - np.conj(h.T))
        x -= np.trace(x) / n * np.eye(n)
        out.append(_expm_skew(x))
    return DiscreteConnection(np.array(out))


def random_higgs(mesh: EquivariantMesh, n: int, rng, scale: float = 0.3) -> DiscreteHiggs:
    out = []
    for _ in range(mesh.n_vertices):
        m = rng.normal(size=(n, n), scale=scale) + 1j * rng.normal(size=(n, n), scale=scale)
        m -= np.trace(m) / n * np.eye(n)
        out.append(m)
    return DiscreteHiggs(np.array(out))


def _areas(mesh: EquivariantMesh) -> np.ndarray:
    a = np.array([f.area for f in mesh.faces])
    return a * (2.0 * math.pi / a.sum())


def face_holonomy(mesh: EquivariantMesh, conn: DiscreteConnection, f_index: int) -> np.ndarray:
    f = mesh.faces[f_index]
    n = conn.n
    h = np.eye(n, dtype=complex)
    for (t, sgn) in f.edge_refs:
        u = conn.transports[t]
        h = h @ (u if sgn > 0 else np.conj(u.T))
    return h


def _logm_unitary(h: np.ndarray, guard: float = 1e-6) -> np.ndarray:
    lam, vec = np.linalg.eig(h)
    lam = lam / np.abs(lam)
    if np.min(np.abs(lam + 1.0)) < guard:
        raise ValueError("holonomy eigenvalue at -1; refine the mesh")
    # unitary matrices are normal, so eigenvectors can be orthonormalized
    q, _ = np.linalg.qr(vec)
    # re-diagonalize against possible eig() non-orthogonality in clusters
    lam2 = np.diag(np.conj(q.T) @ h @ q)
    lam2 = lam2 / np.abs(lam2)
    return (q * np.log(lam2)) @ np.conj(q.T)


def face_curvature(mesh: EquivariantMesh, conn: DiscreteConnection):
    """Per-face skew-hermitian F_f = log(holonomy)/area (normalized areas)."""
    areas = _areas(mesh)
    out = []
    for t in range(len(mesh.faces)):
        h = face_holonomy(mesh, conn, t)
        lg = _logm_unitary(h)
        lg = 0.5 * (lg - np.conj(lg.T))
        out.append(lg / areas[t])
    return np.array(out)


def _face_transports(mesh: EquivariantMesh, conn: DiscreteConnection, f_index: int):
    """Per-corner transports T_k to the face basepoint: T_0 = I, T_1 = W_0,
    T_2 = W_0 W_1, where W_s are the directed side matrices of the loop."""
    f = mesh.faces[f_index]
    mats = []
    for (t, sgn) in f.edge_refs:
        u = conn.transports[t]
        mats.append(u if sgn > 0 else np.conj(u.T))
    n = conn.n
    t0 = np.eye(n, dtype=complex)
    return [t0, mats[0], mats[0] @ mats[1]], mats


def _f_field(mesh: EquivariantMesh, conn: DiscreteConnection, higgs: DiscreteHiggs):
    """Hermitian f_f = i F_f + mean of corner [Phi, Phi*] transported to the
    face basepoint (so the whole field conjugates coherently under gauge)."""
    curv = face_curvature(mesh, conn)
    phi = higgs.values
    out = []
    for t_f, (f, ff) in enumerate(zip(mesh.faces, curv)):
        ts, _ = _face_transports(mesh, conn, t_f)
        acc = 1j * ff
        for tk, v in zip(ts, f.verts):
            p = phi[v]
            comm = p @ np.conj(p.T) - np.conj(p.T) @ p
            acc = acc + tk @ comm @ np.conj(tk.T) / 3.0
        out.append(0.5 * (acc + np.conj(acc.T)))
    return np.array(out)


def ymh_value(mesh: EquivariantMesh, conn: DiscreteConnection, higgs: DiscreteHiggs):
    """(sum_f area_f ||f_f||_F^2, f-field)."""
    areas = _areas(mesh)
    f = _f_field(mesh, conn, higgs)
    val = float(sum(a * np.sum(np.abs(x) ** 2) for a, x in zip(areas, f)))
    return val, f


def hitchin_map_point(phi: np.ndarray) -> np.ndarray:
    """Coefficients c_2..c_n of det(lambda I + Phi) by Newton's identities."""
    phi = np.asarray(phi, dtype=complex)
    n = phi.shape[0]
    a = -phi  # char poly of -Phi gives det(lambda + Phi)
    pows = [np.eye(n, dtype=complex)]
    for _ in range(n):
        pows.append(pows[-1] @ a)
    p = [np.trace(pows[k]) for k in range(n + 1)]
    coeffs = [1.0 + 0.0j]
    for k in range(1, n + 1):
        s = p[k]
        for i in range(1, k):
            s += coeffs[i] * p[k - i]
        coeffs.append(-s / k)
    return np.array(coeffs[2:])


def donaldson_j(mesh: EquivariantMesh, conn: DiscreteConnection, higgs: DiscreteHiggs, mu: float = 0.0):
    """sqrt(sum_f area_f nu(f_f - mu I)^2) with nu = sum of |eigenvalues|."""
    areas = _areas(mesh)
    _, f = ymh_value(mesh, conn, higgs)
    eye = np.eye(conn.n)
    total = 0.0
    for a, x in zip(areas, f):
        nu = float(np.sum(np.abs(np.linalg.eigvalsh(x - mu * eye))))
        total += a * nu * nu
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# moment maps
# ---------------------------------------------------------------------------

def _transported_face_fit(mesh, conn, field, f_index):
    """(P, Q) fitted from the face's edge values carried to its basepoint."""
    n = conn.n
    f = mesh.faces[f_index]
    ts, _ = _face_transports(mesh, conn, f_index)
    rows, rhs = [], []
    for s, ((a, b), (t, sgn)) in enumerate(zip(((0, 1), (1, 2), (2, 0)), f.edge_refs)):
        dz = f.pos[b] - f.pos[a]
        u = conn.transports[t]
        val = field[t] if sgn > 0 else -np.conj(u.T) @ field[t] @ u
        val = ts[s] @ val @ np.conj(ts[s].T)
        rows.append([dz.real, dz.imag])
        rhs.append(val.reshape(-1))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return sol[0].reshape(n, n), sol[1].reshape(n, n)


def moment_residuals(
    mesh: EquivariantMesh,
    conn: DiscreteConnection,
    psi: np.ndarray,
    psi_reversed: np.ndarray | None = None,
) -> MomentResiduals:
    """Discrete mu_1 (faces), mu_2 and mu_3 (vertices) for an edge field Psi.

    mu_1 = i F + [P, Q] with (P, Q) fitted from the face's edge values
    transported to its basepoint; mu_3 is the weighted twisted divergence of
    Psi and mu_2 the divergence of its 90-degree rotation (rotation taken in
    the face conformal chart).  When ``psi_reversed`` is given it supplies
    the value of each reversed edge in the far frame (as produced by the
    harmonic module); otherwise the connection transports the canonical
    value.
    """
    n = conn.n
    areas = _areas(mesh)
    curv = face_curvature(mesh, conn)
    mu1 = []
    fits = []
    for f_idx in range(len(mesh.faces)):
        p, q = _transported_face_fit(mesh, conn, psi, f_idx)
        fits.append((p, q))
        mu1.append(1j * curv[f_idx] + (p @ q - q @ p))
    mu1 = np.array(mu1)

    def divergence(field, field_rev):
        out = np.zeros((mesh.n_vertices, n, n), dtype=complex)
        for t, e in enumerate(mesh.edges):
            u = conn.transports[t]
            rev = field_rev[t] if field_rev is not None else -np.conj(u.T) @ field[t] @ u
            out[e.src] += e.weight * field[t]
            out[e.dst] += e.weight * rev
        return out

    mu3 = divergence(psi, psi_reversed)
    # rotated field: *(P dx + Q dy) = P dy - Q dx, re-integrated per edge in
    # the source-corner frame and averaged over the two incident faces
    rot = np.zeros_like(psi)
    counts = np.zeros(len(psi))
    for f_idx, f in enumerate(mesh.faces):
        p, q = fits[f_idx]
        ts, _ = _face_transports(mesh, conn, f_idx)
        for s, ((a, b), (t, sgn)) in enumerate(zip(((0, 1), (1, 2), (2, 0)), f.edge_refs)):
            dz = f.pos[b] - f.pos[a]
            val = p * dz.imag - q * dz.real
            back = np.conj(ts[s].T) @ val @ ts[s]  # into the corner-s frame
            if sgn < 0:
                u = conn.transports[t]
                back = -u @ back @ np.conj(u.T)
            rot[t] += back
            counts[t] += 1
    rot = rot / counts[:, None, None]
    mu2 = divergence(rot, None)
    mu1n = math.sqrt(float(sum(a * np.sum(np.abs(m) ** 2) for a, m in zip(areas, mu1))))
    mu2n = math.sqrt(float(np.sum(np.abs(mu2) ** 2)))
    mu3n = math.sqrt(float(np.sum(np.abs(mu3) ** 2)))
    return MomentResiduals(mu1, mu2, mu3, mu1n, mu2n, mu3n)


# ---------------------------------------------------------------------------
# YMH gradient and flow
# ---------------------------------------------------------------------------

def _dlog_adjoint(h: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Matrix W with tr(f . Dlog_H[E]) = tr(W E) for all E (H unitary)."""
    n = h.shape[0]
    lam, vec = np.linalg.eig(h)
    lam = lam / np.abs(lam)
    q, _ = np.linalg.qr(vec)
    lam = np.diag(np.conj(q.T) @ h @ q)
    lam = lam / np.abs(lam)
    lg = np.log(lam)
    g = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if abs(lam[a] - lam[b]) < 1e-12:
                g[a, b] = 1.0 / lam[a]
            else:
                g[a, b] = (lg[a] - lg[b]) / (lam[a] - lam[b])
    m = np.conj(q.T) @ f @ q
    k = g * m.T  # K_{ab} = G_{ab} M_{ba}
    return q @ k.T @ np.conj(q.T)


def ymh_gradient(mesh: EquivariantMesh, conn: DiscreteConnection, higgs: DiscreteHiggs):
    """Gradient of ymh_value in (edge-log, vertex) coordinates.

    Edge directions are traceless skew-hermitian X_e acting by
    U_e -> U_e exp(X_e); Higgs directions are traceless complex matrices
    paired by Re tr(G* V).  Matches central finite differences of the
    functional.
    """
    n = conn.n
    areas = _areas(mesh)
    _, f = ymh_value(mesh, conn, higgs)
    eye = np.eye(n)
    # dG = sum_e Re tr(S_e X_e) + sum_v 2 Re tr(V_v* Q_v)
    s_raw = np.zeros_like(conn.transports)
    q_phi = np.zeros_like(higgs.values)
    for t_f, face in enumerate(mesh.faces):
        a_f = areas[t_f]
        h = face_holonomy(mesh, conn, t_f)
        # curvature chain: 2 a f . d(i log(H)/a) -> Re tr(w_adj dH)
        w_adj = 2j * _dlog_adjoint(h, f[t_f])
        ts, mats = _face_transports(mesh, conn, t_f)

        def w_slot(s):
            """dH = pre (dW_s) post decomposition matrices."""
            pre = np.eye(n, dtype=complex)
            for r in range(s):
                pre = pre @ mats[r]
            post = np.eye(n, dtype=complex)
            for r in range(s + 1, 3):
                post = post @ mats[r]
            return pre, post

        for s, (t, sgn) in enumerate(face.edge_refs):
            pre, post = w_slot(s)
            w = mats[s]
            # dW = W X for forward use, dW = -X W for reversed use
            if sgn > 0:
                s_raw[t] += post @ w_adj @ pre @ w
            else:
                s_raw[t] -= w @ post @ w_adj @ pre
        # Higgs-value directions, f seen from each corner
        for tk, v in zip(ts, face.verts):
            fk = np.conj(tk.T) @ f[t_f] @ tk
            p = higgs.values[v]
            q_phi[v] += (2.0 * a_f / 3.0) * (fk @ p - p @ fk)
        # transport dependence of the corner contributions:
        # d(T C T*): 2 a f . (1/3) 2 Re(dT C T*) -> Re tr(S X)
        for k, v in zip((1, 2), face.verts[1:]):
            p = higgs.values[v]
            comm = p @ np.conj(p.T) - np.conj(p.T) @ p
            coeff = 4.0 * a_f / 3.0
            tk = ts[k]
            tail = comm @ np.conj(tk.T) @ f[t_f]
            if k == 1:
                # T_1 = W_0: dT = dW_0
                t0, sgn0 = face.edge_refs[0]
                if sgn0 > 0:
                    s_raw[t0] += coeff * tail @ mats[0]
                else:
                    s_raw[t0] -= coeff * mats[0] @ tail
            else:
                # T_2 = W_0 W_1: dT = dW_0 W_1 + W_0 dW_1
                t0, sgn0 = face.edge_refs[0]
                t1, sgn1 = face.edge_refs[1]
                if sgn0 > 0:
                    s_raw[t0] += coeff * mats[1] @ tail @ mats[0]
                else:
                    s_raw[t0] -= coeff * mats[0] @ mats[1] @ tail
                if sgn1 > 0:
                    s_raw[t1] += coeff * tail @ mats[0] @ mats[1]
                else:
                    s_raw[t1] -= coeff * mats[1] @ tail @ mats[0]
    # project onto the tangent spaces of the pairings
    grad_x = np.empty_like(s_raw)
    for t in range(len(s_raw)):
        g = 0.5 * (np.conj(s_raw[t].T) - s_raw[t])
        g -= np.trace(g) / n * eye
        grad_x[t] = g
    grad_phi = np.empty_like(q_phi)
    for v in range(len(q_phi)):
        g = 2.0 * q_phi[v]
        g -= np.trace(g) / n * eye
        grad_phi[v] = g
    return grad_x, grad_phi


def ymh_directional_derivative(mesh, conn, higgs, dx, dphi, eps=1e-6):
    """Central finite difference of ymh_value along (dx, dphi)."""

    def shifted(s):
        us = np.array([u @ _expm_skew(s * x) for u, x in zip(conn.transports, dx)])
        return (
            DiscreteConnection(us),
            DiscreteHiggs(higgs.values + s * dphi),
        )

    up, _ = ymh_value(mesh, *shifted(eps))
    dn, _ = ymh_value(mesh, *shifted(-eps))
    return (up - dn) / (2 * eps)


def ymh_flow_step(
    mesh: EquivariantMesh,
    conn: DiscreteConnection,
    higgs: DiscreteHiggs,
    dt: float,
    max_halvings: int = 30,
):
    """Damped explicit Euler step of the negative YMH gradient.

    Edges are re-unitarized by polar projection; the step is halved until
    the value does not increase.  Returns (conn', higgs', info).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    val0, _ = ymh_value(mesh, conn, higgs)
    gx, gphi = ymh_gradient(mesh, conn, higgs)
    step = dt
    for k in range(max_halvings + 1):
        us = []
        for u, x in zip(conn.transports, gx):
            cand = u @ _expm_skew(-step * x)
            # polar projection back to the unitary group
            w, _, vh = np.linalg.svd(cand)
            us.append(w @ vh)
        cand_conn = DiscreteConnection(np.array(us))
        cand_higgs = DiscreteHiggs(higgs.values - step * gphi)
        val1, _ = ymh_value(mesh, cand_conn, cand_higgs)
        if val1 <= val0 + 1e-14 * max(1.0, abs(val0)):
            return cand_conn, cand_higgs, {"ymh": val1, "dt": step, "halvings": k, "stalled": False}
        step *= 0.5
    return conn, higgs, {"ymh": val0, "dt": 0.0, "halvings": max_halvings, "stalled": True}


def gauge_transform(mesh: EquivariantMesh, conn, higgs, gs):
    """Vertex unitary gauge action: U_e -> g_src U_e g_dst*, Phi -> g Phi g*."""
    us = []
    for t, e in enumerate(mesh.edges):
        us.append(gs[e.src] @ conn.transports[t] @ np.conj(gs[e.dst].T))
    phis = np.array([g @ p @ np.conj(g.T) for g, p in zip(gs, higgs.values)])
    return DiscreteConnection(np.array(us)), DiscreteHiggs(phis)


# ---------------------------------------------------------------------------
# the matrix inequality probe
# ---------------------------------------------------------------------------

def _random_schur_sample(n: int, eigen_bound: float, rng) -> np.ndarray:
    d = rng.uniform(-eigen_bound, eigen_bound, size=n) + 1j * rng.uniform(
        -eigen_bound, eigen_bound, size=n
    )
    d = d * (eigen_bound / np.maximum(np.abs(d), eigen_bound))
    scale = 10.0 ** rng.uniform(-1.0, 3.0)
    nmat = np.triu(
        rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), k=1
    ) * scale
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(z)
    return q @ (np.diag(d) + nmat) @ np.conj(q.T)


def simpson_bound_probe(eigen_bound: float, trials: int, seed: int, n: int = 3):
    """Empirical constants for ||[P,P*]||^2 >= C1 ||P||^4 - C2 (1 + ||P||^2).

    Over random bounded-spectrum samples, returns the largest grid C1 and
    smallest grid C2 making the inequality hold on every sample, plus the
    binding sample.  The grids are powers of two; constants are empirical,
    not optimal.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    lhs = np.empty(trials)
    p4 = np.empty(trials)
    s2 = np.empty(trials)
    samples = []
    for t in range(trials):
        p = _random_schur_sample(n, eigen_bound, rng)
        samples.append(p)
        comm = p @ np.conj(p.T) - np.conj(p.T) @ p
        lhs[t] = np.sum(np.abs(comm) ** 2)
        nrm2 = float(np.sum(np.abs(p) ** 2))
        p4[t] = nrm2 * nrm2
        s2[t] = 1.0 + nrm2
    c2_cap = 2.0**40
    for k in range(0, 80):
        c1 = 2.0**-k
        need = np.max((c1 * p4 - lhs) / s2)
        if need <= c2_cap:
            c2_exp = max(0, math.ceil(math.log2(max(need, 1.0))))
            c2 = 2.0**c2_exp
            margin = lhs - c1 * p4 + c2 * s2
            worst = int(np.argmin(margin))
            assert np.all(margin >= 0)
            return c1, c2, samples[worst]
    raise RuntimeError("no grid constant found")


def upper_triangular_commutator_floor(n: int, trials: int, seed: int) -> float:
    """min ||[N,N*]||_F / ||N||_F^2 over random strictly upper triangular N."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(trials):
        scale = 10.0 ** rng.uniform(-2.0, 3.0)
        nm = np.triu(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), k=1) * scale
        nrm2 = float(np.sum(np.abs(nm) ** 2))
        if nrm2 == 0.0:
            continue
        comm = nm @ np.conj(nm.T) - np.conj(nm.T) @ nm
        worst = min(worst, math.sqrt(float(np.sum(np.abs(comm) ** 2))) / nrm2)
    return worst
