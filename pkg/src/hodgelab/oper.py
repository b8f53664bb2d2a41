"""Schwarzian calculus, oper ODE families, monodromy, and Eichler cocycles.

Conventions fixed here once and used everywhere:

* Solutions of y^(n) + Q_2 y^(n-2) + ... + Q_n y = 0 are carried as
  derivative stacks (y, y', ..., y^(n-1)); the fundamental matrix at the
  basepoint z0 is the identity in those coordinates.
* Continuation around gamma pulls back by the weight rule
  yhat(z) = y(gamma z) (c z + d)^(n-1), the integer-exponent form of
  (gamma')^(1-q) with q = (n+1)/2, taken on the positive-trace matrix lift.
* Monodromy images are reported in the frame aligned with the monomial
  basis (z^(n-1), ..., z, 1) at z0 and compose as an honest homomorphism
  rho(gamma delta) = rho(gamma) rho(delta).  For the zero-coefficient
  equation this makes rho(gamma) literally the symmetric-power image of
  the generator matrices.
* Eichler cocycles are row vectors obeying v_(gamma delta) =
  v_gamma rho(delta) + v_delta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .forms import AutomorphicForm, automorphy_residual
from .hyp import FuchsianGroup, GroupWord, HPath, Moebius, mobius_apply, translate_path
from .jets import (
    JetProvider,
    ZeroJet,
    jet_from_taylor,
    linear_power_taylor,
    mobius_shift_taylor,
    series_compose,
    series_deriv,
    series_int_pow,
    series_mul,
    series_ode_extend,
    taylor_from_jet,
)

__all__ = [
    "ProjectiveConnection",
    "OperODE",
    "MonodromyRep",
    "EichlerCocycle",
    "schwarzian",
    "ode_from_projective",
    "wk_covariants",
    "transform_coefficients",
    "wk_transformation_check",
    "integrate_ode",
    "monodromy",
    "eichler_cocycle",
    "oper_difference",
    "solution_frame",
    "OdeIntegrationError",
]


class OdeIntegrationError(RuntimeError):
    pass


def schwarzian(f: JetProvider, z: complex) -> complex:
    """f'''/f' - (3/2)(f''/f')^2; rejects critical points of f."""
    st = f.evaluate(z, 3)
    fp, fpp, fppp = st[1], st[2], st[3]
    if abs(fp) <= 1e-12:
        raise ValueError(f"critical point of f at {z}")
    return complex(fppp / fp - 1.5 * (fpp / fp) ** 2)


@dataclass(frozen=True)
class ProjectiveConnection:
    """Local functions S = 2Q in the H-coordinate chart."""

    Q: JetProvider
    chart: str = "H"

    def s_value(self, z: complex) -> complex:
        return 2.0 * complex(self.Q.evaluate(z, 0)[0])


class _DerivedJet(JetProvider):
    """Jet provider computed from the Taylor series of a base provider."""

    def __init__(self, base: JetProvider, build, extra_order: int):
        super().__init__()
        self.base = base
        self.build = build
        self.extra = int(extra_order)

    def _taylor(self, z, order):
        q = taylor_from_jet(self.base.evaluate(z, order + self.extra))
        return self.build(q)[: order + 1]


def _d(q, r):
    out = q
    for _ in range(r):
        out = series_deriv(out)
    return out


def _trunc(arrs, m):
    return sum(a[:m] for a in arrs)


# principal-family coefficient tables, (builder, derivative depth) per Q_j;
# each builder truncates all summands to the common length len(q) - depth
_PRINCIPAL = {
    2: [(lambda q: q, 0)],
    3: [(lambda q: 4 * q, 0), (lambda q: 2 * _d(q, 1), 1)],
    4: [
        (lambda q: 10 * q, 0),
        (lambda q: 10 * _d(q, 1), 1),
        (lambda q: _trunc([9 * series_mul(q, q), 3 * _d(q, 2)], len(q) - 2), 2),
    ],
    5: [
        (lambda q: 20 * q, 0),
        (lambda q: 30 * _d(q, 1), 1),
        (lambda q: _trunc([64 * series_mul(q, q), 18 * _d(q, 2)], len(q) - 2), 2),
        (
            lambda q: _trunc(
                [64 * series_mul(q, _d(q, 1)), 4 * _d(q, 3)], len(q) - 3
            ),
            3,
        ),
    ],
    6: [
        (lambda q: 35 * q, 0),
        (lambda q: 70 * _d(q, 1), 1),
        (lambda q: _trunc([63 * _d(q, 2), 259 * series_mul(q, q)], len(q) - 2), 2),
        (
            lambda q: _trunc(
                [28 * _d(q, 3), 518 * series_mul(q, _d(q, 1))], len(q) - 3
            ),
            3,
        ),
        (
            lambda q: _trunc(
                [
                    130 * series_mul(_d(q, 1), _d(q, 1)),
                    155 * series_mul(q, _d(q, 2)),
                    5 * _d(q, 4),
                    225 * series_mul(series_mul(q, q), q),
                ],
                len(q) - 4,
            ),
            4,
        ),
    ],
}


@dataclass
class OperODE:
    """y^(n) + Q_2 y^(n-2) + ... + Q_n y = 0 with jet-provider coefficients."""

    n: int
    coefficients: list  # JetProviders Q_2..Q_n

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("order must be >= 2")
        if len(self.coefficients) != self.n - 1:
            raise ValueError(f"need {self.n - 1} coefficients Q_2..Q_{self.n}")

    @property
    def q(self) -> float:
        return (self.n + 1) / 2.0

    def coefficient_values(self, z: complex) -> np.ndarray:
        return np.array([c.evaluate(z, 0)[0] for c in self.coefficients], dtype=complex)

    def companion(self, z: complex) -> np.ndarray:
        """First-order system matrix on derivative stacks (y, ..., y^(n-1))."""
        n = self.n
        m = np.zeros((n, n), dtype=complex)
        for i in range(n - 1):
            m[i, i + 1] = 1.0
        vals = self.coefficient_values(z)
        for j, qj in enumerate(vals, start=2):
            m[n - 1, n - j] = -qj
        return m

    def coefficient_taylors(self, z: complex, order: int) -> list[np.ndarray]:
        return [taylor_from_jet(c.evaluate(z, order)) for c in self.coefficients]


def ode_from_projective(n: int, Q: JetProvider) -> OperODE:
    """The principal oper family for 2 <= n <= 6 with projective datum 2Q."""
    if n not in _PRINCIPAL:
        raise ValueError("principal families are tabulated for 2 <= n <= 6 only")
    coeffs = [_DerivedJet(Q, build, extra) for build, extra in _PRINCIPAL[n]]
    return OperODE(n, coeffs)


# ---------------------------------------------------------------------------
# w_k covariants
# ---------------------------------------------------------------------------

def _wk_from_taylor(n: int, q2, q3, q4):
    """(w2, w3, w4) scalars from coefficient Taylor arrays (orders >= 2,1,0)."""
    w2 = complex(q2[0])
    w3 = None
    w4 = None
    if n >= 3 and q3 is not None:
        w3 = complex(q3[0] - 0.5 * (n - 2) * q2[1])
    if n >= 4 and q4 is not None:
        c22 = (n - 2) * (n - 3) / 10.0
        c2sq = (n - 2) * (n - 3) * (5 * n + 7) / (10.0 * n * (n * n - 1))
        w4 = complex(q4[0] - 0.5 * (n - 3) * q3[1] + c22 * 2.0 * q2[2] - c2sq * q2[0] ** 2)
    return w2, w3, w4


def wk_covariants(n: int, Q2: JetProvider, Q3: JetProvider | None, Q4: JetProvider | None, z: complex):
    """Covariant densities (w2, w3, w4) at z; undefined slots are None."""
    q2 = taylor_from_jet(Q2.evaluate(z, 2))
    q3 = taylor_from_jet(Q3.evaluate(z, 1)) if (n >= 3 and Q3 is not None) else None
    q4 = taylor_from_jet(Q4.evaluate(z, 0)) if (n >= 4 and Q4 is not None) else None
    return _wk_from_taylor(n, q2, q3, q4)


def transform_coefficients(n: int, coefficients, change: Moebius, z0: complex, order: int = 2):
    """Taylor arrays of the transformed Q_j at w0 = change(z0).

    The operator is transported as a map K^(1-q) -> K^q: a solution jet in
    the w-coordinate is pulled back with the factor (cz+d)^(n-1), the
    operator applied in z, the result pushed forward with (cz+d)^(n+1), and
    re-expanded about w0.  Coefficients are then read off triangularly.
    """
    big = order + n + 2
    a, b, c, d = change.a, change.b, change.c, change.d
    w0, shift_w = mobius_shift_taylor(a, b, c, d, z0, big)
    pull = linear_power_taylor(np.asarray(c), np.asarray(d), z0, n - 1, big)
    push = linear_power_taylor(np.asarray(c), np.asarray(d), z0, n + 1, big)
    inv = change.inv()
    _, shift_z = mobius_shift_taylor(inv.a, inv.b, inv.c, inv.d, complex(w0), big)
    q_tays = [taylor_from_jet(cf.evaluate(complex(z0), big)) for cf in coefficients]

    h_series = []
    for i in range(0, n - 1):
        y = series_mul(series_int_pow(shift_w, i), pull)
        dy = _d(y, n)
        rhs = dy.copy()
        for j, qt in enumerate(q_tays, start=2):
            term = series_mul(qt[: len(dy)], _d(y, n - j)[: len(dy)])
            rhs = rhs + term[: len(rhs)]
        g = series_mul(rhs, push[: len(rhs)])
        h = series_compose(g, shift_z[: len(g)])
        h_series.append(h)

    out: dict[int, np.ndarray] = {}
    # equation for test jet s^i determines Qt_{n-i} given Qt_j, j > n-i
    for i in range(0, n - 1):
        j_target = n - i
        h = h_series[i][: order + 1].copy()
        for j in range(j_target + 1, n + 1):
            power = i - n + j
            if power > order:
                continue
            fac = math.factorial(i) / math.factorial(power)
            shifted = np.zeros(order + 1, dtype=complex)
            shifted[power:] = out[j][: order + 1 - power]
            h = h - fac * shifted
        out[j_target] = h / math.factorial(i)
    return [out[j] for j in range(2, n + 1)]


def wk_transformation_check(n: int, coefficients, change: Moebius, samples) -> float:
    """Max defect |w_k(w0) (w'(z0))^k - w_k(z0)| over samples, k = 2,3,4."""
    worst = 0.0
    for z0 in samples:
        z0 = complex(z0)
        q2 = taylor_from_jet(coefficients[0].evaluate(z0, 2))
        q3 = taylor_from_jet(coefficients[1].evaluate(z0, 1)) if n >= 3 else None
        q4 = taylor_from_jet(coefficients[2].evaluate(z0, 0)) if n >= 4 else None
        w_here = _wk_from_taylor(n, q2, q3, q4)
        tq = transform_coefficients(n, coefficients, change, z0, order=2)
        w_there = _wk_from_taylor(n, tq[0], tq[1] if n >= 3 else None, tq[2] if n >= 4 else None)
        dw = (change.c * z0 + change.d) ** (-2)
        for k, (wt, wz) in enumerate(zip(w_there, w_here), start=2):
            if wt is None or wz is None:
                continue
            worst = max(worst, abs(wt * dw**k - wz))
    return worst


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _integrate_segment(rhs, za, zb, y, rtol, atol, max_steps):
    """Adaptive Dormand-Prince 5(4) for dY/dz = rhs(z) applied along [za, zb]."""
    span = zb - za
    if span == 0:
        return y, 0

    def f(t, m):
        return span * rhs(za + span * t, m)

    t, h = 0.0, 0.1
    steps = 0
    k1 = f(0.0, y)
    while t < 1.0:
        h = min(h, 1.0 - t)
        if h < 1e-14:
            raise OdeIntegrationError(f"step-size underflow on arc {za} -> {zb}")
        ks = [k1]
        for s in range(1, 7):
            ys = y + h * sum(aa * kk for aa, kk in zip(_DP_A[s], ks))
            ks.append(f(t + _DP_C[s] * h, ys))
        y5 = y + h * sum(bb * kk for bb, kk in zip(_DP_B5, ks))
        y4 = y + h * sum(bb * kk for bb, kk in zip(_DP_B4, ks))
        scale = atol + rtol * np.maximum(np.abs(y5), np.abs(y))
        err = float(np.max(np.abs(y5 - y4) / scale))
        steps += 1
        if steps > max_steps:
            raise OdeIntegrationError(f"step budget exhausted on arc {za} -> {zb}")
        if err <= 1.0:
            t += h
            y = y5
            k1 = ks[6]  # FSAL
            grow = 0.9 * err ** -0.2 if err > 0 else 5.0
            h *= min(5.0, max(0.2, grow))
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return y, steps


def integrate_ode(
    ode: OperODE,
    path: HPath,
    initial: np.ndarray,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 200_000,
    inhomogeneity: JetProvider | None = None,
):
    """Continue the companion system Y' = C(z) Y along the polyline.

    ``initial`` is an (n, m) matrix of derivative stacks.  When
    ``inhomogeneity`` is given, its value is added to the derivative of the
    last row of the final column (particular-solution column).  Returns
    (Y_end, info) with the step count and Wronskian drift of the leading
    n x n block when it is square.
    """
    y = np.array(initial, dtype=complex)
    n = ode.n
    if y.shape[0] != n:
        raise ValueError("initial matrix has the wrong row count")
    square = y.shape[0] == y.shape[1] and inhomogeneity is None

    if square and abs(np.linalg.det(y)) <= 1e-10:
        raise ValueError("initial fundamental matrix is numerically singular")

    if inhomogeneity is None:

        def rhs(z, m):
            return ode.companion(z) @ m

    else:

        def rhs(z, m):
            out = ode.companion(z) @ m
            out[n - 1, -1] += inhomogeneity.evaluate(z, 0)[0]
            return out

    det0 = abs(np.linalg.det(y[:, :n])) if y.shape[1] >= n else None
    total = 0
    for za, zb in zip(path.vertices, path.vertices[1:]):
        y, steps = _integrate_segment(rhs, za, zb, y, rtol, atol, max_steps)
        total += steps
    drift = None
    if det0 is not None and y.shape[1] >= n and inhomogeneity is None:
        drift = abs(abs(np.linalg.det(y[:, :n])) - det0)
    return y, {"steps": total, "wronskian_drift": drift}


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def solution_frame(n: int, z0: complex) -> np.ndarray:
    """Derivative stacks of the monomials (z^(n-1), ..., z, 1) at z0."""
    c = np.zeros((n, n), dtype=complex)
    for i in range(n):
        deg = n - 1 - i
        for r in range(deg + 1):
            c[r, i] = math.factorial(deg) / math.factorial(deg - r) * z0 ** (deg - r)
    return c


def _jet_transport(m: Moebius, z0: complex, n: int) -> np.ndarray:
    """Matrix sending derivative stacks at m(z0) to stacks of the pullback.

    The pullback is yhat(z) = y(m z) (c z + d)^(n-1), the integer form of
    the weight-(1-q) automorphy factor on the given matrix lift.
    """
    w0, shift = mobius_shift_taylor(m.a, m.b, m.c, m.d, z0, n - 1)
    fac = linear_power_taylor(np.asarray(m.c), np.asarray(m.d), z0, n - 1, n - 1)
    cols = []
    for i in range(n):
        # image of the i-th unit derivative stack: Taylor coefficient 1/i!
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0 / math.factorial(i)
        tay = series_mul(series_compose(e, shift), fac)
        cols.append(jet_from_taylor(tay))
    return np.stack(cols, axis=1)


@dataclass
class MonodromyRep:
    n: int
    images: list[np.ndarray]
    z0: complex
    tol: float
    relation_residual: float = field(default=np.nan)
    wronskian_drift: float = field(default=np.nan)
    words: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.images = [np.asarray(m, dtype=complex) for m in self.images]

    def det_errors(self) -> np.ndarray:
        return np.array([abs(np.linalg.det(m) - 1.0) for m in self.images])

    def image_of_word(self, letters) -> np.ndarray:
        out = np.eye(self.n, dtype=complex)
        for l in letters:
            g = self.images[abs(l) - 1]
            out = out @ (g if l > 0 else np.linalg.inv(g))
        return out


def _commutator_product(images: list[np.ndarray]) -> np.ndarray:
    n = images[0].shape[0]
    m = np.eye(n, dtype=complex)
    for i in range(len(images) // 2):
        a, b = images[2 * i], images[2 * i + 1]
        m = m @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    return m


def _coefficient_residual(ode: OperODE, group: FuchsianGroup, z0: complex) -> float:
    worst = 0.0
    samples = [(group.word([i + 1]), z0) for i in range(2 * group.genus)]
    for j, coeff in enumerate(ode.coefficients, start=2):
        if isinstance(coeff, AutomorphicForm):
            worst = max(worst, automorphy_residual(coeff, samples))
        elif isinstance(coeff, ZeroJet):
            continue
        else:
            # exact invariance is the caller's responsibility; measure anyway
            for g, z in samples:
                m = Moebius.from_array(g.matrix)
                gz = mobius_apply(m, z)
                dg = (m.c * z + m.d) ** (-2)
                worst = max(
                    worst,
                    abs(coeff.evaluate(gz, 0)[0] * dg**j - coeff.evaluate(z, 0)[0]),
                )
    return worst


def monodromy(
    ode: OperODE,
    group: FuchsianGroup,
    z0: complex = 1j,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float = 0.5,
) -> MonodromyRep:
    """Monodromy images of the group generators, composing as a homomorphism.

    Each generator is continued along its translate path; the continued
    frame is pulled back by the automorphy jets of the generator at z0 and
    re-expressed in the monomial frame.
    """
    z0 = complex(z0)
    res = _coefficient_residual(ode, group, z0)
    if res > 1e-4:
        warnings.warn(
            f"coefficient automorphy residual {res:.2e} exceeds 1e-4 at the basepoint",
            stacklevel=2,
        )
    n = ode.n
    frame = solution_frame(n, z0)
    frame_inv = np.linalg.inv(frame)
    images = []
    drift = 0.0
    for i in range(2 * group.genus):
        word = group.word([i + 1])
        path = translate_path(group, word, z0, max_step)
        y_end, info = integrate_ode(ode, path, np.eye(n, dtype=complex), rtol, atol)
        drift = max(drift, info["wronskian_drift"])
        transport = _jet_transport(group.generators[i], z0, n)
        images.append((frame_inv @ transport @ y_end @ frame).T)
    rel = _commutator_product(images)
    eye = np.eye(n)
    rel_res = float(min(np.max(np.abs(rel - eye)), np.max(np.abs(rel + eye))))
    return MonodromyRep(
        n,
        images,
        z0,
        tol=rtol,
        relation_residual=rel_res,
        wronskian_drift=drift,
        words=[f"a{i // 2 + 1}" if i % 2 == 0 else f"b{i // 2 + 1}" for i in range(len(images))],
    )


# ---------------------------------------------------------------------------
# Eichler cocycles
# ---------------------------------------------------------------------------

@dataclass
class EichlerCocycle:
    """Row-vector cocycle v with v_(gamma delta) = v_gamma rho(delta) + v_delta."""

    q: int
    rep: MonodromyRep
    vectors: dict[int, np.ndarray]  # letter (1-based index) -> v of that generator

    def value(self, letters) -> np.ndarray:
        v = np.zeros(self.rep.n, dtype=complex)
        rho = np.eye(self.rep.n, dtype=complex)
        for l in letters:
            g = self.rep.images[abs(l) - 1]
            if l > 0:
                vl = self.vectors[l]
                gl = g
            else:
                gl = np.linalg.inv(g)
                vl = -self.vectors[-l] @ gl
            v = v @ gl + vl
            rho = rho @ gl
        return v


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _local_solution_basis(ode, mid, order=20):
    """Taylor series (about mid) of the n solutions with unit derivative stacks."""
    n = ode.n
    q_tays = ode.coefficient_taylors(mid, order - n)
    cols = []
    for i in range(n):
        head = np.zeros(n, dtype=complex)
        head[i] = 1.0 / math.factorial(i)
        cols.append(series_ode_extend(q_tays, head, order))
    return cols


def _stack_at(cols, dz):
    """Derivative-stack matrix of the local basis at offset dz from mid."""
    n = len(cols)
    out = np.empty((n, n), dtype=complex)
    for i, c in enumerate(cols):
        s = c
        for r in range(n):
            out[r, i] = np.polynomial.polynomial.polyval(dz, s)
            s = series_deriv(s)
    return out


def _particular_quadrature(ode, omega, group, word, z0, frame_inv, rtol, atol, max_step):
    """Variation-of-parameters form of the particular continuation.

    u(end) = Y(end) * sum over segments of int Y(s)^-1 e_n omega(s) ds, with
    Y(s) reconstructed inside each segment from a local Taylor basis and the
    omega values fetched in one batched pass over the group elements.
    """
    n = ode.n
    path = translate_path(group, word, z0, max_step)
    segs = list(zip(path.vertices, path.vertices[1:]))
    # one batched omega evaluation over every quadrature node of the path
    nodes = []
    for za, zb in segs:
        mid, half = 0.5 * (za + zb), 0.5 * (zb - za)
        nodes.append(mid + half * _GAUSS_NODES)
    omega_vals = (
        omega.values(np.concatenate(nodes))
        if hasattr(omega, "values")
        else np.array([omega.evaluate(z, 0)[0] for z in np.concatenate(nodes)])
    )
    y = np.eye(n, dtype=complex)
    total = np.zeros(n, dtype=complex)
    en = np.zeros(n, dtype=complex)
    en[n - 1] = 1.0
    pos = 0
    for (za, zb), node_z in zip(segs, nodes):
        mid, half = 0.5 * (za + zb), 0.5 * (zb - za)
        cols = _local_solution_basis(ode, mid)
        phi_a = _stack_at(cols, za - mid)
        contrib = np.zeros(n, dtype=complex)
        for wgt, zk in zip(_GAUSS_WEIGHTS, node_z):
            phi = _stack_at(cols, zk - mid)
            contrib += wgt * omega_vals[pos] * np.linalg.solve(phi, en)
            pos += 1
        total += np.linalg.solve(y, phi_a @ contrib) * half
        # propagate Y across the segment with the same local basis
        y = _stack_at(cols, zb - mid) @ np.linalg.solve(phi_a, y)
    u_end = y @ total
    transport = _jet_transport(Moebius.from_array(word.matrix), z0, n)
    return (frame_inv @ transport @ u_end).T


def _particular_vector(
    ode, omega, group, word, z0, frame_inv, rtol, atol, max_step, method="auto"
):
    if method == "auto":
        heavy = isinstance(omega, AutomorphicForm) and omega.radius >= 5
        method = "quadrature" if heavy else "rk"
    if method == "quadrature":
        return _particular_quadrature(
            ode, omega, group, word, z0, frame_inv, rtol, atol, max_step
        )
    n = ode.n
    path = translate_path(group, word, z0, max_step)
    init = np.zeros((n, n + 1), dtype=complex)
    init[:, :n] = np.eye(n)
    y_end, _ = integrate_ode(ode, path, init, rtol, atol, inhomogeneity=omega)
    transport = _jet_transport(Moebius.from_array(word.matrix), z0, n)
    return (frame_inv @ transport @ y_end[:, n]).T


def eichler_cocycle(
    ode: OperODE,
    omega,
    group: FuchsianGroup,
    z0: complex = 1j,
    rep: MonodromyRep | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float = 0.5,
    method: str = "auto",
) -> EichlerCocycle:
    """Cocycle of the inhomogeneous equation D y = omega over the group.

    For each generator the particular solution with zero jets at z0 is
    continued along the translate path; the mismatch between its pullback
    and itself is a homogeneous solution read off in the monomial frame.
    """
    if ode.n % 2 == 0:
        raise ValueError("integer-weight forms exist only for odd order n = 2q - 1")
    q = (ode.n + 1) // 2
    w = getattr(omega, "weight", None)
    if w is not None and w != q:
        raise ValueError(f"form weight {w} does not match the K^{q} target")
    z0 = complex(z0)
    if rep is None:
        rep = monodromy(ode, group, z0, rtol, atol, max_step)
    frame_inv = np.linalg.inv(solution_frame(ode.n, z0))
    vectors = {}
    for i in range(2 * group.genus):
        word = group.word([i + 1])
        vectors[i + 1] = _particular_vector(
            ode, omega, group, word, z0, frame_inv, rtol, atol, max_step, method
        )
    return EichlerCocycle(q=q, rep=rep, vectors=vectors)


def eichler_direct_value(
    cocycle: EichlerCocycle,
    ode: OperODE,
    omega,
    group: FuchsianGroup,
    letters,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float = 0.5,
    method: str = "auto",
) -> np.ndarray:
    """Cocycle value of an arbitrary word by direct continuation."""
    word = group.word(letters)
    frame_inv = np.linalg.inv(solution_frame(ode.n, cocycle.rep.z0))
    return _particular_vector(
        ode, omega, group, word, cocycle.rep.z0, frame_inv, rtol, atol, max_step, method
    )


# ---------------------------------------------------------------------------
# oper differences
# ---------------------------------------------------------------------------

def oper_difference(d1: OperODE, d2: OperODE, samples):
    """Componentwise (dw2, dw3, dw4) of the two opers at the samples."""
    if d1.n != d2.n:
        raise ValueError("opers must have equal order")
    n = d1.n

    def pick(ode, j):
        return ode.coefficients[j - 2] if n >= j else None

    out = []
    for z in samples:
        w1 = wk_covariants(n, d1.coefficients[0], pick(d1, 3), pick(d1, 4), z)
        w2 = wk_covariants(n, d2.coefficients[0], pick(d2, 3), pick(d2, 4), z)
        out.append(
            tuple(
                None if (a is None or b is None) else a - b
                for a, b in zip(w1, w2)
            )
        )
    return out
