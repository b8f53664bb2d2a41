"""Hot numeric kernels: numba-jitted with pure-numpy fallbacks.

Every jitted function here has a `_np`-suffixed fallback with identical
semantics; `_accel.NUMBA_DISABLED` (env HODGELAB_NO_NUMBA=1) routes callers
to the fallback.  Agreement between the two paths is covered by tests and
the bundled benchmark.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit
from .jets import jet_from_taylor, linear_power_taylor, mobius_shift_taylor, series_compose, series_mul

__all__ = [
    "poincare_taylor",
    "poincare_values",
    "karcher_sweep",
    "HAVE_NUMBA",
]


def _poincare_power_taylor_np(mats, z, weight2, order, pole, exponent, scale):
    a, c, d = mats[:, 0, 0], mats[:, 1, 0], mats[:, 1, 1]
    b = mats[:, 0, 1]
    w0, shift = mobius_shift_taylor(a, b, c, d, z, order)
    u = w0 - pole
    if exponent < 0 and np.min(np.abs(u)) < 1e-8:
        raise ValueError("group orbit hits the seed pole")
    j = np.arange(order + 1)
    binom = np.ones(order + 1)
    for i in range(1, order + 1):
        binom[i] = binom[i - 1] * (exponent - i + 1) / i
    seed_tay = scale * binom * u[:, None] ** (exponent - j)
    comp = series_compose(seed_tay, shift)
    fac = linear_power_taylor(c, d, z, -weight2, order)
    return series_mul(comp, fac).sum(axis=0)


@njit
def _poincare_power_taylor_nb(mats, z, weight2, order, pole, exponent, scale):  # pragma: no cover
    m = order
    acc = np.zeros(m + 1, dtype=np.complex128)
    f = np.empty(m + 1, dtype=np.complex128)
    shift = np.empty(m + 1, dtype=np.complex128)
    comp = np.empty(m + 1, dtype=np.complex128)
    tmp = np.empty(m + 1, dtype=np.complex128)
    fac = np.empty(m + 1, dtype=np.complex128)
    for t in range(mats.shape[0]):
        a = mats[t, 0, 0]
        b = mats[t, 0, 1]
        c = mats[t, 1, 0]
        d = mats[t, 1, 1]
        den = c * z + d
        w = (a * z + b) / den
        u = w - pole
        coef = scale * u**exponent
        f[0] = coef
        for jj in range(1, m + 1):
            coef = coef * (exponent - (jj - 1)) / jj / u
            f[jj] = coef
        shift[0] = 0.0
        if m >= 1:
            p = 1.0 / (den * den)
            for jj in range(1, m + 1):
                shift[jj] = p
                p = p * (-c) / den
        for jj in range(m + 1):
            comp[jj] = 0.0
        comp[0] = f[m]
        for kk in range(m - 1, -1, -1):
            for jj in range(m, -1, -1):
                s = 0.0 + 0.0j
                for ii in range(jj + 1):
                    s += comp[ii] * shift[jj - ii]
                tmp[jj] = s
            for jj in range(m + 1):
                comp[jj] = tmp[jj]
            comp[0] += f[kk]
        bqq = 1.0
        dpow = den ** (-weight2)
        cpow = 1.0 + 0.0j
        for jj in range(m + 1):
            if jj > 0:
                bqq = bqq * (-weight2 - (jj - 1)) / jj
                dpow = dpow / den
                cpow = cpow * c
            fac[jj] = bqq * dpow * cpow
        for jj in range(m + 1):
            s = 0.0 + 0.0j
            for ii in range(jj + 1):
                s += comp[ii] * fac[jj - ii]
            acc[jj] += s
    return acc


def _poincare_values_np(mats, zs, weight2, pole, exponent, scale):
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    out = np.zeros(len(zs), dtype=complex)
    chunk = 1 << 16
    for lo in range(0, len(mats), chunk):
        aa, bb = a[lo : lo + chunk, None], b[lo : lo + chunk, None]
        cc, dd = c[lo : lo + chunk, None], d[lo : lo + chunk, None]
        den = cc * zs[None, :] + dd
        w = (aa * zs[None, :] + bb) / den
        out += (scale * (w - pole) ** exponent * den ** (-weight2)).sum(axis=0)
    return out


@njit
def _poincare_values_nb(mats, zs, weight2, pole, exponent, scale):  # pragma: no cover
    out = np.zeros(zs.shape[0], dtype=np.complex128)
    for t in range(mats.shape[0]):
        a = mats[t, 0, 0]
        b = mats[t, 0, 1]
        c = mats[t, 1, 0]
        d = mats[t, 1, 1]
        for p in range(zs.shape[0]):
            den = c * zs[p] + d
            w = (a * zs[p] + b) / den
            out[p] += scale * (w - pole) ** exponent * den ** (-weight2)
    return out


def poincare_values(mats, zs, weight, pole, exponent, scale):
    """Order-0 series values at many points in one pass over the elements."""
    zs = np.ascontiguousarray(np.asarray(zs, dtype=complex).ravel())
    if HAVE_NUMBA:
        return _poincare_values_nb(
            np.ascontiguousarray(mats), zs, 2 * weight, complex(pole), int(exponent), complex(scale)
        )
    return _poincare_values_np(mats, zs, 2 * weight, complex(pole), int(exponent), complex(scale))


def poincare_taylor(mats, z, weight, order, pole, exponent, scale):
    """Taylor coefficients at z of sum_gamma seed(gamma z) (gamma'(z))^weight.

    The seed is scale*(w - pole)^exponent; `mats` is the (N,2,2) stack of
    group elements in deterministic order.
    """
    if HAVE_NUMBA:
        return _poincare_power_taylor_nb(
            np.ascontiguousarray(mats), complex(z), 2 * weight, int(order),
            complex(pole), int(exponent), complex(scale),
        )
    return _poincare_power_taylor_np(
        mats, complex(z), 2 * weight, int(order), complex(pole), int(exponent), complex(scale)
    )


# ---------------------------------------------------------------------------
# positive hermitian det-1 relaxation kernels
# ---------------------------------------------------------------------------

def _karcher_sweep_py(u, order, nb_ptr, nb_idx, nb_twist, nb_w, subiters):
    """One relaxation sweep; returns sup of the local gradient norms.

    ``u`` is modified in place: each vertex (in the given order) is replaced
    by its weighted Karcher mean of twisted neighbor values, solved by
    ``subiters`` fixed-point exponential-map updates, with the trace of each
    log-update removed to stay on det = 1.
    """
    n = u.shape[1]
    supgrad = 0.0
    for v in order:
        lo, hi = nb_ptr[v], nb_ptr[v + 1]
        if hi == lo:
            continue
        wsum = 0.0
        for e in range(lo, hi):
            wsum += nb_w[e]
        first = True
        for it in range(subiters):
            lam, vec = np.linalg.eigh(u[v])
            rs = np.sqrt(lam)
            sq = (vec * rs) @ np.conj(vec.T)
            isq = (vec / rs) @ np.conj(vec.T)
            s = np.zeros((n, n), dtype=np.complex128)
            for e in range(lo, hi):
                t = nb_twist[e]
                x = np.conj(t.T) @ u[nb_idx[e]] @ t
                y = isq @ x @ isq
                lam2, vec2 = np.linalg.eigh(y)
                lg = (vec2 * np.log(lam2)) @ np.conj(vec2.T)
                s += nb_w[e] * lg
            if first:
                g = 0.0
                for i in range(n):
                    for jj in range(n):
                        g += abs(s[i, jj]) ** 2
                g = np.sqrt(g)
                if g > supgrad:
                    supgrad = g
                first = False
            s = s / wsum
            tr = 0.0 + 0.0j
            for i in range(n):
                tr += s[i, i]
            for i in range(n):
                s[i, i] -= tr / n
            lam3, vec3 = np.linalg.eigh(s)
            ex = (vec3 * np.exp(lam3)) @ np.conj(vec3.T)
            unew = sq @ ex @ sq
            unew = 0.5 * (unew + np.conj(unew.T))
            u[v] = unew
    return supgrad


if HAVE_NUMBA:
    _karcher_sweep_nb = njit(_karcher_sweep_py)


def karcher_sweep(u, order, nb_ptr, nb_idx, nb_twist, nb_w, subiters=5):
    if HAVE_NUMBA:
        return _karcher_sweep_nb(u, order, nb_ptr, nb_idx, nb_twist, nb_w, subiters)
    return _karcher_sweep_py(u, order, nb_ptr, nb_idx, nb_twist, nb_w, subiters)
