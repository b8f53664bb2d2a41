"""The acceptance battery: one callable per criterion, at pinned tolerances.

``run_suite("full")`` exercises every criterion at the stated scale;
``"smoke"`` shrinks radii/refinements to stay under a minute.  Each check
returns a CriterionResult; the pytest acceptance module asserts them
one-to-one and the CLI ``suite`` command prints the table.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import cli, forms, gauge, harmonic, hn, jets, oper, rep
from .hyp import Moebius, octagon_group

__all__ = ["CriterionResult", "run_suite", "CRITERIA"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail):
    return CriterionResult(name, bool(passed), detail)


# -- 1 ----------------------------------------------------------------------

def schwarzian_suite(scale: str) -> CriterionResult:
    t0 = time.time()
    rng = np.random.default_rng(101)
    # S(Moebius) = 0 to 1e-12
    worst_mob = 0.0
    for _ in range(10):
        m = rng.normal(size=(2, 2))
        m /= np.sqrt(abs(np.linalg.det(m)))
        f = jets.RationalJet([m[0, 1], m[0, 0]], [m[1, 1], m[1, 0]])
        z = complex(rng.normal(scale=0.3), 1.0 + rng.random())
        worst_mob = max(worst_mob, abs(oper.schwarzian(f, z)))
    # cocycle identity over random analytic pairs
    pairs = 100 if scale == "full" else 20
    worst_coc = 0.0
    for _ in range(pairs):
        fc = rng.normal(size=5) + 1j * rng.normal(size=5)
        gc = rng.normal(size=5) + 1j * rng.normal(size=5)
        f, g = jets.PolynomialJet(fc), jets.PolynomialJet(gc)
        z = complex(rng.normal(scale=0.4), rng.normal(scale=0.4))
        gj = g.evaluate(z, 3)
        if abs(gj[1]) < 1e-3:
            continue
        fj = f.evaluate(complex(gj[0]), 3)
        if abs(fj[1]) < 1e-3:
            continue
        comp_tay = jets.series_compose(
            jets.taylor_from_jet(fj),
            np.concatenate([[0.0], jets.taylor_from_jet(gj)[1:]]),
        )
        s_fg = _schwarzian_of_taylor(comp_tay)
        s_f = oper.schwarzian(f, complex(gj[0]))
        s_g = oper.schwarzian(g, z)
        worst_coc = max(worst_coc, abs(s_fg - (s_f * gj[1] ** 2 + s_g)))
    # ratio-of-solutions law for random Q
    worst_ratio = 0.0
    for k in range(5):
        q = jets.PowerJet(0.3 * rng.normal() + 0.3j * rng.normal(), -1.3j - 0.4 * k, -4)
        ode = oper.OperODE(2, [q])
        z1 = 0.35 + 1.1j
        y_end, _ = oper.integrate_ode(ode, _straight_path(1j, z1), np.eye(2, dtype=complex))
        qt = jets.taylor_from_jet(q.evaluate(z1, 4))
        y1 = jets.series_ode_extend([qt], jets.taylor_from_jet(y_end[:, 0]), 4)
        y2 = jets.series_ode_extend([qt], jets.taylor_from_jet(y_end[:, 1]), 4)
        ratio = jets.series_mul(y1, jets.series_recip(y2))
        worst_ratio = max(worst_ratio, abs(_schwarzian_of_taylor(ratio) - 2 * q(z1)))
    took = time.time() - t0
    ok = worst_mob < 1e-12 and worst_coc < 1e-9 and worst_ratio < 1e-7 and took < 5.0
    return _result(
        "1 schwarzian suite",
        ok,
        f"S(mobius)={worst_mob:.1e} cocycle={worst_coc:.1e} ratio={worst_ratio:.1e} ({took:.1f}s)",
    )


def _schwarzian_of_taylor(tay: np.ndarray) -> complex:
    j = jets.jet_from_taylor(tay[:4])
    return complex(j[3] / j[1] - 1.5 * (j[2] / j[1]) ** 2)


def _straight_path(a, b):
    from .hyp import HPath

    return HPath((a, b))


# -- 2, 3, 5 ----------------------------------------------------------------

def _zero_ode(n):
    return oper.OperODE(n, [jets.ZeroJet() for _ in range(n - 1)])


def monodromy_oracle(scale: str) -> CriterionResult:
    t0 = time.time()
    group = octagon_group()
    rep2 = oper.monodromy(_zero_ode(2), group)
    err2 = max(
        float(np.max(np.abs(rep2.images[i] - group.generators[i].array())))
        for i in range(4)
    )
    rep3 = oper.monodromy(_zero_ode(3), group)
    err3 = max(
        float(np.max(np.abs(rep3.images[i] - rep.principal_embedding(3, group.generators[i].array()))))
        for i in range(4)
    )
    rel = max(rep2.relation_residual, rep3.relation_residual)
    took = time.time() - t0
    ok = err2 < 1e-6 and err3 < 1e-6 and rel < 1e-5 and took < 30.0
    _MONO_CACHE["2"] = rep2
    _MONO_CACHE["3"] = rep3
    return _result(
        "2 monodromy oracle",
        ok,
        f"n=2 err={err2:.1e} n=3 err={err3:.1e} relation={rel:.1e} ({took:.1f}s)",
    )


_MONO_CACHE: dict[str, oper.MonodromyRep] = {}


def wronskian_sl(scale: str) -> CriterionResult:
    dets = []
    drifts = []
    for key in ("2", "3"):
        mono = _MONO_CACHE.get(key) or oper.monodromy(_zero_ode(int(key)), octagon_group())
        dets.append(float(mono.det_errors().max()))
        drifts.append(mono.wronskian_drift)
    ok = max(dets) < 1e-8 and max(drifts) < 1e-8
    return _result(
        "3 wronskian/sl_n", ok, f"max |det-1|={max(dets):.1e} drift={max(drifts):.1e}"
    )


def irreducibility_nonunitarity(scale: str) -> CriterionResult:
    dims = []
    margins = []
    for key in ("2", "3"):
        mono = _MONO_CACHE.get(key) or oper.monodromy(_zero_ode(int(key)), octagon_group())
        rho = rep.Representation(mono.n, mono.images)
        dims.append(rep.commutant_dimension(rho))
        margins.append(rep.unitarity_margin(rho, 3))
    ok = all(d == 1 for d in dims) and all(m > 0.1 for m in margins)
    return _result(
        "5 irreducible/nonunitary",
        ok,
        f"commutant dims={dims} min margin={min(margins):.2f}",
    )


# -- 4 ------------------------------------------------------------------------

def wk_suite(scale: str) -> CriterionResult:
    rng = np.random.default_rng(104)
    q = jets.PowerJet(0.8 - 0.3j, -1.2j, -4)
    pts = [complex(rng.normal(scale=0.5), 0.7 + rng.random()) for _ in range(20)]
    exact_w2 = True
    worst_w34 = 0.0
    for n in (3, 4, 5, 6):
        ode = oper.ode_from_projective(n, q)
        c = ode.coefficients
        for z in pts:
            w2, w3, w4 = oper.wk_covariants(
                n, c[0], c[1] if n >= 3 else None, c[2] if n >= 4 else None, z
            )
            if w2 != complex(c[0].evaluate(z, 0)[0]):
                exact_w2 = False
            worst_w34 = max(worst_w34, abs(w3))
            if w4 is not None:
                worst_w34 = max(worst_w34, abs(w4))
    worst_cov = 0.0
    group = octagon_group()
    for n in (2, 3, 4, 5, 6):
        ode = oper.ode_from_projective(n, q)
        for change in (group.generators[0], Moebius.from_array([[1.1, -0.2], [0.3, 1.0]])):
            worst_cov = max(
                worst_cov,
                oper.wk_transformation_check(n, ode.coefficients, change, pts[:5]),
            )
    ok = exact_w2 and worst_w34 < 1e-10 and worst_cov < 1e-7
    return _result(
        "4 w_k suite",
        ok,
        f"w2 exact={exact_w2} max|w3,w4|={worst_w34:.1e} covariance defect={worst_cov:.1e}",
    )


# -- 6 ------------------------------------------------------------------------

def eichler_suite(scale: str) -> CriterionResult:
    t0 = time.time()
    group = octagon_group()
    n = 5
    radius = 5
    ode = _zero_ode(n)
    omega = forms.poincare_series(group, 3, jets.PowerJet(1.0, -2j, -6), radius)
    mono = oper.monodromy(ode, group)
    co = oper.eichler_cocycle(ode, omega, group, rep=mono, method="quadrature")
    pair_defect = 0.0
    pair_list = [(i, j) for i in range(1, 5) for j in range(1, 5)] if scale == "full" else [(1, 2), (3, 4)]
    for (i, j) in pair_list:
        direct = oper.eichler_direct_value(co, ode, omega, group, [i, j], method="quadrature")
        pair_defect = max(pair_defect, float(np.max(np.abs(direct - co.value([i, j])))))
    relw = [1, 2, -1, -2, 3, 4, -3, -4]
    rel_norm = float(
        np.max(np.abs(oper.eichler_direct_value(co, ode, omega, group, relw, method="quadrature")))
    )
    zero_co = oper.eichler_cocycle(ode, jets.ZeroJet(), group, rep=mono, method="rk")
    zero_norm = max(float(np.max(np.abs(v))) for v in zero_co.vectors.values())
    took = time.time() - t0
    ok = pair_defect < 1e-6 and rel_norm < 1e-5 and zero_norm == 0.0
    return _result(
        "6 eichler suite",
        ok,
        f"pair defect={pair_defect:.1e} relation={rel_norm:.1e} zero form={zero_norm:.1e} ({took:.0f}s)",
    )


# -- 7, 8 ----------------------------------------------------------------------

def hn_maximality(scale: str) -> CriterionResult:
    t0 = time.time()
    ok = True
    counts = {}
    for g in (2, 3):
        for n in range(2, 6):
            types = hn.enumerate_admissible_types(n, g)
            oper_type = hn.oper_hn_type(n, g)
            counts[(n, g)] = len(types)
            eq = 0
            for t in types:
                if not hn.dominance_leq(t, oper_type):
                    ok = False
                if t.expanded() == oper_type.expanded():
                    eq += 1
                elif hn.dominance_leq(oper_type, t):
                    ok = False
            if eq != 1:
                ok = False
    for n in range(1, 9):
        for g in range(2, 6):
            fd = hn.filtration_degrees(n, g)
            partial = np.cumsum([int(x) for x in hn.oper_hn_type(n, g).expanded()])
            if list(fd.degs) != [int(x) for x in partial]:
                ok = False
    took = time.time() - t0
    ok = ok and took < 60.0
    return _result(
        "7 hn maximality",
        ok,
        f"counts={sum(counts.values())} types over n<=5, g in 2..3; degrees ok ({took:.1f}s)",
    )


def dimension_bookkeeping(scale: str) -> CriterionResult:
    ok = True
    for n in range(2, 9):
        for g in range(2, 6):
            d = rep.moduli_dimensions(n, g)
            if d.betti != (n * n - 1) * (2 * g - 2):
                ok = False
            if d.hitchin_base != (n * n - 1) * (g - 1):
                ok = False
            if d.betti != 2 * d.hitchin_base:
                ok = False
            if sum(rep.clebsch_gordon_dims(n)) != n * n - 1:
                ok = False
            for q in range(2, n + 1):
                if d.eichler_h1(q) != 2 * (2 * q - 1) * (g - 1):
                    ok = False
    return _result("8 dimension bookkeeping", ok, "exact integers for n<=8, g<=5")


# -- 9 ------------------------------------------------------------------------

def harmonic_suite(scale: str) -> CriterionResult:
    t0 = time.time()
    group = octagon_group()
    mesh = harmonic.build_equivariant_mesh(group, 2 if scale == "full" else 1)
    rho = rep.Representation(2, [m.array().astype(complex) for m in group.generators])
    u, report = harmonic.harmonic_solve(mesh, rho, tol=1e-8, max_iters=5000)
    grad_ok = report.converged and report.grad_trace[-1] < 1e-8
    mono_ok = bool(np.all(np.diff(report.energy_trace) <= 1e-12))
    psi, psi_rep = harmonic.psi_field(mesh, rho, u)
    gap_ok = psi_rep["identity_gap"] < 1e-12
    # unitary datum: constant map, zero energy, zero sweeps
    rng = np.random.default_rng(109)
    mats = []
    for _ in range(4):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        qm, _ = np.linalg.qr(z)
        mats.append(qm / np.sqrt(np.linalg.det(qm)))
    rho_u = rep.Representation(2, mats)
    uu, ru = harmonic.harmonic_solve(mesh, rho_u, tol=1e-8, max_iters=10)
    unitary_ok = ru.iterations == 0 and ru.energy_trace[0] < 1e-12
    took = time.time() - t0
    ok = grad_ok and mono_ok and gap_ok and unitary_ok and took < 300.0
    return _result(
        "9a harmonic fuchsian/unitary",
        ok,
        f"grad={report.grad_trace[-1]:.1e} monotone={mono_ok} gap={psi_rep['identity_gap']:.1e} "
        f"unitary iters={ru.iterations} ({took:.0f}s)",
    )


def harmonic_divergence(scale: str) -> CriterionResult:
    """Criterion 9, final clause, implemented exactly as stated.

    The stated datum a1 -> diag(2, 1/2) is a direct sum of characters and
    admits a harmonic metric, so the solve converges and the flag stays
    down; see the decisions ledger.  The check remains as specified.
    """
    group = octagon_group()
    mesh = harmonic.build_equivariant_mesh(group, 2 if scale == "full" else 1)
    eye = np.eye(2, dtype=complex)
    rho = rep.Representation(2, [np.diag([2.0, 0.5]).astype(complex), eye, eye, eye])
    u, report = harmonic.harmonic_solve(mesh, rho, tol=1e-8, max_iters=2000)
    return _result(
        "9b harmonic divergence flag",
        report.diverged,
        f"diverged={report.diverged} converged={report.converged} "
        f"iters={report.iterations} (diag datum is semisimple; see ledger)",
    )


# -- 10 -----------------------------------------------------------------------

def gauge_suite(scale: str) -> CriterionResult:
    t0 = time.time()
    group = octagon_group()
    mesh = harmonic.build_equivariant_mesh(group, 1)
    rng = np.random.default_rng(110)
    n = 2
    conn = gauge.random_connection(mesh, n, rng, scale=0.15)
    higgs = gauge.random_higgs(mesh, n, rng, scale=0.3)
    steps = 500 if scale == "full" else 60
    vals = [gauge.ymh_value(mesh, conn, higgs)[0]]
    for _ in range(steps):
        conn, higgs, info = gauge.ymh_flow_step(mesh, conn, higgs, 0.01)
        vals.append(info["ymh"])
        if info["stalled"]:
            break
    monotone = bool(np.all(np.diff(vals) <= 1e-12))
    # gradient vs FD in 20 directions
    conn2 = gauge.random_connection(mesh, n, rng, scale=0.2)
    higgs2 = gauge.random_higgs(mesh, n, rng, scale=0.4)
    gx, gp = gauge.ymh_gradient(mesh, conn2, higgs2)
    worst_fd = 0.0
    ndir = 20 if scale == "full" else 6
    for _ in range(ndir):
        dx = []
        for __ in mesh.edges:
            h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            x = 0.5 * (h - np.conj(h.T))
            x -= np.trace(x) / n * np.eye(n)
            dx.append(x)
        dx = np.array(dx)
        dp = rng.normal(size=(mesh.n_vertices, n, n)) + 1j * rng.normal(size=(mesh.n_vertices, n, n))
        dp -= np.trace(dp, axis1=1, axis2=2)[:, None, None] / n * np.eye(n)
        fd = gauge.ymh_directional_derivative(mesh, conn2, higgs2, dx, dp)
        an = float(sum(np.real(np.trace(np.conj(a.T) @ b)) for a, b in zip(gx, dx)))
        an += float(sum(np.real(np.trace(np.conj(a.T) @ b)) for a, b in zip(gp, dp)))
        worst_fd = max(worst_fd, abs(fd - an) / max(abs(fd), 1e-12))
    # Hitchin conjugation invariance
    worst_h = 0.0
    for _ in range(10):
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m -= np.trace(m) / 3 * np.eye(3)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        worst_h = max(
            worst_h,
            float(np.max(np.abs(gauge.hitchin_map_point(m) - gauge.hitchin_map_point(g @ m @ np.linalg.inv(g))))),
        )
    # Simpson probe floors
    trials = 10_000 if scale == "full" else 2_000
    floors = [gauge.upper_triangular_commutator_floor(nn, trials, seed=5) for nn in (2, 3, 4)]
    # J = 0 iff f == mu
    a0 = gauge.identity_connection(mesh, n)
    h0 = gauge.DiscreteHiggs(np.zeros((mesh.n_vertices, n, n), dtype=complex))
    j0 = gauge.donaldson_j(mesh, a0, h0, mu=0.0)
    j1 = gauge.donaldson_j(mesh, conn2, higgs2, mu=0.0)
    took = time.time() - t0
    ok = (
        monotone
        and worst_fd < 1e-4
        and worst_h < 1e-10
        and min(floors) > 0.0
        and j0 < 1e-10
        and j1 > 1e-10
        and took < 180.0
    )
    return _result(
        "10 gauge suite",
        ok,
        f"monotone={monotone} fd={worst_fd:.1e} hitchin={worst_h:.1e} "
        f"floors={[f'{x:.2f}' for x in floors]} J0={j0:.1e} ({took:.0f}s)",
    )


# -- 11 -----------------------------------------------------------------------

def determinism(scale: str) -> CriterionResult:
    ok = True
    for command, params in (
        ("dims", {"n": 3, "g": 2}),
        ("hn-verify", {"n": 3, "g": 2}),
        ("gauge-flow", {"refinement": 0, "n": 2, "steps": 3, "seed": 7}),
    ):
        r1, _ = cli.run_command(command, dict(params))
        r2, _ = cli.run_command(command, dict(params))
        if cli.render_json(r1) != cli.render_json(r2):
            ok = False
    return _result("11 determinism", ok, "byte-identical reports on repeated runs")


CRITERIA = [
    schwarzian_suite,
    monodromy_oracle,
    wronskian_sl,
    wk_suite,
    irreducibility_nonunitarity,
    eichler_suite,
    hn_maximality,
    dimension_bookkeeping,
    harmonic_suite,
    harmonic_divergence,
    gauge_suite,
    determinism,
]


def run_suite(level: str = "smoke") -> list[CriterionResult]:
    if level not in ("smoke", "full"):
        raise ValueError("level must be smoke or full")
    out = []
    for crit in CRITERIA:
        try:
            out.append(crit(level))
        except Exception as exc:  # a crash is a failure, not an abort
            out.append(CriterionResult(crit.__name__, False, f"error: {exc}"))
    return out
