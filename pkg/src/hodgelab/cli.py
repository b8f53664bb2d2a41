"""Command-line driver: deterministic runs, JSON reports, CSV traces.

Reports are emitted with sorted keys, 17-significant-digit floats, and a
trailing newline, so identical configurations produce byte-identical files.
All randomness flows from the single --seed value.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, forms, gauge, harmonic, hn, jets, oper, rep
from .hyp import octagon_group

__all__ = ["main", "parse_and_dispatch", "emit_report", "render_json", "run_command"]


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x in (float("inf"), float("-inf")):
        return f'"{x}"'
    if x == int(x) and abs(x) < 1e16:
        return format(x, ".1f")
    return format(x, ".17g")


def render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj):
            items.append(f'{pad}  "{k}": {render_json(obj[k], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"unserializable value {obj!r}")


def emit_report(result: dict, path: str | None) -> str:
    text = render_json(result) + "\n"
    if path is not None:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise RuntimeError(f"cannot write report to {path}: {exc}") from exc
    return text


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for x in row:
                if isinstance(x, (float, np.floating)):
                    cells.append(format(float(x), ".17g"))
                else:
                    cells.append(str(x))
            fh.write(",".join(cells) + "\n")


def _c2pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _matrix_pairs(m: np.ndarray) -> list:
    return [[_c2pair(x)[0], _c2pair(x)[1]] for x in np.asarray(m, dtype=complex).reshape(-1)]


def _parse_point(text: str) -> complex:
    re_s, im_s = text.split(",")
    return complex(float(re_s), float(im_s))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_dims(p):
    d = rep.moduli_dimensions(p["n"], p["g"])
    return {
        "betti": d.betti,
        "hitchin_base": d.hitchin_base,
        "clebsch_gordon": rep.clebsch_gordon_dims(p["n"]),
        "eichler_h1": {str(q): d.eichler_h1(q) for q in range(2, p["n"] + 1)},
    }, None


def _cmd_hn_verify(p):
    n, g = p["n"], p["g"]
    types = hn.enumerate_admissible_types(n, g)
    oper_type = hn.oper_hn_type(n, g)
    strict = True
    for t in types:
        if not hn.dominance_leq(t, oper_type):
            strict = False
        if t.expanded() == oper_type.expanded():
            continue
        if hn.dominance_leq(oper_type, t):
            strict = False
    rows = [[str(s) for s in t.expanded()] for t in types]
    csv = (["mu_" + str(i + 1) for i in range(n)], rows)
    return {
        "types": len(types),
        "maximal": strict,
        "oper_type": [str(x) for x in oper_type.expanded()],
    }, csv


def _fuchsian_rep(n: int) -> rep.Representation:
    group = octagon_group()
    mats = [g.array().astype(complex) for g in group.generators]
    if n == 2:
        return rep.Representation(2, mats)
    return rep.Representation(n, [rep.principal_embedding(n, m) for m in mats])


def _cmd_rep_analyze(p):
    rho = _fuchsian_rep(p["n"])
    return {
        "n": p["n"],
        "relation_residual": rep.relation_residual_rep(rho, signed=True),
        "commutant_dimension": rep.commutant_dimension(rho),
        "unitarity_margin": rep.unitarity_margin(rho, p["radius"]),
    }, None


def _cmd_forms_build(p):
    group = octagon_group()
    form = forms.form_from_descriptor(
        group,
        {
            "k": p["k"],
            "radius": p["radius"],
            "seed": {"type": "rational", "poles": [[p["pole_re"], p["pole_im"]]], "power": p["power"]},
        },
    )
    residual = forms.automorphy_residual(form, forms.default_samples(group))
    grid = [1j, 0.25 + 1.0j, -0.4 + 0.8j, 0.1 + 1.6j]
    rows = []
    for z in grid:
        st = form.evaluate(z, p["order"])
        for k, v in enumerate(st):
            rows.append([z.real, z.imag, k, v.real, v.imag])
    csv = (["z_re", "z_im", "order", "value_re", "value_im"], rows)
    return {
        "k": p["k"],
        "radius": p["radius"],
        "elements": int(len(form._mats)),
        "automorphy_residual": residual,
        "theta_at_i": _c2pair(form.evaluate(1j, 0)[0]),
    }, csv


def _build_cli_ode(n: int, q_kind: str, radius: int):
    if q_kind == "zero":
        return oper.OperODE(n, [jets.ZeroJet() for _ in range(n - 1)])
    if q_kind == "poincare":
        group = octagon_group()
        q = forms.poincare_series(group, 2, forms.default_seed(2), radius)
        return oper.ode_from_projective(n, q)
    raise ValueError(f"unknown Q kind {q_kind!r} (use zero or poincare)")


def _cmd_oper_monodromy(p):
    group = octagon_group()
    ode = _build_cli_ode(p["n"], p["Q"], p["radius"])
    mono = oper.monodromy(ode, group, z0=p["z0"], rtol=p["tol"])
    return {
        "n": p["n"],
        "z0": _c2pair(mono.z0),
        "tol": p["tol"],
        "generators": [
            {"word": w, "matrix": _matrix_pairs(m)}
            for w, m in zip(mono.words, mono.images)
        ],
        "relation_residual": mono.relation_residual,
        "wronskian_drift": mono.wronskian_drift,
        "det_errors": [float(x) for x in mono.det_errors()],
    }, None


def _cmd_oper_eichler(p):
    group = octagon_group()
    n = p["n"]
    if n % 2 == 0:
        raise ValueError("eichler runs need odd n = 2q - 1")
    q = (n + 1) // 2
    ode = _build_cli_ode(n, "zero", 0)
    omega = forms.poincare_series(group, q, jets.PowerJet(1.0, -2j, -2 * q), p["radius"])
    mono = oper.monodromy(ode, group, rtol=p["tol"])
    co = oper.eichler_cocycle(ode, omega, group, rep=mono, rtol=p["tol"])
    pair_defect = 0.0
    for (i, j) in ((1, 2), (2, 3), (3, 4)):
        direct = oper.eichler_direct_value(co, ode, omega, group, [i, j])
        pair_defect = max(pair_defect, float(np.max(np.abs(direct - co.value([i, j])))))
    relw = [1, 2, -1, -2, 3, 4, -3, -4]
    vrel = oper.eichler_direct_value(co, ode, omega, group, relw)
    return {
        "n": n,
        "q": q,
        "radius": p["radius"],
        "vectors": {f"g{i}": _matrix_pairs(co.vectors[i]) for i in range(1, 5)},
        "pair_defect": pair_defect,
        "relation_norm": float(np.max(np.abs(vrel))),
    }, None


def _cmd_oper_wk(p):
    n = p["n"]
    q = jets.PowerJet(0.6 - 0.2j, -1.4j, -4)
    ode = oper.ode_from_projective(n, q)
    samples = [0.2 + 1.0j, -0.3 + 0.8j, 0.1 + 1.4j, 1j]
    c = ode.coefficients
    vals = []
    for z in samples:
        w2, w3, w4 = oper.wk_covariants(
            n, c[0], c[1] if n >= 3 else None, c[2] if n >= 4 else None, z
        )
        vals.append(
            {
                "z": _c2pair(z),
                "w2": _c2pair(w2),
                "w3": None if w3 is None else _c2pair(w3),
                "w4": None if w4 is None else _c2pair(w4),
            }
        )
    change = octagon_group().generators[0]
    defect = oper.wk_transformation_check(n, c, change, samples)
    return {"n": n, "samples": vals, "covariance_defect": defect}, None


def _cmd_harmonic_solve(p):
    group = octagon_group()
    mesh = harmonic.build_equivariant_mesh(group, p["refinement"])
    n = p["n"]
    kind = p["rep"]
    if kind == "fuchsian":
        rho = _fuchsian_rep(n)
    elif kind == "unitary":
        rng = np.random.default_rng(p["seed"])
        mats = []
        for _ in range(4):
            z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            qm, _ = np.linalg.qr(z)
            mats.append(qm / np.linalg.det(qm) ** (1.0 / n))
        rho = rep.Representation(n, mats)
    elif kind == "diagonal":
        eye = np.eye(2, dtype=complex)
        rho = rep.Representation(2, [np.diag([2.0, 0.5]).astype(complex), eye, eye, eye])
    elif kind == "unipotent":
        eye = np.eye(2, dtype=complex)
        rho = rep.Representation(2, [np.array([[1, 1], [0, 1]], dtype=complex), eye, eye, eye])
    else:
        raise ValueError(f"unknown rep kind {kind!r}")
    u, report = harmonic.harmonic_solve(mesh, rho, tol=p["tol"], max_iters=p["max_iters"])
    psi, psi_rep = harmonic.psi_field(mesh, rho, u)
    out = report.to_dict()
    out.update(
        {
            "rep": kind,
            "n": n,
            "refinement": p["refinement"],
            "psi_identity_gap": psi_rep["identity_gap"],
            "mesh": {
                "vertices": mesh.n_vertices,
                "edges": len(mesh.edges),
                "faces": len(mesh.faces),
                "euler_characteristic": mesh.euler_characteristic(),
            },
        }
    )
    csv = (["sweep", "energy"], [[k, e] for k, e in enumerate(report.energy_trace)])
    return out, csv


def _cmd_gauge_flow(p):
    group = octagon_group()
    mesh = harmonic.build_equivariant_mesh(group, p["refinement"])
    rng = np.random.default_rng(p["seed"])
    n = p["n"]
    conn = gauge.random_connection(mesh, n, rng, scale=0.15)
    higgs = gauge.random_higgs(mesh, n, rng, scale=0.3)
    rows = []
    val, _ = gauge.ymh_value(mesh, conn, higgs)
    stalled = False
    dt = p["dt"]
    for step in range(p["steps"]):
        conn, higgs, info = gauge.ymh_flow_step(mesh, conn, higgs, dt)
        psi = _psi_of_higgs(mesh, higgs)
        mr = gauge.moment_residuals(mesh, conn, psi)
        rows.append(
            [step, info["ymh"], gauge.donaldson_j(mesh, conn, higgs), mr.mu1_norm, mr.mu2_norm, mr.mu3_norm, info["dt"]]
        )
        if info["stalled"]:
            stalled = True
            break
    csv = (["step", "ymh", "j", "mu1_norm", "mu2_norm", "mu3_norm", "dt"], rows)
    return {
        "steps": len(rows),
        "ymh_initial": val,
        "ymh_final": rows[-1][1] if rows else val,
        "monotone": bool(all(a[1] >= b[1] - 1e-12 for a, b in zip(rows, rows[1:]))),
        "stalled": stalled,
    }, csv


def _psi_of_higgs(mesh, higgs):
    out = []
    for e in mesh.edges:
        dz = e.z_dst - e.z_src
        p = higgs.values[e.src]
        out.append(p * dz + np.conj(p.T) * np.conj(dz))
    return np.array(out)


_COMMANDS = {
    "dims": (_cmd_dims, {"n": (int, 2), "g": (int, 2)}),
    "hn-verify": (_cmd_hn_verify, {"n": (int, 2), "g": (int, 2)}),
    "rep-analyze": (_cmd_rep_analyze, {"n": (int, 2), "radius": (int, 3)}),
    "forms-build": (
        _cmd_forms_build,
        {
            "k": (int, 2),
            "radius": (int, 4),
            "pole_re": (float, 0.0),
            "pole_im": (float, -1.0),
            "power": (int, -4),
            "order": (int, 2),
        },
    ),
    "oper-monodromy": (
        _cmd_oper_monodromy,
        {"n": (int, 2), "Q": (str, "zero"), "z0": (complex, 1j), "tol": (float, 1e-10), "radius": (int, 4)},
    ),
    "oper-eichler": (_cmd_oper_eichler, {"n": (int, 5), "radius": (int, 4), "tol": (float, 1e-10)}),
    "oper-wk": (_cmd_oper_wk, {"n": (int, 4)}),
    "harmonic-solve": (
        _cmd_harmonic_solve,
        {
            "rep": (str, "fuchsian"),
            "n": (int, 2),
            "refinement": (int, 1),
            "tol": (float, 1e-8),
            "max_iters": (int, 5000),
            "seed": (int, 0),
        },
    ),
    "gauge-flow": (
        _cmd_gauge_flow,
        {"refinement": (int, 1), "n": (int, 2), "steps": (int, 100), "seed": (int, 7), "dt": (float, 0.01)},
    ),
}


def run_command(command: str, params: dict) -> tuple[dict, tuple | None]:
    """Run a command with fully-resolved parameters; returns (report, csv)."""
    runner, spec = _COMMANDS[command]
    unknown = set(params) - set(spec)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {command}: {sorted(unknown)}")
    full = {k: (params[k] if k in params else d) for k, (t, d) in spec.items()}
    result, csv = runner(full)
    echo = {
        k: (_c2pair(v) if isinstance(v, complex) else v) for k, v in sorted(full.items())
    }
    result = dict(result)
    result["config"] = {"command": command, **echo}
    result["version"] = __version__
    return result, csv


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hodge-lab", description=__doc__)
    sub = ap.add_subparsers(dest="group_cmd")

    def common(sp):
        sp.add_argument("--config", help="JSON file of parameters (flags override)")
        sp.add_argument("--out", help="path of the JSON report")
        sp.add_argument("--csv", help="path of the CSV trace")
        sp.add_argument("--threads", type=int, default=1, help="thread cap (results are identical)")

    def leaf(parent, name, command):
        sp = parent.add_parser(name)
        sp.set_defaults(command=command)
        common(sp)
        _, spec = _COMMANDS[command]
        for key, (typ, default) in spec.items():
            flag = "--" + key.replace("_", "-")
            if typ is complex:
                sp.add_argument(flag, type=_parse_point, default=None, metavar="RE,IM")
            else:
                sp.add_argument(flag, type=typ, default=None)
        return sp

    leaf(sub, "dims", "dims")
    oper_g = sub.add_parser("oper").add_subparsers(dest="sub")
    leaf(oper_g, "monodromy", "oper-monodromy")
    leaf(oper_g, "eichler", "oper-eichler")
    leaf(oper_g, "wk", "oper-wk")
    hn_g = sub.add_parser("hn").add_subparsers(dest="sub")
    leaf(hn_g, "verify", "hn-verify")
    rep_g = sub.add_parser("rep").add_subparsers(dest="sub")
    leaf(rep_g, "analyze", "rep-analyze")
    harm_g = sub.add_parser("harmonic").add_subparsers(dest="sub")
    leaf(harm_g, "solve", "harmonic-solve")
    gauge_g = sub.add_parser("gauge").add_subparsers(dest="sub")
    leaf(gauge_g, "flow", "gauge-flow")
    forms_g = sub.add_parser("forms").add_subparsers(dest="sub")
    leaf(forms_g, "build", "forms-build")
    suite_p = sub.add_parser("suite")
    suite_p.set_defaults(command="suite")
    suite_p.add_argument("--level", choices=["smoke", "full"], default="smoke")
    suite_p.add_argument("--out", default=None)
    suite_p.add_argument("--threads", type=int, default=1)
    return ap


def parse_and_dispatch(argv) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    command = getattr(args, "command", None)
    if command is None:
        ap.print_usage(sys.stderr)
        return 2
    if command == "suite":
        from .acceptance import run_suite

        results = run_suite(args.level)
        width = max(len(r.name) for r in results)
        failed = []
        for r in results:
            mark = "PASS" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {mark}  {r.detail}")
            if not r.passed:
                failed.append(r.name)
        if failed:
            print("failed criteria: " + ", ".join(failed))
            return 1
        return 0
    try:
        _, spec = _COMMANDS[command]
        params = {}
        if args.config:
            with open(args.config) as fh:
                loaded = json.load(fh)
            loaded.pop("command", None)
            for k, v in loaded.items():
                if k not in spec:
                    raise ValueError(f"unknown config key {k!r} for {command}")
                params[k] = complex(v[0], v[1]) if spec[k][0] is complex and isinstance(v, list) else spec[k][0](v)
        for key in spec:
            val = getattr(args, key, None)
            if val is not None:
                params[key] = val
        result, csv = run_command(command, params)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failures
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    try:
        text = emit_report(result, args.out)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if not args.out:
        sys.stdout.write(text)
    if csv is not None and args.csv:
        _write_csv(args.csv, csv[0], csv[1])
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))
