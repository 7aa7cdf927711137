"""Command-line entry point: ``unitary-dirac <subcommand> [flags]``.

Exit codes: 0 success, 1 domain error (or a failed reproduction check),
2 usage error. Every output starts with a ``#`` header line carrying the
version, alpha, units and tolerances in effect.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import fields as fl
from . import scattering as sc
from .algebra import (
    I4, METRIC, U_DIAG, anticommutator, common_commutator_check, discrete_operator, energy_operator_matrix,
    gamma, is_unitary, pair_spectrum, random_restricted_lorentz, rho, spinor_lorentz,
)
from .config import ConfigError, RunConfig, load_config_file
from .constants import ELECTRON_MASS_EV
from .errors import UnitaryDiracError
from .grid import GridField, centered
from .nls import conserved_quantities, evolve, from_samples, line_grid
from .radial import RadialProblem, closed_form_energy, solve_bound
from .reproduce import TARGETS
from .spectrum import CouplingConstants, level_order_report, to_ev


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# formatting


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def render_csv(header: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_value(v) for v in row])
    return buf.getvalue()


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    return obj


def render_json(header: str, obj: dict) -> str:
    return header + "\n" + json.dumps(_json_ready(obj), sort_keys=True) + "\n"


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _emit_record(result: dict, cfg: RunConfig, out, stdout, header: str | None = None) -> None:
    """A flat result dict: one JSON object, or one CSV row with sorted key columns."""
    head = header or cfg.header(__version__)
    if cfg.output == "json":
        text = render_json(head, result)
    else:
        keys = sorted(result)
        text = render_csv(head, keys, [[result[k] for k in keys]])
    _emit(text, out, stdout)


def _energy(value: float, cfg: RunConfig) -> float:
    return to_ev(value) if cfg.mass_unit == "eV" else value


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args, cfg: RunConfig, stdout) -> int:
    Z = float(args.z if args.z is not None else cfg.param("spectrum.z", 1))
    n = int(args.n if args.n is not None else cfg.param("spectrum.n", 2))
    rows = level_order_report(n, CouplingConstants(Z, cfg.alpha))
    cols = ["level", "Z", "n", "l", "j", "kappa", "e_modified", "e_conventional", "difference",
            "rank_modified", "rank_conventional"]
    data = []
    for r in rows:
        em = _energy(r.e_modified, cfg)
        ec = None if r.e_conventional is None else _energy(r.e_conventional, cfg)
        diff = None if ec is None else em - ec
        data.append([r.level.label, Z, r.level.n, r.level.l, str(r.level.j), r.level.kappa,
                     em, ec, diff, r.rank_modified, r.rank_conventional])
    head = cfg.header(__version__)
    if cfg.output == "json":
        text = render_json(head, {"Z": Z, "n": n, "levels": [dict(zip(cols, d)) for d in data]})
    else:
        text = render_csv(head, cols, data)
    _emit(text, args.out, stdout)
    return 0


def cmd_radial(args, cfg: RunConfig, stdout) -> int:
    p = RadialProblem(args.coupling, float(args.z), int(args.kappa), int(args.nr), cfg.alpha,
                      n_points=int(args.points))
    st = solve_bound(p, cfg.tolerances["bisect"], cfg.tolerances["radial_defect"])
    sign = 1 if st.energy > 0 else -1
    result = {
        "coupling": p.coupling, "Z": p.Z, "kappa": p.kappa, "n_r": p.n_r,
        "energy": _energy(st.energy, cfg), "closed_form": _energy(closed_form_energy(p, sign), cfg),
        "residual": st.residual, "nodes": st.node_count, "converged": st.converged,
    }
    _emit_record(result, cfg, args.out, stdout)
    if args.profile:
        Path(args.profile).write_text(render_csv(cfg.header(__version__), ["r", "G", "F"],
                                                 zip(st.r, st.G, st.F)))
    return 0


def _theta_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise UsageError(f"--theta-grid expects start:stop:count in degrees, got {spec!r}") from None


def cmd_scatter(args, cfg: RunConfig, stdout) -> int:
    m_ev = ELECTRON_MASS_EV
    E = float(args.energy) / m_ev
    M = math.inf if args.target_mass in (None, "inf") else float(args.target_mass) / m_ev
    theta_min = cfg.tolerances["theta_min"]
    rows = []
    for deg in _theta_grid(args.theta_grid):
        k = sc.ScatterKinematics(E, math.radians(deg), 1.0, M)
        if math.isinf(M):
            model = sc.dcs_coulomb(k, args.z, theta_min, cfg.alpha)
            conv = sc.mott_coulomb(k, args.z, cfg.alpha)
        else:
            model = sc.dcs_ep(k, args.mode, theta_min, cfg.alpha)
            conv = sc.mott_recoil(k, cfg.alpha)
        rows.append([float(deg), model, conv, model / conv])
    head = cfg.header(__version__) + (" cross_sections=1/m^2 conventional=Mott"
                                      f" normalization={sc.NORMALIZATION:g}")
    cols = ["theta_deg", "dcs_model", "dcs_conventional", "ratio"]
    if cfg.output == "json":
        text = render_json(head, {"energy_ev": args.energy, "target_mass": args.target_mass, "Z": args.z,
                                  "rows": [dict(zip(cols, r)) for r in rows]})
    else:
        text = render_csv(head, cols, rows)
    _emit(text, args.out, stdout)
    return 0


def cmd_nls(args, cfg: RunConfig, stdout) -> int:
    x, h, origin = line_grid(args.n, args.length)
    if args.init == "sech":
        psi0 = 1.0 / np.cosh(x)
    else:
        psi0 = (1.0 / math.pi) ** 0.25 * np.exp(-0.5 * x * x)
    state = from_samples(psi0, h, origin, g=args.g, mode=args.mode, dt=args.dt)
    n0, e0 = conserved_quantities(state)
    snaps = []
    every = args.snapshot_every if args.snapshot_every else args.t
    done = 0.0
    while done < args.t - 1e-12:
        step = min(every, args.t - done)
        state = evolve(state, step, cfg.tolerances["stability"])
        done += step
        snaps.append(state)
    n1, e1 = conserved_quantities(state)
    result = {"t": state.t, "norm_initial": n0, "norm_final": n1, "energy_initial": e0,
              "energy_final": e1, "mode": args.mode, "g": args.g, "n": args.n, "dt": args.dt}
    if args.init == "sech":
        result["shape_error"] = float(np.max(np.abs(np.abs(state.psi.values) - np.abs(psi0))))
    _emit_record(result, cfg, args.out, stdout)
    if args.snapshots:
        for i, s in enumerate(snaps):
            v = np.asarray(s.psi.values)
            rows = zip(s.x, v.real, v.imag, np.abs(v) ** 2)
            Path(f"{args.snapshots}_{i:04d}.csv").write_text(
                render_csv(cfg.header(__version__) + f" t={s.t:.9g}", ["x", "re", "im", "abs2"], rows))
    return 0


def _source(kind: str, n: int, h: float) -> GridField:
    o = centered(n, h)
    if kind == "point":
        v = np.zeros((n,) * 3)
        v[(n // 2,) * 3] = 1.0 / h**3
        return GridField(v, (h,) * 3, (o,) * 3)
    if kind == "ball":
        R = n * h / 6.0
        return GridField.from_function(
            lambda x, y, z: (x * x + y * y + z * z <= R * R) * (3.0 / (4 * math.pi * R**3)),
            (n,) * 3, (h,) * 3, (o,) * 3)
    return GridField.from_function(
        lambda x, y, z: np.exp(-(x * x + y * y + z * z) / 2.0) / (2 * math.pi) ** 1.5,
        (n,) * 3, (h,) * 3, (o,) * 3)


def cmd_fields(args, cfg: RunConfig, stdout) -> int:
    src = _source(args.source, args.n, args.h)
    phi = fl.greens_poisson(src)
    X, Y, Z = phi.mesh()
    r = np.sqrt(X * X + Y * Y + Z * Z)
    charge = float(np.sum(src.values) * src.cell_volume)
    mid = (r > 4 * args.h) & (r < args.n * args.h / 3)
    far_dev = float(np.max(np.abs(phi.values[mid] * 4 * math.pi * r[mid] / charge - 1.0))) if mid.any() else None
    result = {"source": args.source, "n": args.n, "h": args.h, "charge": charge,
              "phi_centre": float(phi.values[(args.n // 2,) * 3]), "midrange_coulomb_rel_dev": far_dev}
    if args.save:
        fl.write_field(args.save, phi, cfg.header(__version__))
        result["saved"] = str(Path(args.save).with_suffix(".bin").name)
    if args.slice:
        fl.write_slice_csv(args.slice, phi, axis=0, comment=cfg.header(__version__))
    _emit_record(result, cfg, args.out, stdout)
    return 0


def _density_field(N: int, length: float) -> GridField:
    h = length / N
    return GridField.from_function(lambda t, x: 1.0 + 0.1 * np.sin(x) + 0.05 * np.cos(t),
                                   (N, N), (h, h), (0.0, 0.0), dims="1+1")


def cmd_gauge(args, cfg: RunConfig, stdout) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    if len(sizes) < 2:
        raise UsageError("--sizes needs at least two grid sizes")
    result = {"sizes": sizes, "sets": []}
    for text in args.coeffs:
        c = fl.GaugeCoefficients.parse(text)
        res = [fl.gauge_constraint_residual(_density_field(N, 2 * math.pi), c, args.e) for N in sizes]
        orders = [math.log2(a / b) if a > 0 and b > 0 else None for a, b in zip(res, res[1:])]
        result["sets"].append({"coefficients": text, "residuals": res, "orders": orders})
    head = cfg.header(__version__)
    if cfg.output == "json":
        text = render_json(head, result)
    else:
        rows = [[st["coefficients"], N, r, None if i == 0 else st["orders"][i - 1]]
                for st in result["sets"] for i, (N, r) in enumerate(zip(sizes, st["residuals"]))]
        text = render_csv(head, ["coefficients", "n", "residual", "order"], rows)
    _emit(text, args.out, stdout)
    return 0


def algebra_report(seed: int = 0) -> dict:
    g = [gamma(mu) for mu in range(4)]
    anti = max(float(np.max(np.abs(anticommutator(g[a], g[b]) - 2 * METRIC[a, b] * I4)))
               for a in range(4) for b in range(4))
    rho_anti = max(float(np.max(np.abs(anticommutator(rho(i), rho(j)) - 2 * (i == j) * I4)))
                   for i in range(1, 4) for j in range(1, 4))
    u_rel = float(np.max(np.abs(U_DIAG @ rho(2) @ np.linalg.inv(U_DIAG) + rho(3))))
    O = discrete_operator("particle_conj_matrix")
    rng = np.random.default_rng(seed)
    cov = 0.0
    for _ in range(100):
        a = random_restricted_lorentz(rng)
        S = spinor_lorentz(a)
        Si = np.linalg.inv(S)
        for mu in range(4):
            lhs = S @ g[mu] @ Si
            rhs = sum(a[mu, nu] * g[nu] for nu in range(4))
            cov = max(cov, float(np.max(np.abs(lhs - rhs))))
    pair = 0.0
    for _ in range(1000):
        H = energy_operator_matrix(rng.normal(size=3), rng.normal(), rng.normal(size=3),
                                   rng.normal(), abs(rng.normal()) + 0.1)
        pair = max(pair, pair_spectrum(np.linalg.eigvals(H)))
    return {
        "gamma_anticommutator_max_error": anti,
        "rho_anticommutator_max_error": rho_anti,
        "u_rho2_relation_error": u_rel,
        "operators_unitary": all(is_unitary(discrete_operator(k), 1e-14) for k in ("space_inv", "time_inv_spinor", "particle_conj_matrix")),
        "particle_conjugation_squared_error": float(np.max(np.abs(O @ O.conj() + I4))),
        "lorentz_covariance_max_error": cov,
        "commutator_value": complex(common_commutator_check(np.array([0.0, 0.3, -0.2, 0.5]))).imag,
        "pair_spectrum_max_error": pair,
    }


def cmd_algebra(args, cfg: RunConfig, stdout) -> int:
    _emit_record(algebra_report(args.seed), cfg, args.out, stdout)
    return 0


def cmd_reproduce(args, cfg: RunConfig, stdout) -> int:
    target = TARGETS[args.target]
    kwargs = {"alpha": cfg.alpha} if args.target in ("percent-table", "ordering") else {}
    checks = target(**kwargs)
    lines = [cfg.header(__version__) + f" target={args.target}"] + [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"{'PASS' if ok else 'FAIL'} {args.target}")
    _emit("\n".join(lines) + "\n", args.out, stdout)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key = value config file (default: $UNITARY_DIRAC_CONFIG)")
    common.add_argument("--alpha", type=float)
    common.add_argument("--mass-unit", choices=["electron_mass", "eV"])
    common.add_argument("--output", choices=["csv", "json"])
    common.add_argument("--theta-min", type=float, help="forward-angle cut in radians")
    common.add_argument("--out", help="write to this path instead of stdout")
    p = _Parser(prog="unitary-dirac", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("spectrum", help="closed-form levels of both theories for one n")
    s.add_argument("--z", type=float)
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("radial", help="shooting solution of the radial equations")
    s.add_argument("--coupling", choices=["scalar", "vector"], default="scalar")
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--kappa", type=int, default=-1)
    s.add_argument("--nr", type=int, default=0)
    s.add_argument("--points", type=int, default=2500)
    s.add_argument("--profile", help="CSV path for (r, G, F)")
    s.set_defaults(func=cmd_radial)

    s = sub.add_parser("scatter", help="angle sweep of differential cross sections")
    s.add_argument("--energy", type=float, required=True, help="incident electron energy in eV")
    s.add_argument("--target-mass", default="inf", help="target mass in eV, or 'inf' for a fixed centre")
    s.add_argument("--z", type=float, default=1.0)
    s.add_argument("--theta-grid", default="10:170:17", help="start:stop:count in degrees")
    s.add_argument("--mode", choices=["highE_sigma1", "exact_sigma1"], default="highE_sigma1")
    s.set_defaults(func=cmd_scatter)

    s = sub.add_parser("nls", help="split-step evolution of the 1D nonlinear Schroedinger equation")
    s.add_argument("--n", type=int, default=1024)
    s.add_argument("--length", type=float, default=50.0)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--g", type=float, default=-1.0)
    s.add_argument("--mode", choices=["cubic", "choquard"], default="cubic")
    s.add_argument("--init", choices=["sech", "gaussian"], default="sech")
    s.add_argument("--snapshot-every", type=float)
    s.add_argument("--snapshots", help="path prefix for snapshot CSV files")
    s.set_defaults(func=cmd_nls)

    s = sub.add_parser("fields", help="Poisson potential of a model source")
    s.add_argument("--source", choices=["point", "ball", "gaussian"], default="point")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--h", type=float, default=0.25)
    s.add_argument("--save", help="path stem for .hdr/.bin output")
    s.add_argument("--slice", help="CSV path for a 1D slice through the centre")
    s.set_defaults(func=cmd_fields)

    s = sub.add_parser("gauge-check", help="refinement study of the gauge constraint")
    s.add_argument("--coeffs", action="append", default=None,
                   help="odd-power coefficients such as 1:2,-1:0.5 (repeatable)")
    s.add_argument("--sizes", default="32,64,128")
    s.add_argument("--e", type=float, default=1.0)
    s.set_defaults(func=cmd_gauge)

    s = sub.add_parser("algebra-check", help="gamma-matrix identity report")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_algebra)

    s = sub.add_parser("reproduce", help="recompute one headline result with PASS/FAIL")
    s.add_argument("target", choices=sorted(TARGETS))
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gauge-check" and not args.coeffs:
            args.coeffs = ["1:1", "1:2,-1:0.5,3:-1", "-1:1,5:0.3"]
        for name in ("config", "alpha", "mass_unit", "output", "theta_min", "out"):
            if not hasattr(args, name):
                setattr(args, name, None)
        file_values = load_config_file(args.config)
        flags = {"alpha": args.alpha, "mass_unit": args.mass_unit, "output": args.output,
                 "tol.theta_min": args.theta_min}
        cfg = RunConfig.resolve(file_values, flags)
        return args.func(args, cfg, stdout)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2
    except UnitaryDiracError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
