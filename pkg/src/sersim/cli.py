"""Batch command-line interface.

Subcommands: solve, sweep, isat, check, alpha, montecarlo, power.
Exit codes: 0 success, 2 validation/parse error, 3 solver failure.
All errors go to stderr with a machine-parsable ``error_code=`` prefix.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import design, power, solver
from .devicefile import ParsedDevice, parse_device, write_sweep_csv
from .errors import (
    DeviceFileError,
    GeometryError,
    KneeNotFoundError,
    MaterialError,
    SersError,
    SolverError,
    ValidationError,
)
from .materials import DEFAULT_SAT_EPS


def _load(path: str) -> ParsedDevice:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ValidationError(f"cannot read device file {path}: {exc}") from exc
    return parse_device(text)


def _emit(out, key: str, value) -> None:
    if isinstance(value, float):
        out.write(f"{key} = {value:.11e}\n")
    else:
        out.write(f"{key} = {value}\n")


def _with_material(parsed: ParsedDevice, name: str | None) -> ParsedDevice:
    if name is None:
        return parsed
    if name not in parsed.materials:
        raise ValidationError(
            f"material '{name}' not defined in device file "
            f"(available: {', '.join(sorted(parsed.materials))})")
    model = parsed.materials[name]
    shunts = tuple(dataclasses.replace(sh, material=model) for sh in parsed.device.shunts)
    device = dataclasses.replace(parsed.device, shunts=shunts)
    return ParsedDevice(device=device, materials=parsed.materials, primary_core=parsed.primary_core)


def _cmd_solve(args, out) -> int:
    parsed = _with_material(_load(args.device), args.material)
    point = solver.solve_operating_point(parsed.device, args.current)
    _emit(out, "I_A", point.current_A)
    _emit(out, "F_g_A", point.f_g_A)
    _emit(out, "B_g_T", point.b_g_T)
    _emit(out, "phi_g_Wb", point.flux_gap_Wb)
    _emit(out, "phi_m_Wb", point.flux_magnet_Wb)
    _emit(out, "phi_leak_Wb", point.flux_leak_Wb)
    for k, state in enumerate(point.shunts, start=1):
        _emit(out, f"H_s{k}_A_per_m", state.h_A_per_m)
        _emit(out, f"B_s{k}_T", state.b_T)
        _emit(out, f"phi_s{k}_Wb", state.flux_Wb)
    _emit(out, "residual_Wb", point.residual_Wb)
    _emit(out, "iterations", point.iterations)
    return 0


def _cmd_sweep(args, out) -> int:
    parsed = _with_material(_load(args.device), args.material)
    sw = solver.sweep(parsed.device, args.start, args.stop, args.steps)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write_sweep_csv(sw, handle)
        out.write(f"wrote {len(sw.grid)} rows to {args.out}\n")
    else:
        write_sweep_csv(sw, out)
    return 0


def _cmd_isat(args, out) -> int:
    parsed = _with_material(_load(args.device), args.material)
    device = parsed.device
    materials = {sh.material for sh in device.shunts}
    if len(materials) > 1:
        raise ValidationError("shunts use different materials; pick one with --material")
    h_sat = materials.pop().h_sat(args.eps)
    f_sat = design.fg_sat(device)
    b_g_sat = design.on_state_flux(device) / device.gap.area_m2
    _emit(out, "H_sat_A_per_m", h_sat)
    _emit(out, "F_g_sat_A", f_sat)
    _emit(out, "I_sat_A", design.predict_isat(device, h_sat))
    _emit(out, "I_sat_approx_A", design.approx_isat(device, b_g_sat))
    return 0


def _cmd_check(args, out) -> int:
    parsed = _load(args.device)
    report = design.check_conditions(
        parsed.device,
        primary_area_m2=args.primary_area,
        primary_b_sat_T=args.primary_b_sat,
    )
    for cond in report:
        line = f"{cond.name}: {cond.status.upper()}"
        if cond.lhs is not None:
            line += f" lhs={cond.lhs:.6e} rhs={cond.rhs:.6e} margin={cond.margin:.6e}"
        if cond.detail:
            line += f" ({cond.detail})"
        out.write(line + "\n")
    out.write(f"all_passed = {report.all_passed}\n")
    return 0


def _parse_perturb(spec: str) -> tuple[int, str, float]:
    try:
        fields = dict(part.split("=", 1) for part in spec.split(",") if part)
        shunt = int(fields.pop("shunt"))
        field_name = fields.pop("field")
        rel = float(fields.pop("rel"))
    except (KeyError, ValueError) as exc:
        raise ValidationError(
            f"--perturb must look like shunt=2,field=area_sol,rel=0.1 (got '{spec}')") from exc
    if fields:
        raise ValidationError(f"--perturb: unknown entries {sorted(fields)}")
    if field_name not in ("area_sol", "length_s", "area_s"):
        raise ValidationError(f"--perturb field must be area_sol, length_s or area_s, got '{field_name}'")
    return shunt, field_name, rel


def _apply_perturb(parsed: ParsedDevice, spec: str) -> ParsedDevice:
    shunt_idx, field_name, rel = _parse_perturb(spec)
    device = parsed.device
    if not 1 <= shunt_idx <= len(device.shunts):
        raise ValidationError(f"--perturb: device has no shunt {shunt_idx}")
    sh = device.shunts[shunt_idx - 1]
    factor = 1.0 + rel
    if field_name == "area_sol":
        sh = dataclasses.replace(sh, solenoid_area_m2=sh.solenoid_area * factor)
    elif field_name == "length_s":
        sh = dataclasses.replace(sh, length_m=sh.length_m * factor)
    else:
        sh = dataclasses.replace(sh, area_m2=sh.area_m2 * factor)
    shunts = list(device.shunts)
    shunts[shunt_idx - 1] = sh
    device = dataclasses.replace(device, shunts=tuple(shunts))
    return ParsedDevice(device=device, materials=parsed.materials, primary_core=parsed.primary_core)


def _print_tolerance_report(report: design.ToleranceReport, out) -> None:
    _emit(out, "kappa_off_T_per_A", report.kappa_off_T_per_A)
    _emit(out, "kappa_on_T_per_A", report.kappa_on_T_per_A)
    _emit(out, "alpha", report.alpha)
    _emit(out, "alpha_numeric", report.alpha_numeric)
    _emit(out, "R_t_per_H", report.r_t_per_H)
    if report.output_offset_Wb is not None:
        _emit(out, "output_offset_Wb", report.output_offset_Wb)


def _cmd_alpha(args, out) -> int:
    parsed = _load(args.device)
    if args.perturb:
        parsed = _apply_perturb(parsed, args.perturb)
    report = design.alpha_mismatch(parsed.device)
    _print_tolerance_report(report, out)
    if parsed.primary_core is not None:
        _emit(out, "alpha_core_limit", design.alpha_core(parsed.device, parsed.primary_core))
    return 0


def _parse_tol(spec: str, kind: str) -> design.ToleranceSpec:
    values = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"--tol entries must look like area_sol=0.1, got '{part}'")
        key, _, raw = part.partition("=")
        key = key.strip()
        if key not in ("area_sol", "length_s", "area_s"):
            raise ValidationError(f"--tol field must be area_sol, length_s or area_s, got '{key}'")
        try:
            values[key] = float(raw)
        except ValueError:
            raise ValidationError(f"--tol {key}: cannot parse '{raw}' as a number") from None
    return design.ToleranceSpec(kind=kind, **values)


def _cmd_montecarlo(args, out) -> int:
    parsed = _load(args.device)
    tol = _parse_tol(args.tol, args.tol_kind)
    report = design.alpha_mismatch(parsed.device)
    summary = design.monte_carlo_alpha(parsed.device, tol, args.samples, args.seed, keep_samples=False)
    _print_tolerance_report(report, out)
    _emit(out, "mc_samples", summary.samples)
    _emit(out, "mc_seed", summary.seed)
    _emit(out, "mc_alpha_mean", summary.mean)
    _emit(out, "mc_alpha_p50", summary.p50)
    _emit(out, "mc_alpha_p95", summary.p95)
    _emit(out, "mc_alpha_max", summary.max)
    return 0


def _cmd_power(args, out) -> int:
    parsed = _load(args.device)
    device = parsed.device
    if args.wire:
        try:
            a, b, c = (float(v) for v in args.wire.split(","))
        except ValueError:
            raise ValidationError(f"--wire must be a,b,c in metres, got '{args.wire}'") from None
        wire = power.WireSpec(a_m=a, b_m=b, c_m=c)
    else:
        wire = power.single_layer_wire(device.shunts[0])
    count = args.count if args.count is not None else len(device.shunts)
    _emit(out, "wire_length_m", power.wire_length(device.shunts[0], wire))
    _emit(out, "solenoid_resistance_Ohm", power.solenoid_resistance(device.shunts[0], wire))
    p_sers = power.joule_power(device, wire, args.current, count)
    _emit(out, "joule_power_W", p_sers)
    if args.compare_ccw:
        try:
            kappa, resistance, gradient = (float(v) for v in args.compare_ccw.split(","))
        except ValueError:
            raise ValidationError(
                f"--compare-ccw must be kappa,resistance,gradient, got '{args.compare_ccw}'") from None
        ref = power.CcwReference(kappa_grad_T_per_m_per_A=kappa, resistance_Ohm=resistance)
        ccw_current, ccw_power = power.ccw_equivalent(ref, gradient)
        _emit(out, "ccw_current_A", ccw_current)
        _emit(out, "ccw_power_W", ccw_power)
        _emit(out, "power_ratio", p_sers / ccw_power)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sersim",
        description="Nonlinear magnetic-circuit analysis of saturable reluctance switch devices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--device", required=True, help="device description file")
        return p

    p = add("solve", _cmd_solve, "solve one operating point")
    p.add_argument("--current", type=float, required=True, help="drive current [A]")
    p.add_argument("--material", help="override every shunt's material by registry name")

    p = add("sweep", _cmd_sweep, "sweep a current range and emit CSV")
    p.add_argument("--from", dest="start", type=float, required=True, help="start current [A]")
    p.add_argument("--to", dest="stop", type=float, required=True, help="end current [A]")
    p.add_argument("--steps", type=int, default=400, help="grid points (default 400)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--material", help="override every shunt's material by registry name")

    p = add("isat", _cmd_isat, "predict the switching current")
    p.add_argument("--material", help="override every shunt's material by registry name")
    p.add_argument("--eps", type=float, default=DEFAULT_SAT_EPS,
                   help="relative saturation threshold above mu0 (default 1e-3)")

    p = add("check", _cmd_check, "evaluate the design conditions")
    p.add_argument("--primary-area", type=float, help="primary-core cross-section [m^2]")
    p.add_argument("--primary-b-sat", type=float, help="primary-core saturation flux density [T]")

    p = add("alpha", _cmd_alpha, "switching-ratio report")
    p.add_argument("--perturb", help="e.g. shunt=2,field=area_sol,rel=0.1")

    p = add("montecarlo", _cmd_montecarlo, "Monte-Carlo fabrication-tolerance analysis")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", required=True, help="e.g. area_sol=0.1,length_s=0.01")
    p.add_argument("--tol-kind", choices=("uniform", "normal"), default="uniform")

    p = add("power", _cmd_power, "winding Joule losses and CCW comparison")
    p.add_argument("--current", type=float, required=True, help="drive current [A]")
    p.add_argument("--wire", help="conductor a,b and insulation c in metres, e.g. 1e-4,5e-4,1.5e-5")
    p.add_argument("--count", type=int, help="number of solenoids (default: device shunt count)")
    p.add_argument("--compare-ccw", help="kappa [T/m/A], resistance [Ohm], target gradient [T/m]")

    return parser


_ERROR_CODES = (
    (DeviceFileError, "parse_error", 2),
    (GeometryError, "geometry_error", 2),
    (MaterialError, "material_error", 2),
    (ValidationError, "validation_error", 2),
    (SolverError, "solver_error", 3),
    (KneeNotFoundError, "no_knee", 3),
    (SersError, "error", 2),
)


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, out)
    except SersError as exc:
        for exc_type, code, exit_code in _ERROR_CODES:
            if isinstance(exc, exc_type):
                err.write(f"error_code={code} {exc}\n")
                return exit_code
        raise  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
