"""Device-description files and CSV emission.

The device format is INI-like: one device per file, sections ``[magnet]``,
``[airgap]``, optional ``[leakage]`` and ``[primary_core]``, one
``[material.<name>]`` per material and ``[shunt.<k>]`` with k contiguous
from 1.  Keys carry explicit SI-unit suffixes (``length_m``, ``area_m2``,
``remanence_T``, ...); cylindrical parts may give ``radius_m`` instead of
``area_m2``.  Lines starting with ``#`` or ``;`` are comments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .circuit import AirGap, Device, LeakagePath, MagnetElement, ShuntElement, circle_area
from .design import PrimaryCoreModel
from .errors import DeviceFileError, ValidationError
from .materials import (
    MU0,
    BhTable,
    MaterialModel,
    build_table_material,
    make_linear_material,
    make_saturating_material,
)
from .solver import Sweep

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_.]+)\]$")

_SECTION_KEYS = {
    "magnet": {"length_m", "radius_m", "area_m2", "remanence_T", "recoil_mu_r"},
    "airgap": {"length_m", "radius_m", "area_m2"},
    "leakage": {"reluctance_per_H"},
    "primary_core": {"mean_path_m", "area_m2", "mu_rel"},
    "material": {"kind", "mu_rel", "js_T", "mu_i_rel", "bh", "b_sat_T"},
    "shunt": {"length_m", "radius_m", "area_m2", "turns", "orientation",
              "material", "area_sol_m2", "length_sol_m"},
}


@dataclass
class ParsedDevice:
    device: Device
    materials: dict[str, MaterialModel]
    primary_core: PrimaryCoreModel | None


class _Section:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.entries: dict[str, tuple[str, int]] = {}

    def take(self, key: str) -> tuple[str, int] | None:
        return self.entries.pop(key, None)

    def require(self, key: str) -> tuple[str, int]:
        got = self.take(key)
        if got is None:
            raise DeviceFileError(f"section [{self.name}] is missing key '{key}'", self.line)
        return got

    def finish(self):
        if self.entries:
            key, (_, line) = next(iter(self.entries.items()))
            raise DeviceFileError(f"unknown key '{key}' in section [{self.name}]", line)


def _float(raw: str, line: int, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DeviceFileError(f"key '{key}': cannot parse '{raw}' as a number", line) from None
    if not math.isfinite(value):
        raise DeviceFileError(f"key '{key}': value must be finite, got '{raw}'", line)
    return value


def _int(raw: str, line: int, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise DeviceFileError(f"key '{key}': cannot parse '{raw}' as an integer", line) from None


def _split_sections(text: str) -> dict[str, _Section]:
    sections: dict[str, _Section] = {}
    current: _Section | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        match = _SECTION_RE.match(line)
        if match:
            name = match.group(1)
            if name in sections:
                raise DeviceFileError(f"duplicate section [{name}]", line_no)
            current = _Section(name, line_no)
            sections[name] = current
            continue
        if "=" not in line:
            raise DeviceFileError(f"expected 'key = value' or a section header, got '{line}'", line_no)
        if current is None:
            raise DeviceFileError(f"'{line}' appears before any section header", line_no)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise DeviceFileError(f"malformed entry '{line}'", line_no)
        if key in current.entries:
            raise DeviceFileError(f"duplicate key '{key}' in section [{current.name}]", line_no)
        current.entries[key] = (value, line_no)
    return sections


def _check_keys(section: _Section, family: str):
    allowed = _SECTION_KEYS[family]
    for key, (_, line) in section.entries.items():
        if key not in allowed:
            raise DeviceFileError(
                f"unknown key '{key}' in section [{section.name}] "
                f"(allowed: {', '.join(sorted(allowed))})", line)


def _area(section: _Section) -> tuple[float, float | None]:
    """Return (area, radius) from exactly one of radius_m / area_m2."""
    radius = section.take("radius_m")
    area = section.take("area_m2")
    if radius is not None and area is not None:
        raise DeviceFileError(
            f"section [{section.name}] gives both radius_m and area_m2", radius[1])
    if radius is not None:
        r = _float(radius[0], radius[1], "radius_m")
        return circle_area(r), r
    if area is not None:
        return _float(area[0], area[1], "area_m2"), None
    raise DeviceFileError(f"section [{section.name}] needs radius_m or area_m2", section.line)


def _parse_bh(raw: str, line: int) -> BhTable:
    points = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise DeviceFileError(f"bh entry '{chunk}' is not 'H:B'", line)
        h_str, _, b_str = chunk.partition(":")
        points.append((_float(h_str.strip(), line, "bh"), _float(b_str.strip(), line, "bh")))
    try:
        return BhTable(tuple(points))
    except ValidationError as exc:
        raise DeviceFileError(f"bh: {exc}", line) from exc


def _parse_material(name: str, section: _Section) -> MaterialModel:
    _check_keys(section, "material")
    kind_raw, kind_line = section.require("kind")
    try:
        if kind_raw == "linear":
            mu_rel, line = section.require("mu_rel")
            model = make_linear_material(_float(mu_rel, line, "mu_rel"), name=name)
        elif kind_raw == "tanh":
            js, js_line = section.require("js_T")
            mu_i_rel, mu_line = section.require("mu_i_rel")
            model = make_saturating_material(
                _float(mu_i_rel, mu_line, "mu_i_rel") * MU0,
                _float(js, js_line, "js_T"), name=name)
        elif kind_raw == "table":
            bh_raw, bh_line = section.require("bh")
            b_sat = section.take("b_sat_T")
            model = build_table_material(
                _parse_bh(bh_raw, bh_line), name=name,
                b_sat=None if b_sat is None else _float(b_sat[0], b_sat[1], "b_sat_T"))
        else:
            raise DeviceFileError(
                f"unknown material kind '{kind_raw}' (expected linear, table or tanh)", kind_line)
    except ValidationError as exc:
        if isinstance(exc, DeviceFileError):
            raise
        raise DeviceFileError(str(exc), section.line) from exc
    section.finish()
    return model


def parse_device(text: str) -> ParsedDevice:
    """Parse a device description; raises DeviceFileError with a line number."""
    sections = _split_sections(text)

    materials: dict[str, MaterialModel] = {}
    shunt_sections: dict[int, _Section] = {}
    magnet_sec = gap_sec = leak_sec = core_sec = None
    for name, section in sections.items():
        if name == "magnet":
            magnet_sec = section
        elif name == "airgap":
            gap_sec = section
        elif name == "leakage":
            leak_sec = section
        elif name == "primary_core":
            core_sec = section
        elif name.startswith("material."):
            mat_name = name[len("material."):]
            if not mat_name:
                raise DeviceFileError("material section needs a name: [material.<name>]", section.line)
            materials[mat_name] = _parse_material(mat_name, section)
        elif name.startswith("shunt."):
            idx_str = name[len("shunt."):]
            try:
                idx = int(idx_str)
            except ValueError:
                raise DeviceFileError(f"shunt index '{idx_str}' is not an integer", section.line) from None
            if idx < 1:
                raise DeviceFileError(f"shunt indices start at 1, got {idx}", section.line)
            shunt_sections[idx] = section
        else:
            raise DeviceFileError(f"unknown section [{name}]", section.line)

    if magnet_sec is None:
        raise DeviceFileError("missing required section [magnet]")
    if gap_sec is None:
        raise DeviceFileError("missing required section [airgap]")
    if not shunt_sections:
        raise DeviceFileError("no [shunt.k] sections found")
    expected = set(range(1, len(shunt_sections) + 1))
    if set(shunt_sections) != expected:
        raise DeviceFileError(
            f"shunt indices must be contiguous from 1; got {sorted(shunt_sections)}")

    try:
        _check_keys(magnet_sec, "magnet")
        area, radius = _area(magnet_sec)
        magnet = MagnetElement(
            length_m=_float(*magnet_sec.require("length_m"), "length_m"),
            area_m2=area,
            remanence_T=_float(*magnet_sec.require("remanence_T"), "remanence_T"),
            recoil_mu_r=_float(*magnet_sec.require("recoil_mu_r"), "recoil_mu_r"),
            radius_m=radius,
        )
        magnet_sec.finish()

        _check_keys(gap_sec, "airgap")
        area, _ = _area(gap_sec)
        gap = AirGap(length_m=_float(*gap_sec.require("length_m"), "length_m"), area_m2=area)
        gap_sec.finish()

        leakage = None
        if leak_sec is not None:
            _check_keys(leak_sec, "leakage")
            leakage = LeakagePath(
                reluctance_per_H=_float(*leak_sec.require("reluctance_per_H"), "reluctance_per_H"))
            leak_sec.finish()

        core = None
        if core_sec is not None:
            _check_keys(core_sec, "primary_core")
            core = PrimaryCoreModel(
                mean_path_m=_float(*core_sec.require("mean_path_m"), "mean_path_m"),
                area_m2=_float(*core_sec.require("area_m2"), "area_m2"),
                mu_rel=_float(*core_sec.require("mu_rel"), "mu_rel"),
            )
            core_sec.finish()

        shunts = []
        for idx in sorted(shunt_sections):
            section = shunt_sections[idx]
            _check_keys(section, "shunt")
            area, radius = _area(section)
            mat_raw, mat_line = section.require("material")
            if mat_raw not in materials:
                raise DeviceFileError(
                    f"shunt {idx} references unknown material '{mat_raw}'", mat_line)
            orientation = section.take("orientation")
            if orientation is None:
                eta = -1 if idx % 2 == 1 else 1  # alternating by default
            else:
                eta = _int(orientation[0], orientation[1], "orientation")
            sol_area = section.take("area_sol_m2")
            sol_len = section.take("length_sol_m")
            shunts.append(ShuntElement(
                length_m=_float(*section.require("length_m"), "length_m"),
                area_m2=area,
                turns=_int(*section.require("turns"), "turns"),
                orientation=eta,
                material=materials[mat_raw],
                radius_m=radius,
                solenoid_area_m2=None if sol_area is None else _float(sol_area[0], sol_area[1], "area_sol_m2"),
                solenoid_length_m=None if sol_len is None else _float(sol_len[0], sol_len[1], "length_sol_m"),
            ))
            section.finish()

        device = Device(magnet=magnet, gap=gap, shunts=tuple(shunts), leakage=leakage)
    except DeviceFileError:
        raise
    except ValidationError as exc:
        raise DeviceFileError(str(exc)) from exc
    return ParsedDevice(device=device, materials=materials, primary_core=core)


# -- serialisation ------------------------------------------------------------


def _material_lines(name: str, model: MaterialModel) -> list[str]:
    lines = [f"[material.{name}]", f"kind = {model.kind}"]
    if model.kind == "linear":
        lines.append(f"mu_rel = {model.mu_rel!r}")
    elif model.kind == "tanh":
        lines.append(f"js_T = {model.j_s!r}")
        lines.append(f"mu_i_rel = {model.mu_i / MU0!r}")
    else:
        pairs = ", ".join(f"{h!r}:{b!r}" for h, b in model.table.points)
        lines.append(f"bh = {pairs}")
        if model.b_sat != model.table.points[-1][1]:
            lines.append(f"b_sat_T = {model.b_sat!r}")
    return lines


def serialize_device(parsed: ParsedDevice) -> str:
    """Render a ParsedDevice back to file text; parse(serialize(p)) == p."""
    dev = parsed.device
    lines = ["[magnet]"]
    if dev.magnet.radius_m is not None:
        lines.append(f"radius_m = {dev.magnet.radius_m!r}")
    else:
        lines.append(f"area_m2 = {dev.magnet.area_m2!r}")
    lines += [
        f"length_m = {dev.magnet.length_m!r}",
        f"remanence_T = {dev.magnet.remanence_T!r}",
        f"recoil_mu_r = {dev.magnet.recoil_mu_r!r}",
        "",
        "[airgap]",
        f"length_m = {dev.gap.length_m!r}",
        f"area_m2 = {dev.gap.area_m2!r}",
    ]
    if dev.leakage is not None:
        lines += ["", "[leakage]", f"reluctance_per_H = {dev.leakage.reluctance_per_H!r}"]
    if parsed.primary_core is not None:
        core = parsed.primary_core
        lines += ["", "[primary_core]",
                  f"mean_path_m = {core.mean_path_m!r}",
                  f"area_m2 = {core.area_m2!r}",
                  f"mu_rel = {core.mu_rel!r}"]
    for name in sorted(parsed.materials):
        lines.append("")
        lines += _material_lines(name, parsed.materials[name])
    name_by_model = {}
    for name, model in parsed.materials.items():
        name_by_model[id(model)] = name
    for k, sh in enumerate(dev.shunts, start=1):
        mat_name = name_by_model.get(id(sh.material))
        if mat_name is None:
            matches = [n for n, m in parsed.materials.items() if m == sh.material]
            if not matches:
                raise ValidationError(f"shunt {k} material is not in the materials registry")
            mat_name = matches[0]
        lines += ["", f"[shunt.{k}]"]
        if sh.radius_m is not None:
            lines.append(f"radius_m = {sh.radius_m!r}")
        else:
            lines.append(f"area_m2 = {sh.area_m2!r}")
        lines += [
            f"length_m = {sh.length_m!r}",
            f"turns = {sh.turns}",
            f"orientation = {sh.orientation}",
            f"material = {mat_name}",
        ]
        if sh.solenoid_area_m2 is not None:
            lines.append(f"area_sol_m2 = {sh.solenoid_area_m2!r}")
        if sh.solenoid_length_m is not None:
            lines.append(f"length_sol_m = {sh.solenoid_length_m!r}")
    return "\n".join(lines) + "\n"


# -- sweep CSV -----------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.11e}"


def sweep_csv_header(n_shunts: int) -> str:
    cols = ["I_A", "F_g_A", "B_g_T", "kappa_T_per_A",
            "phi_g_Wb", "phi_m_Wb", "phi_leak_Wb"]
    cols += [f"phi_s{k}_Wb" for k in range(1, n_shunts + 1)]
    return ",".join(cols)


def write_sweep_csv(sw: Sweep, stream) -> None:
    """Write a sweep as CSV: 12-significant-digit scientific notation,
    ascending current, one phi_s column per shunt."""
    stream.write(sweep_csv_header(len(sw.device.shunts)) + "\n")
    kappa = sw.kappa if sw.kappa is not None else [math.nan] * len(sw.grid)
    for i, point in enumerate(sw.points):
        row = [point.current_A, point.f_g_A, point.b_g_T, float(kappa[i]),
               point.flux_gap_Wb, point.flux_magnet_Wb, point.flux_leak_Wb]
        row += [s.flux_Wb for s in point.shunts]
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def read_sweep_csv(stream) -> dict[str, np.ndarray]:
    """Read a sweep CSV back into arrays keyed by column name."""
    header = stream.readline().strip()
    names = header.split(",")
    rows = []
    for line in stream:
        line = line.strip()
        if line:
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows) if rows else np.empty((0, len(names)))
    return {name: data[:, i] for i, name in enumerate(names)}


def example_device_path() -> str:
    """Filesystem path of the bundled two-shunt example device."""
    return str(resources.files("sersim").joinpath("data/table1.device"))
