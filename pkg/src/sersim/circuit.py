"""Lumped-element model of a saturable reluctance switch device.

A device is a permanent magnet, an air-gap, an optional lumped leakage
path and n >= 2 solenoid-wound shunts, all connected in parallel between
the poles of an ideal (zero-reluctance) primary core.  The single unknown
is the common node mmf F_g across the parallel elements; ``residual``
evaluates the net flux imbalance at that node, which the solver drives
to zero.

Sign convention: fluxes are positive in the direction driven by the
magnet, so the gap and leakage carry -F_g/R while the magnet supplies
(F_m - F_g)/R_m.  The gap flux density is reported as mu0*|F_g|/l_g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .materials import MU0, MaterialModel


def circle_area(radius_m: float) -> float:
    """Cross-section area of a cylindrical part."""
    if not radius_m > 0.0:
        raise ValidationError(f"radius must be positive, got {radius_m}")
    return math.pi * radius_m * radius_m


def _require_positive(value: float, what: str) -> None:
    if not value > 0.0 or not math.isfinite(value):
        raise ValidationError(f"{what} must be positive and finite, got {value}")


@dataclass(frozen=True)
class MagnetElement:
    """Permanent magnet: length, area, remanence and recoil permeability."""

    length_m: float
    area_m2: float
    remanence_T: float
    recoil_mu_r: float
    radius_m: float | None = None

    def __post_init__(self):
        _require_positive(self.length_m, "magnet length")
        _require_positive(self.area_m2, "magnet area")
        if self.remanence_T < 0.0:
            raise ValidationError(f"remanence must be >= 0, got {self.remanence_T}")
        if self.recoil_mu_r < 1.0:
            raise ValidationError(f"recoil permeability must be >= 1, got {self.recoil_mu_r}")

    @classmethod
    def cylinder(cls, radius_m: float, length_m: float, remanence_T: float, recoil_mu_r: float):
        return cls(length_m, circle_area(radius_m), remanence_T, recoil_mu_r, radius_m=radius_m)


@dataclass(frozen=True)
class AirGap:
    """Output air-gap of effective length and area."""

    length_m: float
    area_m2: float

    def __post_init__(self):
        _require_positive(self.length_m, "air-gap length")
        _require_positive(self.area_m2, "air-gap area")


@dataclass(frozen=True)
class LeakagePath:
    """Lumped stray-flux path between the primary-core poles."""

    reluctance_per_H: float

    def __post_init__(self):
        _require_positive(self.reluctance_per_H, "leakage reluctance")


@dataclass(frozen=True)
class ShuntElement:
    """Solenoid-wound high-permeability core shunting the magnet flux.

    ``solenoid_area_m2`` and ``solenoid_length_m`` default to the core's
    own area and length (tightly wound solenoid).  ``orientation`` is the
    winding sense, +1 or -1.
    """

    length_m: float
    area_m2: float
    turns: int
    orientation: int
    material: MaterialModel
    radius_m: float | None = None
    solenoid_area_m2: float | None = None
    solenoid_length_m: float | None = None

    def __post_init__(self):
        _require_positive(self.length_m, "shunt length")
        _require_positive(self.area_m2, "shunt area")
        if int(self.turns) != self.turns or self.turns < 0:
            raise ValidationError(f"turns must be a non-negative integer, got {self.turns}")
        object.__setattr__(self, "turns", int(self.turns))
        if self.orientation not in (-1, 1):
            raise ValidationError(f"orientation must be +1 or -1, got {self.orientation}")
        object.__setattr__(self, "orientation", int(self.orientation))
        if self.solenoid_area_m2 is not None:
            _require_positive(self.solenoid_area_m2, "solenoid area")
        if self.solenoid_length_m is not None:
            _require_positive(self.solenoid_length_m, "solenoid length")

    @classmethod
    def cylinder(cls, radius_m: float, length_m: float, turns: int, orientation: int,
                 material: MaterialModel, **kwargs):
        return cls(length_m, circle_area(radius_m), turns, orientation, material,
                   radius_m=radius_m, **kwargs)

    @property
    def solenoid_area(self) -> float:
        return self.area_m2 if self.solenoid_area_m2 is None else self.solenoid_area_m2

    @property
    def solenoid_length(self) -> float:
        return self.length_m if self.solenoid_length_m is None else self.solenoid_length_m


@dataclass(frozen=True)
class Device:
    """Complete two-pole parallel network."""

    magnet: MagnetElement
    gap: AirGap
    shunts: tuple[ShuntElement, ...]
    leakage: LeakagePath | None = None

    def __post_init__(self):
        object.__setattr__(self, "shunts", tuple(self.shunts))
        if len(self.shunts) < 2:
            raise ValidationError(f"a device needs at least two shunts, got {len(self.shunts)}")


# -- element relations -----------------------------------------------------


def magnet_mmf(magnet: MagnetElement) -> float:
    """Magnet source mmf F_m = l_m*B_r/(mu_r*mu0) [A]."""
    return magnet.length_m * magnet.remanence_T / (magnet.recoil_mu_r * MU0)


def magnet_reluctance(magnet: MagnetElement) -> float:
    """R_m = l_m/(mu_r*mu0*A_m) [1/H]."""
    return magnet.length_m / (magnet.recoil_mu_r * MU0 * magnet.area_m2)


def gap_reluctance(gap: AirGap) -> float:
    """R_g = l_g/(mu0*A_g) [1/H]."""
    return gap.length_m / (MU0 * gap.area_m2)


def shunt_field(shunt: ShuntElement, current_A: float, f_g_A: float) -> float:
    """Field strength inside a shunt core, H = (eta*N*I - F_g)/l_s [A/m]."""
    return (shunt.orientation * shunt.turns * current_A - f_g_A) / shunt.length_m


def residual(device: Device, current_A: float, f_g_A: float) -> float:
    """Net flux imbalance [Wb] at the common node for a trial F_g.

    Strictly decreasing in F_g because every material has dB/dH >= mu0,
    which guarantees a unique operating point.
    """
    total = 0.0
    for sh in device.shunts:
        h = shunt_field(sh, current_A, f_g_A)
        total += sh.material.b_of_h(h) * sh.area_m2
    total += (magnet_mmf(device.magnet) - f_g_A) / magnet_reluctance(device.magnet)
    if device.leakage is not None:
        total -= f_g_A / device.leakage.reluctance_per_H
    total -= f_g_A / gap_reluctance(device.gap)
    return total


def residual_slope(device: Device, current_A: float, f_g_A: float) -> float:
    """d(residual)/dF_g [Wb/A]; always strictly negative."""
    slope = 0.0
    for sh in device.shunts:
        h = shunt_field(sh, current_A, f_g_A)
        slope -= sh.material.mu_diff(h) * sh.area_m2 / sh.length_m
    slope -= 1.0 / magnet_reluctance(device.magnet)
    if device.leakage is not None:
        slope -= 1.0 / device.leakage.reluctance_per_H
    slope -= 1.0 / gap_reluctance(device.gap)
    return slope


# -- shunt-section reluctances ----------------------------------------------


def reluctance_on(device: Device) -> float:
    """Saturated (ON) reluctance of the shunt section: parallel sum at mu0."""
    return 1.0 / sum(MU0 * sh.area_m2 / sh.length_m for sh in device.shunts)


def reluctance_off(device: Device, mu_i: float | None = None) -> float:
    """Unsaturated (OFF) reluctance of the shunt section.

    ``mu_i`` is an absolute permeability applied to every shunt; when
    omitted, each shunt uses its own material's initial permeability
    mu_diff(0).
    """
    perm = 0.0
    for sh in device.shunts:
        mu = sh.material.mu_diff(0.0) if mu_i is None else mu_i
        if not mu > 0.0:
            raise ValidationError(f"permeability must be positive, got {mu}")
        perm += mu * sh.area_m2 / sh.length_m
    return 1.0 / perm


def _identical_pair(device: Device) -> ShuntElement:
    if len(device.shunts) != 2:
        raise ValidationError(
            f"textbook pair formula needs exactly two shunts (got {len(device.shunts)}); "
            "use reluctance_on()/reluctance_off() for the generalised form"
        )
    s1, s2 = device.shunts
    if (s1.length_m, s1.area_m2) != (s2.length_m, s2.area_m2):
        raise ValidationError(
            "textbook pair formula needs identical shunts; "
            "use reluctance_on()/reluctance_off() for the generalised form"
        )
    return s1


def pair_reluctance_on(device: Device) -> float:
    """R_on = l_s/(2*mu0*A_s) for two identical shunts."""
    sh = _identical_pair(device)
    return sh.length_m / (2.0 * MU0 * sh.area_m2)


def pair_reluctance_off(device: Device, mu_i: float) -> float:
    """R_off = l_s/(2*mu_i*A_s) for two identical shunts."""
    sh = _identical_pair(device)
    if not mu_i > 0.0:
        raise ValidationError(f"permeability must be positive, got {mu_i}")
    return sh.length_m / (2.0 * mu_i * sh.area_m2)
