"""Winding geometry, Joule losses and the current-carrying-wire comparison.

The shunt solenoids are modelled as tight single-layer edgewise windings
of rectangular wire: conductive cross-section a (axial) x b (radial) with
an insulation layer c, wound as a helix of pitch l_s/N around the shunt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import Device, ShuntElement
from .errors import GeometryError, ValidationError

#: resistivity of copper at 300 K [Ohm*m]
RHO_COPPER_300K = 1.725e-8


@dataclass(frozen=True)
class WireSpec:
    """Rectangular winding wire: conductor a x b with insulation thickness c."""

    a_m: float                      # conductor thickness along the shunt axis
    b_m: float                      # conductor width, radial
    c_m: float = 0.0                # insulation thickness
    resistivity: float = RHO_COPPER_300K

    def __post_init__(self):
        if not self.a_m > 0.0 or not self.b_m > 0.0:
            raise ValidationError("conductor dimensions must be positive")
        if self.c_m < 0.0:
            raise ValidationError(f"insulation thickness must be >= 0, got {self.c_m}")
        if not self.resistivity > 0.0:
            raise ValidationError(f"resistivity must be positive, got {self.resistivity}")

    @property
    def conductor_area(self) -> float:
        return self.a_m * self.b_m


#: wire back-solved from the prototype's 2.05 W at 2.5 A with four
#: solenoids on 1 mm radius, 4 mm long, 30-turn shunts: per-solenoid
#: resistance 82 mOhm gives a 0.10 x 0.50 mm conductor with 15 um
#: insulation (calibration, not measured data)
PROTOTYPE_WIRE = WireSpec(a_m=1.0e-4, b_m=5.0e-4, c_m=1.5e-5)


def single_layer_wire(shunt: ShuntElement, b_m: float = 5.0e-4, c_m: float = 1.5e-5) -> WireSpec:
    """Wire whose insulated conductor exactly fills the single-layer pitch."""
    if shunt.turns < 1:
        raise ValidationError("winding needs at least one turn")
    a = shunt.length_m / shunt.turns - 2.0 * c_m
    if a <= 0.0:
        raise GeometryError(
            f"insulation {c_m} m leaves no room for a conductor at pitch "
            f"{shunt.length_m / shunt.turns:.6e} m"
        )
    return WireSpec(a_m=a, b_m=b_m, c_m=c_m)


@dataclass(frozen=True)
class CcwReference:
    """Current-carrying-wire baseline: gradient-per-amp and total resistance."""

    kappa_grad_T_per_m_per_A: float
    resistance_Ohm: float

    def __post_init__(self):
        if not self.kappa_grad_T_per_m_per_A > 0.0 or not self.resistance_Ohm > 0.0:
            raise ValidationError("CCW reference values must be positive")


def wire_length(shunt: ShuntElement, wire: WireSpec) -> float:
    """Total helix length of one solenoid winding [m].

    L_w = N*sqrt(4*pi^2*(r_s + b/2 + c)^2 + (l_s/N)^2)
    """
    if shunt.radius_m is None:
        raise ValidationError("wire model needs a cylindrical shunt (radius unknown)")
    if shunt.turns < 1:
        raise ValidationError("winding needs at least one turn")
    pitch = shunt.length_m / shunt.turns
    occupied = wire.a_m + 2.0 * wire.c_m
    if occupied > pitch * (1.0 + 1e-12):
        raise GeometryError(
            f"wire needs {occupied:.6e} m of pitch but only {pitch:.6e} m is available; "
            f"reduce a or c by {occupied - pitch:.6e} m"
        )
    r_avg = shunt.radius_m + wire.b_m / 2.0 + wire.c_m
    return shunt.turns * math.sqrt(4.0 * math.pi ** 2 * r_avg ** 2 + pitch ** 2)


def solenoid_resistance(shunt: ShuntElement, wire: WireSpec) -> float:
    """DC resistance of one winding, rho*L_w/A_w [Ohm]."""
    return wire.resistivity * wire_length(shunt, wire) / wire.conductor_area


def joule_power(device: Device, wire: WireSpec, current_A: float,
                solenoid_count: int | None = None) -> float:
    """Total steady-state Joule loss of ``solenoid_count`` windings [W].

    P = count * rho * L_w * I^2 / A_w, with the winding geometry taken from
    the first shunt (all solenoids assumed identical).  ``solenoid_count``
    defaults to the device's shunt count.
    """
    count = len(device.shunts) if solenoid_count is None else solenoid_count
    if count < 1:
        raise ValidationError(f"solenoid count must be >= 1, got {count}")
    return count * solenoid_resistance(device.shunts[0], wire) * current_A ** 2


def ccw_equivalent(ref: CcwReference, target_gradient_T_per_m: float) -> tuple[float, float]:
    """Current and power a CCW baseline needs for the same gradient.

    Returns (I [A], P [W]) with I = gradient/kappa_grad and P = I^2*R.
    """
    current = target_gradient_T_per_m / ref.kappa_grad_T_per_m_per_A
    return current, current ** 2 * ref.resistance_Ohm
