"""Soft-ferromagnet magnetisation models.

Every model is an odd, strictly increasing B(H) function with a
differential permeability dB/dH that never falls below the vacuum value.
Three kinds are supported:

* ``linear``  -- constant relative permeability (never saturates),
* ``table``   -- monotone piecewise-cubic interpolation of tabulated
  normal-curve data, extrapolated with slope exactly mu0 beyond the table,
* ``tanh``    -- closed-form saturating family, useful as a synthetic
  stand-in when only the saturation anchors of an alloy are known.

Monotonicity is guaranteed by interpolating the polarisation
J(H) = B - mu0*H (non-decreasing whenever the table slopes are >= mu0)
rather than B itself, so the interpolant can never undershoot dB/dH < mu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import MaterialError, ValidationError

#: vacuum permeability [H/m]
MU0 = 4.0e-7 * math.pi

#: default relative threshold above mu0 that defines full saturation
DEFAULT_SAT_EPS = 1e-3

# cosh(x)**2 overflows past ~355; beyond this the tanh model is fully saturated
_COSH_CAP = 350.0


def _scalar_or_array(h, out):
    if np.ndim(h) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class BhTable:
    """First-quadrant normal magnetisation curve as ordered (H [A/m], B [T]) knots.

    The first knot must be (0, 0), H and B must be strictly increasing and
    every chord slope must be at least mu0 (below that the implied
    polarisation would decrease, which is unphysical for a normal curve).
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(h), float(b)) for h, b in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValidationError("BH table needs at least two points")
        if pts[0] != (0.0, 0.0):
            raise ValidationError(f"BH table must start at (0, 0), got {pts[0]}")
        for i in range(1, len(pts)):
            h0, b0 = pts[i - 1]
            h1, b1 = pts[i]
            if not h1 > h0:
                raise ValidationError(f"BH table row {i}: H not strictly increasing ({h1} after {h0})")
            if not b1 > b0:
                raise ValidationError(f"BH table row {i}: B not strictly increasing ({b1} after {b0})")
            if b1 - b0 < MU0 * (h1 - h0) * (1.0 - 1e-12):
                raise ValidationError(
                    f"BH table row {i}: slope {(b1 - b0) / (h1 - h0):.6e} is below mu0"
                )

    @property
    def h_values(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def b_values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class MaterialModel:
    """Immutable magnetisation model; use the ``make_*``/``build_*`` factories.

    ``b_sat`` is metadata: the saturation flux-density anchor of the
    material (polarisation J_s for the tanh kind, last tabulated B for
    tables unless overridden, absent for linear materials).
    """

    kind: str
    name: str = ""
    mu_rel: float | None = None        # linear kind
    mu_i: float | None = None          # tanh kind, initial permeability [T*m/A]
    j_s: float | None = None           # tanh kind, saturation polarisation [T]
    table: BhTable | None = None       # table kind
    b_sat: float | None = None
    _j_interp: object = field(default=None, compare=False, repr=False)
    _j_slope: object = field(default=None, compare=False, repr=False)
    _h_max: float = field(default=0.0, compare=False, repr=False)

    # -- evaluation -------------------------------------------------------

    def b_of_h(self, h):
        """Flux density B(H) [T]; odd, strictly increasing, total on finite H."""
        h_arr = np.asarray(h, dtype=float)
        if self.kind == "linear":
            out = self.mu_rel * MU0 * h_arr
        elif self.kind == "tanh":
            chi = self.mu_i - MU0
            out = MU0 * h_arr + self.j_s * np.tanh(chi * h_arr / self.j_s)
        else:
            a = np.abs(h_arr)
            j = self._j_interp(np.minimum(a, self._h_max))
            out = MU0 * h_arr + np.sign(h_arr) * j
        return _scalar_or_array(h, out)

    def mu_diff(self, h):
        """Differential permeability dB/dH [T*m/A]; even, always >= mu0."""
        h_arr = np.asarray(h, dtype=float)
        if self.kind == "linear":
            out = np.full_like(h_arr, self.mu_rel * MU0)
        elif self.kind == "tanh":
            chi = self.mu_i - MU0
            x = np.abs(chi * h_arr / self.j_s)
            sech2 = np.where(x < _COSH_CAP, 1.0 / np.cosh(np.minimum(x, _COSH_CAP)) ** 2, 0.0)
            out = MU0 + chi * sech2
        else:
            a = np.abs(h_arr)
            inside = a < self._h_max
            out = MU0 + np.where(inside, self._j_slope(np.minimum(a, self._h_max)), 0.0)
        return _scalar_or_array(h, out)

    def h_sat(self, eps: float = DEFAULT_SAT_EPS) -> float:
        """Smallest H >= 0 where mu_diff drops to (1 + eps)*mu0."""
        return h_sat(self, eps)

    @property
    def saturates(self) -> bool:
        return self.kind != "linear"


# -- factories ------------------------------------------------------------


def make_linear_material(mu_rel: float, name: str = "") -> MaterialModel:
    """Constant-permeability model B(H) = mu_rel*mu0*H."""
    if not mu_rel >= 1.0:
        raise ValidationError(f"relative permeability must be >= 1, got {mu_rel}")
    return MaterialModel(kind="linear", name=name, mu_rel=float(mu_rel))


def make_saturating_material(mu_i: float, j_s: float, name: str = "") -> MaterialModel:
    """Saturating model B(H) = mu0*H + J_s*tanh((mu_i - mu0)*H / J_s).

    Parameters
    ----------
    mu_i:
        Initial (absolute) permeability [T*m/A]; equals dB/dH at H = 0.
        Must exceed mu0.
    j_s:
        Saturation polarisation [T]; B(H) - mu0*H approaches +-J_s.
    """
    if not j_s > 0.0:
        raise ValidationError(f"saturation polarisation must be positive, got {j_s}")
    if not mu_i > MU0:
        raise ValidationError(f"initial permeability {mu_i} must exceed mu0 = {MU0:.6e}")
    return MaterialModel(kind="tanh", name=name, mu_i=float(mu_i), j_s=float(j_s), b_sat=float(j_s))


def build_table_material(table: BhTable, name: str = "", b_sat: float | None = None) -> MaterialModel:
    """Monotone interpolant through the given BH knots.

    The interpolation is shape preserving (no overshoot, dB/dH >= mu0
    everywhere), passes exactly through every knot, is extended to H < 0 by
    odd symmetry and continues with slope exactly mu0 beyond the last knot.
    """
    h = table.h_values
    j = table.b_values - MU0 * h
    interp = PchipInterpolator(h, j, extrapolate=False)
    slope = interp.derivative()
    if b_sat is None:
        b_sat = float(table.b_values[-1])
    return MaterialModel(
        kind="table",
        name=name,
        table=table,
        b_sat=float(b_sat),
        _j_interp=interp,
        _j_slope=slope,
        _h_max=float(h[-1]),
    )


def calibrate_saturating_material(
    h_sat_target: float,
    b_sat: float,
    eps: float = DEFAULT_SAT_EPS,
    name: str = "",
) -> MaterialModel:
    """Build a tanh model whose full-saturation field equals ``h_sat_target``.

    For the tanh family the saturation condition mu_diff(H) = (1 + eps)*mu0
    has the closed form H = (J_s/chi) * acosh(sqrt(chi / (eps*mu0))) with
    chi = mu_i - mu0; this is inverted for chi by bracketed root finding on
    the physically relevant (high-permeability) branch.
    """
    if not h_sat_target > 0.0 or not b_sat > 0.0:
        raise ValidationError("saturation anchors must be positive")

    def h_of_chi(chi: float) -> float:
        return (b_sat / chi) * math.acosh(math.sqrt(chi / (eps * MU0)))

    lo, hi = 100.0 * eps * MU0, 100.0
    if h_of_chi(lo) < h_sat_target:
        raise ValidationError(f"saturation field {h_sat_target} out of reach for b_sat {b_sat}")
    if h_of_chi(hi) > h_sat_target:
        raise ValidationError(f"saturation field {h_sat_target} too low for b_sat {b_sat}")
    chi = brentq(lambda c: h_of_chi(c) - h_sat_target, lo, hi, rtol=8.9e-16)
    return make_saturating_material(MU0 + chi, b_sat, name=name)


def mumetal_like(name: str = "mumetal") -> MaterialModel:
    """Synthetic stand-in for a MuMetal-class alloy (H_sat 400 A/m, J_s 0.75 T)."""
    return calibrate_saturating_material(400.0, 0.75, name=name)


def ns4750_like(name: str = "ns4750") -> MaterialModel:
    """Synthetic stand-in for a nickel-steel 4750 class alloy (H_sat 4e4 A/m, J_s 1.5 T)."""
    return calibrate_saturating_material(4.0e4, 1.5, name=name)


def v_permendur_like(name: str = "v_permendur") -> MaterialModel:
    """Synthetic stand-in for a vanadium-permendur class alloy (H_sat 3e5 A/m, J_s 2.3 T)."""
    return calibrate_saturating_material(3.0e5, 2.3, name=name)


# -- module-level operation aliases ---------------------------------------


def b_of_h(model: MaterialModel, h):
    return model.b_of_h(h)


def mu_diff(model: MaterialModel, h):
    return model.mu_diff(h)


@lru_cache(maxsize=1024)
def h_sat(model: MaterialModel, eps: float = DEFAULT_SAT_EPS) -> float:
    """Full-saturation field strength [A/m].

    Returns the smallest H >= 0 with mu_diff(H) <= (1 + eps)*mu0, located by
    scanning for a bracket and bisecting it; deterministic for fixed inputs.

    Raises
    ------
    MaterialError
        If the model is linear (never saturates) or no crossing exists
        within the numeric search range.
    """
    if not eps > 0.0:
        raise ValidationError(f"saturation threshold must be positive, got {eps}")
    if not model.saturates:
        raise MaterialError(f"material {model.name or model.kind!r} does not saturate")
    threshold = (1.0 + eps) * MU0
    if model.mu_diff(0.0) <= threshold:
        return 0.0

    lo = 0.0
    hi = None
    if model.kind == "table":
        # mu_diff is exactly mu0 past the table, so a crossing always exists
        knots = model.table.h_values
        samples = np.unique(np.concatenate([
            np.linspace(knots[i - 1], knots[i], 9) for i in range(1, len(knots))
        ]))
        mu = model.mu_diff(samples)
        below = np.nonzero(mu <= threshold)[0]
        if below.size:
            i = below[0]
            lo, hi = (samples[i - 1], samples[i]) if i > 0 else (0.0, samples[0])
        else:
            lo, hi = knots[-1], knots[-1]
            return float(hi)
    else:
        step = model.j_s / (model.mu_i - MU0)  # natural field scale of the knee
        h = step / 1024.0
        for _ in range(220):
            if model.mu_diff(h) <= threshold:
                hi = h
                break
            lo = h
            h *= 2.0
        if hi is None:
            raise MaterialError("no saturation crossing found within numeric range")

    for _ in range(200):
        if hi - lo <= 1e-14 * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        if model.mu_diff(mid) <= threshold:
            hi = mid
        else:
            lo = mid
    return float(hi)
