"""Closed-form design analytics for saturable reluctance switch devices.

Covers the OFF/ON flux dividers, the switching-current predictor, the four
design conditions, the switching ratio under fabrication mismatch and
finite primary-core reluctance, and a deterministic Monte-Carlo tolerance
sweep.  Where a closed form exists, an independent numeric evaluation of
the linearised perturbation circuit is used as a cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .circuit import (
    Device,
    ShuntElement,
    gap_reluctance,
    magnet_mmf,
    magnet_reluctance,
    reluctance_off,
    reluctance_on,
)
from .errors import ConsistencyError, ValidationError
from .materials import MU0
from .solver import SolveOptions, solve_operating_point


@dataclass(frozen=True)
class PrimaryCoreModel:
    """Finite primary-core data: mean flux path, cross-section and permeability."""

    mean_path_m: float
    area_m2: float
    mu_rel: float

    def __post_init__(self):
        for what, v in (("mean path", self.mean_path_m), ("area", self.area_m2),
                        ("relative permeability", self.mu_rel)):
            if not v > 0.0:
                raise ValidationError(f"primary core {what} must be positive, got {v}")

    @property
    def delta_reluctance(self) -> float:
        """Series reluctance imbalance contributed by the core [1/H]."""
        return self.mean_path_m / (self.mu_rel * MU0 * self.area_m2)


@dataclass(frozen=True)
class ConditionMargins:
    """Numeric interpretation of the design-condition inequalities."""

    d1_factor: float = 10.0      # how much headroom "much less than" requires
    d3_rel_tol: float = 1e-9     # allowed |sum| relative to the largest term
    d4_rel_tol: float = 1e-9

    def __post_init__(self):
        if self.d1_factor < 1.0:
            raise ValidationError(f"d1_factor must be >= 1, got {self.d1_factor}")
        if not self.d3_rel_tol > 0.0 or not self.d4_rel_tol > 0.0:
            raise ValidationError("condition tolerances must be positive")


@dataclass(frozen=True)
class ConditionStatus:
    name: str
    status: str                  # "pass" | "fail" | "not_evaluated"
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class ConditionReport:
    d1: ConditionStatus
    d2: ConditionStatus
    d3: ConditionStatus
    d4: ConditionStatus

    def __iter__(self):
        return iter((self.d1, self.d2, self.d3, self.d4))

    @property
    def all_passed(self) -> bool:
        """True when no evaluated condition failed."""
        return all(c.status != "fail" for c in self)


@dataclass(frozen=True)
class McAlphaSummary:
    """Distribution of the switching ratio over sampled fabrication errors."""

    mean: float
    p50: float
    p95: float
    max: float
    samples: int
    seed: int
    alphas: np.ndarray | None = None


@dataclass(frozen=True)
class ToleranceReport:
    """Switching-ratio analytics for a (possibly mismatched) device."""

    kappa_off_T_per_A: float
    kappa_on_T_per_A: float
    alpha: float
    alpha_numeric: float
    r_t_per_H: float
    output_offset_Wb: float | None
    monte_carlo: McAlphaSummary | None = None


# -- sensitivities and dividers ---------------------------------------------


def kappa_off(device: Device) -> float:
    """OFF-state (ramp) current sensitivity mu0*N/l_g [T/A].

    Uses the largest turn count if the shunts disagree (with a warning).
    """
    turn_counts = {sh.turns for sh in device.shunts}
    if len(turn_counts) > 1:
        warnings.warn(
            f"shunts have different turn counts {sorted(turn_counts)}; using the largest",
            stacklevel=2,
        )
    return MU0 * max(turn_counts) / device.gap.length_m


def _parallel(*reluctances: float | None) -> float:
    conductance = sum(1.0 / r for r in reluctances if r is not None)
    return 1.0 / conductance


def _divider_flux(device: Device, r_shunt: float) -> float:
    """Gap flux for a linearised shunt section of reluctance ``r_shunt``."""
    r_leak = device.leakage.reluctance_per_H if device.leakage is not None else None
    r_g = gap_reluctance(device.gap)
    p = _parallel(r_shunt, r_leak, r_g)
    f_m = magnet_mmf(device.magnet)
    f_g = f_m * p / (magnet_reluctance(device.magnet) + p)
    return f_g / r_g


def off_state_flux(device: Device, mu_i: float | None = None) -> float:
    """OFF-state air-gap flux [Wb] from the linear reluctance divider.

    The magnet flux is taken as F_m/(R_m + parallel load) so the divider is
    exactly the linearised circuit solution; ``mu_i`` overrides the shunts'
    own initial permeabilities.
    """
    return _divider_flux(device, reluctance_off(device, mu_i))


def on_state_flux(device: Device) -> float:
    """ON-state air-gap flux [Wb]: the same divider with saturated shunts."""
    return _divider_flux(device, reluctance_on(device))


def fg_sat(device: Device) -> float:
    """Air-gap mmf once both shunts are fully saturated [A]."""
    r_leak = device.leakage.reluctance_per_H if device.leakage is not None else None
    p = _parallel(reluctance_on(device), r_leak, gap_reluctance(device.gap))
    f_m = magnet_mmf(device.magnet)
    return f_m * p / (magnet_reluctance(device.magnet) + p)


def predict_isat(device: Device, h_sat_A_per_m: float) -> float:
    """Switching current I_sat = (H_sat*l_s + F_g_sat)/N [A].

    For mismatched shunts this returns the largest per-shunt estimate (the
    last shunt to saturate completes the switch).
    """
    if h_sat_A_per_m < 0.0:
        raise ValidationError(f"H_sat must be >= 0, got {h_sat_A_per_m}")
    if all(sh.turns == 0 for sh in device.shunts):
        raise ValidationError("switching current undefined for zero-turn solenoids")
    f = fg_sat(device)
    return max(
        (h_sat_A_per_m * sh.length_m + f) / sh.turns
        for sh in device.shunts
        if sh.turns > 0
    )


def approx_isat(device: Device, b_g_sat_T: float, h_sat_A_per_m: float | None = None) -> float:
    """Approximate switching current l_g*B_g_sat/(mu0*N) [A].

    Valid when the shunt material saturates well before the gap mmf is
    reached; passing ``h_sat_A_per_m`` enables a validity warning.
    """
    turns = max(sh.turns for sh in device.shunts)
    if turns == 0:
        raise ValidationError("switching current undefined for zero-turn solenoids")
    if h_sat_A_per_m is not None:
        l_s = max(sh.length_m for sh in device.shunts)
        if h_sat_A_per_m * l_s > 0.1 * fg_sat(device):
            warnings.warn(
                "H_sat*l_s exceeds 10% of the saturation gap mmf; "
                "the approximate switching current is unreliable here",
                stacklevel=2,
            )
    return device.gap.length_m * b_g_sat_T / (MU0 * turns)


# -- design conditions -------------------------------------------------------


def _not_evaluated(name: str, why: str) -> ConditionStatus:
    return ConditionStatus(name=name, status="not_evaluated", detail=why)


def _sum_condition(name: str, terms: list[float], rel_tol: float) -> ConditionStatus:
    total = math.fsum(terms)
    largest = max((abs(t) for t in terms), default=0.0)
    allowed = rel_tol * largest
    passed = abs(total) <= allowed
    margin = math.inf if total == 0.0 else allowed / abs(total)
    return ConditionStatus(
        name=name,
        status="pass" if passed else "fail",
        lhs=abs(total),
        rhs=allowed,
        margin=margin,
        detail=f"|sum| vs {rel_tol:g} of the largest term ({largest:.6e})",
    )


def check_conditions(
    device: Device,
    margins: ConditionMargins | None = None,
    *,
    primary_area_m2: float | None = None,
    primary_b_sat_T: float | None = None,
    magnet_b_T: float | None = None,
    shunt_currents_A: list[float] | None = None,
) -> ConditionReport:
    """Evaluate the four design conditions.

    D1 (no saturation by the magnet) needs the primary-core area and
    saturation flux density; without them it is reported "not_evaluated".
    The magnet's working flux density defaults to the loaded value from an
    OFF-state solve; ``magnet_b_T`` overrides it.  D3 uses a common unit
    drive current unless per-shunt currents are given.
    """
    m = margins or ConditionMargins()
    shunts = device.shunts

    # D1: A_m*B_m < sum(A_s*B_sat) and sum much less than A_p*B_sat_p
    b_sats = [sh.material.b_sat for sh in shunts]
    if primary_area_m2 is None or primary_b_sat_T is None:
        d1 = _not_evaluated("D1", "primary-core area/saturation not provided")
    elif any(b is None for b in b_sats):
        d1 = _not_evaluated("D1", "a shunt material has no saturation flux density")
    else:
        if magnet_b_T is None:
            op = solve_operating_point(device, 0.0, SolveOptions())
            magnet_b_T = op.flux_magnet_Wb / device.magnet.area_m2
        lhs = device.magnet.area_m2 * magnet_b_T
        shunt_sum = math.fsum(sh.area_m2 * b for sh, b in zip(shunts, b_sats))
        primary = primary_area_m2 * primary_b_sat_T
        ok = lhs < shunt_sum and m.d1_factor * shunt_sum <= primary
        margin = min(shunt_sum / lhs if lhs > 0.0 else math.inf,
                     primary / (m.d1_factor * shunt_sum))
        d1 = ConditionStatus(
            name="D1", status="pass" if ok else "fail",
            lhs=lhs, rhs=shunt_sum, margin=margin,
            detail=f"primary capacity {primary:.6e} Wb, required headroom x{m.d1_factor:g}",
        )

    # D2: l_g/A_g < l_s/A_s for every shunt
    lhs = device.gap.length_m / device.gap.area_m2
    rhs = min(sh.length_m / sh.area_m2 for sh in shunts)
    d2 = ConditionStatus(
        name="D2", status="pass" if lhs < rhs else "fail",
        lhs=lhs, rhs=rhs, margin=rhs / lhs,
        detail="gap l/A vs smallest shunt l/A",
    )

    # D3: solenoid-field cancellation at the drive current
    if shunt_currents_A is None:
        currents = [1.0] * len(shunts)
    elif len(shunt_currents_A) != len(shunts):
        raise ValidationError(
            f"need one current per shunt ({len(shunts)}), got {len(shunt_currents_A)}"
        )
    else:
        currents = list(shunt_currents_A)
    d3_terms = [
        sh.orientation * sh.turns * sh.solenoid_area * i / sh.length_m
        for sh, i in zip(shunts, currents)
    ]
    d3 = _sum_condition("D3", d3_terms, m.d3_rel_tol)

    # D4: core-field cancellation
    if any(b is None for b in b_sats):
        d4 = _not_evaluated("D4", "a shunt material has no saturation flux density")
    else:
        d4_terms = [sh.orientation * sh.area_m2 * b for sh, b in zip(shunts, b_sats)]
        d4 = _sum_condition("D4", d4_terms, m.d4_rel_tol)

    return ConditionReport(d1=d1, d2=d2, d3=d3, d4=d4)


# -- switching ratio ----------------------------------------------------------


def total_reluctance(device: Device) -> float:
    """Total pole-to-pole reluctance R_t [1/H] with the shunts saturated.

    Estimated with the ideal shunt-section value (parallel combination at
    mu0), which makes it insensitive to small solenoid-geometry errors.
    """
    r_leak = device.leakage.reluctance_per_H if device.leakage is not None else None
    return _parallel(
        reluctance_on(device),
        magnet_reluctance(device.magnet),
        r_leak,
        gap_reluctance(device.gap),
    )


def _two_shunts(device: Device) -> tuple[ShuntElement, ShuntElement]:
    if len(device.shunts) != 2:
        raise ValidationError(
            f"closed-form switching-ratio analysis needs exactly two shunts, "
            f"got {len(device.shunts)}"
        )
    return device.shunts


def _linearised_kappa_on(device: Device) -> float:
    """ON-state sensitivity from the linearised perturbation circuit [T/A].

    Solves the saturated small-signal flux balance numerically at two
    perturbation currents and finite-differences the node mmf; this shares
    no algebra with the closed form in :func:`alpha_mismatch`.
    """
    s1, s2 = _two_shunts(device)
    # small-signal shunt reluctances over the solenoid cross-section; the
    # winding is taken to span the whole core length
    r1 = s1.length_m / (MU0 * s1.solenoid_area)
    r2 = s2.length_m / (MU0 * s2.solenoid_area)
    r_m = magnet_reluctance(device.magnet)
    r_g = gap_reluctance(device.gap)
    r_leak = device.leakage.reluctance_per_H if device.leakage is not None else math.inf
    f_m = magnet_mmf(device.magnet)
    n1, n2 = s1.turns, s2.turns

    def balance(f_g: float, d_i: float) -> float:
        return (
            (s1.orientation * n1 * d_i - f_g) / r1
            + (s2.orientation * n2 * d_i - f_g) / r2
            + (f_m - f_g) / r_m
            - f_g / r_leak
            - f_g / r_g
        )

    span = max(abs(f_m), float(max(n1, n2)), 1.0) * 4.0
    roots = []
    for d_i in (-1.0, 1.0):
        roots.append(brentq(balance, -span, span, args=(d_i,), rtol=8.9e-16))
    slope = (roots[1] - roots[0]) / 2.0
    return MU0 * slope / device.gap.length_m


def alpha_mismatch(device: Device, *, cross_check: bool = True) -> ToleranceReport:
    """Switching ratio of a two-shunt device with imperfect solenoid matching.

    The closed form is alpha = mu0*R_t*|A_sol2/l_s2 - A_sol1/l_s1| with the
    ideal R_t estimate; ``kappa_on`` is derived from the same quantities so
    that alpha == |kappa_on/kappa_off| holds exactly.  With ``cross_check``
    the linearised circuit is also solved numerically and a disagreement
    beyond 5% raises :class:`ConsistencyError`.
    """
    s1, s2 = _two_shunts(device)
    r_t = total_reluctance(device)
    ratio1 = s1.solenoid_area / s1.length_m
    ratio2 = s2.solenoid_area / s2.length_m
    k_off = kappa_off(device)
    turns = max(s1.turns, s2.turns)
    k_on = MU0 * r_t * turns / device.gap.length_m * MU0 * (ratio2 - ratio1)
    alpha = MU0 * r_t * abs(ratio2 - ratio1)

    alpha_numeric = alpha
    if cross_check:
        k_on_num = _linearised_kappa_on(device)
        alpha_numeric = abs(k_on_num / k_off) if k_off > 0.0 else 0.0
        tol = 0.05 * max(alpha, alpha_numeric)
        if abs(alpha - alpha_numeric) > tol:
            raise ConsistencyError(
                f"closed-form switching ratio {alpha:.6e} and linearised-circuit "
                f"value {alpha_numeric:.6e} disagree by more than 5%"
            )

    offset = None
    if all(sh.material.b_sat is not None for sh in (s1, s2)):
        offset = s2.area_m2 * s2.material.b_sat - s1.area_m2 * s1.material.b_sat

    return ToleranceReport(
        kappa_off_T_per_A=k_off,
        kappa_on_T_per_A=k_on,
        alpha=alpha,
        alpha_numeric=alpha_numeric,
        r_t_per_H=r_t,
        output_offset_Wb=offset,
    )


def alpha_core(device: Device, core: PrimaryCoreModel) -> float:
    """Switching-ratio floor imposed by finite primary-core reluctance.

    Models the core as an extra series reluctance deltaR seen by the shunt
    further from the air-gap: alpha = R_t*deltaR/(R^2 + R*deltaR) with
    R = l_s/(mu0*A_s).
    """
    s1, s2 = _two_shunts(device)
    if (s1.length_m, s1.area_m2) != (s2.length_m, s2.area_m2):
        raise ValidationError("core-limit formula assumes two identical shunts")
    r = s1.length_m / (MU0 * s1.area_m2)
    d_r = core.delta_reluctance
    return total_reluctance(device) * d_r / (r * r + r * d_r)


def output_offset(device: Device) -> float:
    """Constant output offset from unequal shunt saturation, A_s2*B_sat2 - A_s1*B_sat1.

    Note the expression has flux units (area times flux density); it is
    reported in Wb.
    """
    s1, s2 = _two_shunts(device)
    for sh in (s1, s2):
        if sh.material.b_sat is None:
            raise ValidationError(
                f"shunt material {sh.material.name or sh.material.kind!r} does not saturate"
            )
    return s2.area_m2 * s2.material.b_sat - s1.area_m2 * s1.material.b_sat


# -- Monte-Carlo tolerance analysis -------------------------------------------


@dataclass(frozen=True)
class ToleranceSpec:
    """Relative fabrication tolerances per shunt.

    Each field is either a scalar (applied to every shunt) or a sequence
    with one entry per shunt.  ``kind`` selects uniform half-widths or
    normal standard deviations.
    """

    kind: str = "uniform"
    area_sol: float | tuple[float, ...] = 0.0
    length_s: float | tuple[float, ...] = 0.0
    area_s: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "normal"):
            raise ValidationError(f"tolerance kind must be 'uniform' or 'normal', got {self.kind!r}")

    def widths(self, field_name: str, n_shunts: int) -> list[float]:
        value = getattr(self, field_name)
        if np.ndim(value) == 0:
            widths = [float(value)] * n_shunts
        else:
            widths = [float(v) for v in value]
            if len(widths) != n_shunts:
                raise ValidationError(
                    f"{field_name}: need one tolerance per shunt ({n_shunts}), got {len(widths)}"
                )
        if any(w < 0.0 for w in widths):
            raise ValidationError(f"{field_name}: tolerances must be >= 0")
        return widths


def _perturbed_device(device: Device, tol: ToleranceSpec, rng: np.random.Generator) -> Device:
    n = len(device.shunts)
    widths = {f: tol.widths(f, n) for f in ("area_sol", "length_s", "area_s")}
    new_shunts = []
    for k, sh in enumerate(device.shunts):
        factors = {}
        # fixed draw order keeps the stream layout independent of the widths
        for field_name in ("area_sol", "length_s", "area_s"):
            w = widths[field_name][k]
            if tol.kind == "uniform":
                draw = rng.uniform(-1.0, 1.0)
            else:
                draw = rng.standard_normal()
            factors[field_name] = max(1.0 + w * draw, 1e-3)
        new_shunts.append(replace(
            sh,
            length_m=sh.length_m * factors["length_s"],
            area_m2=sh.area_m2 * factors["area_s"],
            solenoid_area_m2=sh.solenoid_area * factors["area_sol"],
        ))
    return replace(device, shunts=tuple(new_shunts))


def monte_carlo_alpha(
    device: Device,
    tol: ToleranceSpec,
    samples: int,
    seed: int,
    keep_samples: bool = True,
) -> McAlphaSummary:
    """Sample fabrication errors and summarise the switching-ratio distribution.

    Each sample draws from an independent random stream keyed by
    (seed, sample index), so results are bit-identical regardless of
    execution order or parallelism.
    """
    if samples < 1:
        raise ValidationError(f"need at least one sample, got {samples}")
    alphas = np.empty(samples)
    for i in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        perturbed = _perturbed_device(device, tol, rng)
        alphas[i] = alpha_mismatch(perturbed, cross_check=False).alpha
    return McAlphaSummary(
        mean=float(np.mean(alphas)),
        p50=float(np.percentile(alphas, 50)),
        p95=float(np.percentile(alphas, 95)),
        max=float(np.max(alphas)),
        samples=samples,
        seed=seed,
        alphas=alphas if keep_samples else None,
    )
