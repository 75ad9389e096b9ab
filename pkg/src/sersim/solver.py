"""Operating-point solver, current sweeps and sensitivity extraction.

Each operating point is the unique root in F_g of the circuit residual,
found with Brent's method inside a geometrically expanded bracket and then
polished with a few Newton steps so that the flux imbalance at the
solution sits at the floating-point noise floor rather than at the root
tolerance.  Sweeps solve from the saturated (high-current) end first,
warm-starting each bracket at the previous root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .circuit import (
    Device,
    gap_reluctance,
    magnet_mmf,
    magnet_reluctance,
    residual,
    residual_slope,
    shunt_field,
)
from .errors import BracketingError, ConvergenceError, KneeNotFoundError, ValidationError
from .materials import MU0


@dataclass(frozen=True)
class SolveOptions:
    """Root-finding controls.

    ``abs_tol_fg`` is the absolute tolerance on the node mmf F_g [A];
    when None it defaults to 1e-9 * max(1, F_m) for the device at hand.
    """

    abs_tol_fg: float | None = None
    max_iter: int = 200
    bracket_margin: float = 1.25
    max_bracket_expansions: int = 60

    def __post_init__(self):
        if self.abs_tol_fg is not None and not self.abs_tol_fg > 0.0:
            raise ValidationError(f"abs_tol_fg must be positive, got {self.abs_tol_fg}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.bracket_margin > 0.0:
            raise ValidationError(f"bracket_margin must be positive, got {self.bracket_margin}")
        if self.max_bracket_expansions < 0:
            raise ValidationError("max_bracket_expansions must be >= 0")


@dataclass(frozen=True)
class ShuntState:
    h_A_per_m: float
    b_T: float
    flux_Wb: float


@dataclass(frozen=True)
class OperatingPoint:
    """Solved state of the device at one drive current."""

    current_A: float
    f_g_A: float
    b_g_T: float
    flux_gap_Wb: float
    flux_magnet_Wb: float
    flux_leak_Wb: float
    shunts: tuple[ShuntState, ...]
    residual_Wb: float
    iterations: int

    @property
    def flux_sum_Wb(self) -> float:
        """Signed sum of all element fluxes; equals ``residual_Wb``."""
        return self.residual_Wb


@dataclass
class Sweep:
    """B_g(I) and kappa(I) over a current grid, stored in ascending current."""

    device: Device
    grid: np.ndarray
    points: tuple[OperatingPoint, ...]
    kappa: np.ndarray | None = None
    kappa_fd: np.ndarray | None = field(default=None, repr=False)
    kappa_method: str = "spline"
    max_kappa_discrepancy: float | None = None

    @property
    def b_g(self) -> np.ndarray:
        return np.array([p.b_g_T for p in self.points])

    @property
    def f_g(self) -> np.ndarray:
        return np.array([p.f_g_A for p in self.points])


def _drive_scale(device: Device, current_A: float) -> float:
    ni = max((sh.turns * abs(current_A) for sh in device.shunts), default=0.0)
    return max(magnet_mmf(device.magnet), ni, 1.0)


def _bracket(fun, lo: float, hi: float, expansions: int):
    """Expand [lo, hi] geometrically until the residual changes sign."""
    f_lo, f_hi = fun(lo), fun(hi)
    for _ in range(expansions + 1):
        if f_lo == 0.0:
            return lo, lo, f_lo, f_lo
        if f_hi == 0.0:
            return hi, hi, f_hi, f_hi
        if (f_lo > 0.0) != (f_hi > 0.0):
            return lo, hi, f_lo, f_hi
        lo, hi = 2.0 * lo, 2.0 * hi
        f_lo, f_hi = fun(lo), fun(hi)
    raise BracketingError(
        f"no sign change in [{lo:.6e}, {hi:.6e}]: residual ends "
        f"({f_lo:.6e}, {f_hi:.6e}) Wb"
    )


def _polish(device: Device, current_A: float, f_g: float, floor: float):
    """Newton refinement of a Brent root down to the evaluation noise floor."""
    best_fg = f_g
    best_res = residual(device, current_A, f_g)
    steps = 0
    for _ in range(4):
        if abs(best_res) <= floor:
            break
        slope = residual_slope(device, current_A, best_fg)
        trial = best_fg - best_res / slope
        res = residual(device, current_A, trial)
        steps += 1
        if abs(res) >= abs(best_res):
            break
        best_fg, best_res = trial, res
    return best_fg, steps


def solve_operating_point(
    device: Device,
    current_A: float,
    options: SolveOptions | None = None,
    _warm_start: float | None = None,
) -> OperatingPoint:
    """Solve the flux-conservation equation at one drive current.

    The root is bracketed in +-margin * max(F_m, max|N*I|), expanded
    geometrically on failure, solved with Brent's method and Newton
    polished.  The residual is strictly decreasing in F_g, so the root is
    unique.

    Raises
    ------
    BracketingError
        If no sign change is found after all bracket expansions.
    ConvergenceError
        If Brent's method hits the iteration cap.
    """
    if not math.isfinite(current_A):
        raise ValidationError(f"drive current must be finite, got {current_A}")
    opts = options or SolveOptions()
    f_m = magnet_mmf(device.magnet)
    scale = _drive_scale(device, current_A)
    xtol = opts.abs_tol_fg if opts.abs_tol_fg is not None else 1e-9 * max(1.0, f_m)

    fun = lambda fg: residual(device, current_A, fg)

    lo = hi = None
    if _warm_start is not None:
        width = max(0.05 * scale, 1e-3 * abs(_warm_start), 10.0 * xtol)
        a, b = _warm_start - width, _warm_start + width
        fa, fb = fun(a), fun(b)
        for _ in range(8):
            if (fa > 0.0) != (fb > 0.0) or fa == 0.0 or fb == 0.0:
                lo, hi, f_lo, f_hi = a, b, fa, fb
                break
            width *= 4.0
            a, b = _warm_start - width, _warm_start + width
            fa, fb = fun(a), fun(b)
    if lo is None:
        lo, hi, f_lo, f_hi = _bracket(
            fun, -opts.bracket_margin * scale, opts.bracket_margin * scale,
            opts.max_bracket_expansions,
        )

    if lo == hi:
        root, iterations = lo, 0
    else:
        try:
            root, info = brentq(
                fun, lo, hi, xtol=xtol, rtol=4.0 * np.finfo(float).eps,
                maxiter=opts.max_iter, full_output=True, disp=False,
            )
        except ValueError as exc:  # pragma: no cover - bracket already verified
            raise BracketingError(str(exc)) from exc
        if not info.converged:
            raise ConvergenceError(
                f"root finding for I = {current_A} A stopped after {info.iterations} "
                f"iterations; best F_g = {root:.9e} A"
            )
        iterations = info.iterations

    # polish to the evaluation noise floor so flux conservation holds to
    # far better than the root tolerance
    term_scale = abs(f_m) / magnet_reluctance(device.magnet) + abs(root) / gap_reluctance(device.gap)
    for sh in device.shunts:
        term_scale += abs(sh.material.b_of_h(shunt_field(sh, current_A, root))) * sh.area_m2
    floor = 8.0 * np.finfo(float).eps * max(term_scale, 1e-300)
    root, polish_steps = _polish(device, current_A, root, floor)

    return _operating_point(device, current_A, root, iterations + polish_steps)


def _operating_point(device: Device, current_A: float, f_g: float, iterations: int) -> OperatingPoint:
    states = []
    for sh in device.shunts:
        h = shunt_field(sh, current_A, f_g)
        b = sh.material.b_of_h(h)
        states.append(ShuntState(h_A_per_m=h, b_T=b, flux_Wb=b * sh.area_m2))
    flux_magnet = (magnet_mmf(device.magnet) - f_g) / magnet_reluctance(device.magnet)
    flux_leak = 0.0 if device.leakage is None else -f_g / device.leakage.reluctance_per_H
    flux_gap = -f_g / gap_reluctance(device.gap)
    total = math.fsum([s.flux_Wb for s in states] + [flux_magnet, flux_leak, flux_gap])
    return OperatingPoint(
        current_A=current_A,
        f_g_A=f_g,
        b_g_T=MU0 * abs(f_g) / device.gap.length_m,
        flux_gap_Wb=flux_gap,
        flux_magnet_Wb=flux_magnet,
        flux_leak_Wb=flux_leak,
        shunts=tuple(states),
        residual_Wb=total,
        iterations=iterations,
    )


def sweep(
    device: Device,
    start_A: float,
    stop_A: float,
    steps: int,
    options: SolveOptions | None = None,
    refine_near: float | None = None,
) -> Sweep:
    """Solve the device over a current grid, uniform by default.

    ``refine_near`` adds log-dense extra points clustered around the given
    current (typically a predicted switching current) on top of the uniform
    grid.  Solving proceeds from the end with the larger |I| (the saturated
    side) towards the other, warm-starting each bracket at the previous
    root; results are returned in ascending current regardless.  Solver
    failures are re-raised tagged with the current at which they occurred.
    """
    if steps < 2:
        raise ValidationError(f"a sweep needs at least 2 steps, got {steps}")
    grid = np.linspace(float(start_A), float(stop_A), int(steps))
    if refine_near is not None:
        span = abs(float(stop_A) - float(start_A))
        offsets = 0.1 * span * np.logspace(-3.0, 0.0, max(8, steps // 8))
        extra = np.concatenate([refine_near - offsets, [refine_near], refine_near + offsets])
        lo, hi = min(start_A, stop_A), max(start_A, stop_A)
        grid = np.concatenate([grid, extra[(extra >= lo) & (extra <= hi)]])
    grid = np.unique(grid)
    order = range(len(grid)) if abs(grid[0]) >= abs(grid[-1]) else range(len(grid) - 1, -1, -1)

    solved: dict[int, OperatingPoint] = {}
    prev_root: float | None = None
    for idx in order:
        current = float(grid[idx])
        try:
            point = solve_operating_point(device, current, options, _warm_start=prev_root)
        except (BracketingError, ConvergenceError) as exc:
            raise type(exc)(f"at I = {current} A: {exc}") from exc
        solved[idx] = point
        prev_root = point.f_g_A

    points = tuple(solved[i] for i in range(len(grid)))
    result = Sweep(device=device, grid=grid, points=points)
    if len(grid) >= 4:
        result.kappa = sensitivity(result)
        result.kappa_fd = _sensitivity_fd(result)
        result.max_kappa_discrepancy = float(np.max(np.abs(result.kappa - result.kappa_fd)))
    return result


def sensitivity(sw: Sweep) -> np.ndarray:
    """Current sensitivity kappa = dB_g/dI [T/A] on the sweep grid.

    Differentiates a monotone piecewise-cubic interpolant of B_g(I); a
    central-difference estimate is kept alongside on the Sweep for
    cross-checking (``kappa_fd`` / ``max_kappa_discrepancy``).
    """
    if len(sw.grid) < 4:
        raise ValidationError(f"sensitivity needs at least 4 grid points, got {len(sw.grid)}")
    interp = PchipInterpolator(sw.grid, sw.b_g)
    return np.asarray(interp.derivative()(sw.grid), dtype=float)


def _sensitivity_fd(sw: Sweep) -> np.ndarray:
    return np.gradient(sw.b_g, sw.grid)


def detect_knee(sw: Sweep, fraction: float = 0.01) -> float:
    """Locate the switching transition: the current where kappa has dropped
    to ``fraction`` of the ideal ramp sensitivity mu0*N/l_g.

    Takes the first grid point where kappa falls to or below the threshold
    after having exceeded it, then bisects the bracketing grid interval on
    the interpolant derivative.

    Raises
    ------
    KneeNotFoundError
        If kappa never exceeds the threshold (nothing to switch) or never
        falls back below it within the sweep.
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"fraction must be in (0, 1), got {fraction}")
    kappa = sw.kappa if sw.kappa is not None else sensitivity(sw)
    turns = max(sh.turns for sh in sw.device.shunts)
    threshold = fraction * MU0 * turns / sw.device.gap.length_m

    above = np.nonzero(kappa > threshold)[0]
    if above.size == 0:
        raise KneeNotFoundError(
            f"sensitivity never exceeds {threshold:.3e} T/A; no switching ramp in sweep"
        )
    after = np.nonzero(kappa[above[0]:] <= threshold)[0]
    if after.size == 0:
        raise KneeNotFoundError(
            f"sensitivity never falls below {threshold:.3e} T/A after the ramp; "
            "extend the sweep range"
        )
    i = int(above[0] + after[0])
    lo, hi = float(sw.grid[i - 1]), float(sw.grid[i])

    deriv = PchipInterpolator(sw.grid, sw.b_g).derivative()
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(deriv(mid)) <= threshold:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
