"""Shared builders for the test suite."""

import math

import numpy as np
import pytest

from sersim import (
    AirGap,
    Device,
    LeakagePath,
    MagnetElement,
    ShuntElement,
    calibrate_saturating_material,
    make_linear_material,
    make_saturating_material,
    mumetal_like,
)

SHUNT_AREA = math.pi * 1e-6  # 1 mm radius


def example_device(material=None, leakage=None, turns=30, sol_area_2=None):
    """The bundled two-shunt geometry: 4 mm shunts/magnet, 0.2 mm gap."""
    mat = material or mumetal_like()
    common = dict(radius_m=1e-3, length_m=4e-3, turns=turns, material=mat)
    s1 = ShuntElement.cylinder(orientation=-1, **common)
    s2 = ShuntElement.cylinder(orientation=1, solenoid_area_m2=sol_area_2, **common)
    return Device(
        magnet=MagnetElement.cylinder(radius_m=1e-3, length_m=4e-3, remanence_T=1.0, recoil_mu_r=1.05),
        gap=AirGap(length_m=0.2e-3, area_m2=4e-6),
        shunts=(s1, s2),
        leakage=LeakagePath(leakage) if leakage else None,
    )


def random_material(rng: np.random.Generator):
    kind = rng.integers(0, 3)
    if kind == 0:
        return make_linear_material(float(10 ** rng.uniform(1, 5)))
    if kind == 1:
        mu_i_rel = float(10 ** rng.uniform(1.5, 4.5))
        j_s = float(rng.uniform(0.3, 2.3))
        return make_saturating_material(mu_i_rel * 4e-7 * math.pi, j_s)
    return calibrate_saturating_material(float(10 ** rng.uniform(2.5, 5.5)), float(rng.uniform(0.5, 2.3)))


def random_saturating_material(rng: np.random.Generator):
    mu_i_rel = float(10 ** rng.uniform(2.0, 4.5))
    j_s = float(rng.uniform(0.3, 2.3))
    return make_saturating_material(mu_i_rel * 4e-7 * math.pi, j_s)


def random_device(rng: np.random.Generator, *, identical_shunts=True, n_shunts=2,
                  allow_leakage=True):
    """Well-posed random device with saturating shunt materials."""
    magnet = MagnetElement.cylinder(
        radius_m=float(rng.uniform(0.5e-3, 2e-3)),
        length_m=float(rng.uniform(1e-3, 10e-3)),
        remanence_T=float(rng.uniform(0.1, 1.4)),
        recoil_mu_r=float(rng.uniform(1.0, 1.1)),
    )
    mat = random_saturating_material(rng)
    base = dict(
        radius_m=float(rng.uniform(0.5e-3, 2e-3)),
        length_m=float(rng.uniform(1e-3, 10e-3)),
        turns=int(rng.integers(5, 100)),
    )
    # gap chosen so the shunt-over-gap reluctance condition holds with margin,
    # as in any sensible switch design
    shunt_ratio = base["length_m"] / (math.pi * base["radius_m"] ** 2)
    gap_length = float(rng.uniform(0.05e-3, 0.5e-3))
    margin = float(rng.uniform(4.0, 50.0))
    gap = AirGap(length_m=gap_length, area_m2=gap_length * margin / shunt_ratio)
    shunts = []
    for k in range(n_shunts):
        params = dict(base)
        if not identical_shunts:
            params["radius_m"] *= float(rng.uniform(0.8, 1.2))
            params["length_m"] *= float(rng.uniform(0.8, 1.2))
        shunts.append(ShuntElement.cylinder(
            orientation=-1 if k % 2 == 0 else 1, material=mat, **params))
    leakage = None
    if allow_leakage and rng.random() < 0.5:
        leakage = LeakagePath(float(10 ** rng.uniform(6, 9)))
    return Device(magnet=magnet, gap=gap, shunts=tuple(shunts), leakage=leakage)


@pytest.fixture
def table1():
    return example_device()
