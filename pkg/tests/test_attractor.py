import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_interval_pc, random_planar_pc
from pclab.attractor import (
    PeriodicityCertificate,
    Undecided,
    certify,
    cover_radius,
    extract_orbits,
    find_cycles,
    minimal_period,
    omega_cover,
    transition_map,
    verify_certificate,
)
from pclab.errors import ResourceExceeded
from pclab.families import contracted_rotation, rotation_number
from pclab.pwc import IntervalPC
from pclab.symbolic import enumerate_itineraries

ROT = contracted_rotation(0.5, 0.8)


def _near_irrational_b(lam=0.5):
    target = (math.sqrt(5) - 1) / 2
    lo, hi = 0.5, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if rotation_number(lam, mid, horizon=20_000).value < target:
            lo = mid
        else:
            hi = mid
    return lo


def test_cover_radius_example():
    assert cover_radius(ROT, 4) == pytest.approx(0.125)


def test_cover_radius_halves_per_depth():
    for n in range(1, 10):
        assert cover_radius(ROT, n + 1) == pytest.approx(cover_radius(ROT, n) / 2)


def test_single_branch_cover_converges():
    f = IntervalPC([0.5], [0.25])
    cov = omega_cover(f, [0.0], 20)
    assert cov.centers.shape == (1, 1)
    assert cov.centers[0, 0] == pytest.approx(0.5, abs=1e-6)


def test_single_branch_certifies_at_depth_one():
    f = IntervalPC([0.5], [0.25], include_boundary=False)
    cert = certify(f, schedule=[1])
    assert isinstance(cert, PeriodicityCertificate) and cert.depth == 1
    assert cert.orbits[0].points[0, 0] == pytest.approx(0.5)
    # the global fixed point of a single homothety
    g = IntervalPC([0.3], [0.2])
    cert = certify(g)
    assert cert.orbits[0].points[0, 0] == pytest.approx(0.2 / 0.7)


def test_rotation_certificate():
    cert = certify(ROT)
    assert isinstance(cert, PeriodicityCertificate)
    assert cert.depth == 4
    assert cert.periods == [2]
    pts = sorted(cert.orbits[0].points[:, 0])
    assert pts == pytest.approx([4 / 15, 14 / 15], abs=1e-9)
    assert all(len(c) == 2 for c in cert.cycles)
    assert verify_certificate(ROT, cert)


def test_rotation_orbit_matches_iteration():
    cert = certify(ROT)
    x = ROT.orbit(0.123, 10_000)[-2:]
    assert sorted(x) == pytest.approx(sorted(cert.orbits[0].points[:, 0]), abs=1e-9)


def test_transition_identity_for_single_branch():
    f = IntervalPC([0.5], [0.25])
    coll = enumerate_itineraries(f, 3)
    assert transition_map(f, coll) == {(1, 1, 1): (1, 1, 1)}


def test_near_irrational_rotation_undecided():
    f = contracted_rotation(0.5, _near_irrational_b())
    res = certify(f)
    assert isinstance(res, Undecided)
    gaps = [abs(eps - r) for _, eps, r in res.tested]
    assert gaps[-1] < 1e-9 and gaps[-1] < gaps[0]


def test_resource_cap():
    with pytest.raises(ResourceExceeded):
        certify(contracted_rotation(0.5, _near_irrational_b()), cap=5)


def test_find_cycles():
    trans = {"a": "b", "b": "a", "c": "a", "d": "d"}
    assert sorted(map(tuple, find_cycles(trans))) == [("a", "b"), ("d",)]


def test_minimal_period():
    cert = certify(ROT)
    x = cert.orbits[0].points[0]
    assert minimal_period(ROT, x, 6) == 2


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_certificate_soundness_1d(seed, N):
    rng = np.random.default_rng(seed)
    f = random_interval_pc(rng, N)
    cert = certify(f, schedule=[4, 8, 16])
    if not isinstance(cert, PeriodicityCertificate):
        return
    assert verify_certificate(f, cert)
    coll = enumerate_itineraries(f, cert.depth)
    cover = omega_cover(f, cert.base_point, cert.depth, coll)
    for x0 in rng.uniform(0, 1, 5):
        tail = f.orbit(float(x0), 300)[-50:]
        assert np.all(cover.covers(tail[:, None]))
    for orb in cert.orbits:
        assert np.all(f.dist_to_singular_many(orb.points[:, 0]) > 0)
        # minimality: no proper divisor period
        x = orb.points[0, 0]
        for q in range(1, orb.period):
            assert abs(f.orbit(x, q)[-1] - x) > 1e-10
        assert abs(f.orbit(x, orb.period)[-1] - x) <= 1e-10


def test_planar_certificate():
    rng = np.random.default_rng(11)
    done = 0
    for _ in range(10):
        f = random_planar_pc(rng, 2)
        cert = certify(f, schedule=[4, 8, 16])
        if not isinstance(cert, PeriodicityCertificate):
            continue
        done += 1
        assert verify_certificate(f, cert)
        cycles, orbits = extract_orbits(f, cert.transition, enumerate_itineraries(f, cert.depth))
        for orb in orbits:
            y = orb.points[0]
            for _ in range(orb.period):
                y = f.step(y)
            np.testing.assert_allclose(y, orb.points[0], atol=1e-10)
    assert done >= 5
