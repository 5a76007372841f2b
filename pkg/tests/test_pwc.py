import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import UNIT_SQUARE
from pclab.errors import ConfigurationError, OutsideDomain, SingularPoint
from pclab.families import contracted_rotation
from pclab.ifs import AffineContraction
from pclab.pwc import FailedAt, HyperplanePC, IntervalPC, Regular, Singular

ETA = 1e-9


def one_line(offset=0.5, eta=ETA):
    br = {(-1,): AffineContraction.homothety(0.3, [0.2, 0.3]), (1,): AffineContraction.homothety(0.3, [0.5, 0.4])}
    return HyperplanePC(UNIT_SQUARE, [[1.0, 0.0]], [offset], br, eta)


def two_lines():
    br = {lab: AffineContraction.homothety(0.3, [0.3, 0.3]) for lab in [(-1, -1), (-1, 1), (1, -1), (1, 1)]}
    return HyperplanePC(UNIT_SQUARE, [[1.0, 0.0], [0.0, 1.0]], [0.3, 0.7], br, ETA)


def test_hyperplane_label():
    assert one_line().label([0.7, 0.2]) == Regular((1,))


def test_on_hyperplane_takes_negative_side():
    assert one_line(eta=0.0).sigma([0.5, 0.2]) == (-1,)


def test_eta_band_sweep():
    f = IntervalPC([0.5, 0.5], [0.1, 0.4], [0.4])
    for k in range(-10, 11):
        x = 0.4 + k * ETA
        lab = f.label(x)
        if abs(x - 0.4) <= ETA:
            assert isinstance(lab, Singular)
        else:
            assert lab == Regular(1 if x < 0.4 else 2)


def test_outside_domain():
    with pytest.raises(OutsideDomain):
        one_line().label([1.5, 0.2])


def test_rotation_steps():
    f = contracted_rotation(0.5, 0.8)
    assert f.step(0.0) == pytest.approx(0.8)
    assert f.step(0.8) == pytest.approx(0.2)


def test_step_on_breakpoint():
    f = contracted_rotation(0.5, 0.8)
    with pytest.raises(SingularPoint):
        f.step(0.4)
    # either side convention lands on the identified endpoints 0 ~ 1
    assert min(abs(f.step(0.4, total=True)), abs(f.step(0.4, total=True) - 1.0)) < 1e-12


def test_single_branch_constant_word():
    f = IntervalPC([0.5], [0.25])
    assert f.itinerary(0.9, 5) == (1,) * 5


def test_rotation_alternating_word():
    f = contracted_rotation(0.5, 0.8)
    assert f.itinerary(4 / 15, 4) == (1, 2, 1, 2)


def test_itinerary_failed_at_breakpoint():
    f = IntervalPC([0.5, 0.5], [0.1, 0.4], [0.4], eta=0.0)
    assert f.itinerary(0.4, 3) == FailedAt(0)


def test_itinerary_failed_later():
    f = IntervalPC([0.5, 0.5], [0.3, 0.1], [0.4], eta=1e-12)
    assert f.itinerary(0.2, 3) == FailedAt(1)  # 0.2 maps onto the breakpoint


def test_dist_to_singular_examples():
    f = IntervalPC([0.5, 0.5], [0.1, 0.4], [0.4])
    assert f.dist_to_singular(0.55) == pytest.approx(0.15)
    assert one_line(eta=0.0).dist_to_singular([0.5, 0.3]) == 0.0
    assert two_lines().dist_to_singular([0.5, 0.5]) == pytest.approx(0.2)


def test_boundary_flag():
    f = IntervalPC([0.5, 0.5], [0.1, 0.4], [0.4])
    assert f.dist_to_singular(0.95) == pytest.approx(0.05)
    g = IntervalPC([0.5, 0.5], [0.1, 0.4], [0.4], include_boundary=False)
    assert g.dist_to_singular(0.95) == pytest.approx(0.55)


def test_invalid_construction():
    with pytest.raises(ConfigurationError):
        IntervalPC([0.5, 0.5], [0.1, 0.4], [0.6, 0.2, 0.3])
    with pytest.raises(ConfigurationError):
        IntervalPC([0.5], [0.8])  # image leaves (0, 1)


@given(st.floats(0.0, 1.0))
def test_partition_labels_exclusive(x):
    f = IntervalPC([0.3, -0.4, 0.2], [0.1, 0.9, 0.5], [0.3, 0.7])
    lab = f.label(x)
    if isinstance(lab, Regular):
        lo, hi = f.grid[lab.label - 1], f.grid[lab.label]
        assert lo < x < hi
        assert f.dist_to_singular(x) > ETA


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_step_stays_in_space(x, y):
    f = one_line(0.4)
    z = f.step([x, y], total=True)
    assert UNIT_SQUARE.contains(z)


@given(st.floats(0.0, 1.0), st.integers(1, 12))
def test_itinerary_shift(x, n):
    f = IntervalPC([0.3, -0.4, 0.2], [0.1, 0.9, 0.5], [0.3, 0.7])
    w = f.itinerary(x, n + 1)
    if isinstance(w, tuple):
        assert f.itinerary(f.step(x), n) == w[1:]


def test_step_many_matches_step():
    f = contracted_rotation(0.5, 0.8)
    xs = np.random.default_rng(0).uniform(0, 1, 200)
    np.testing.assert_allclose(f.step_many(xs), [f.step(x, total=True) for x in xs])
    g = two_lines()
    pts = np.random.default_rng(1).uniform(0, 1, (50, 2))
    np.testing.assert_allclose(g.step_many(pts), [g.step(p, total=True) for p in pts])
