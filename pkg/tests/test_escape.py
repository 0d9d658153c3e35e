import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from escape_lab.criteria import Disc
from escape_lab.errors import LadderOverflow, ValidationError
from escape_lab.escape import (GridSpec, PixelClass, classify_bd, classify_fast, classify_grid,
                               iterated_max_ladder, julia_boundary)
from escape_lab.functions import FunctionSpec, iterate_orbit

pytestmark = pytest.mark.filterwarnings("ignore::escape_lab.errors.LadderOverflow")


def single(center, **kw):
    return GridSpec(center, 1e-3, 1e-3, 1, 1, **kw)


@pytest.fixture(scope="module")
def exp02():
    return FunctionSpec.scaled_exp(0.2)


@pytest.fixture(scope="module")
def exp02_big(exp02):
    """The 512^2 grid over [-2, 4] x [-3, 3]."""
    g = GridSpec.from_bounds(-2, 4, -3, 3, 512, 512, max_iter=32)
    grid = classify_grid(exp02, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LadderOverflow)
        classify_fast(exp02, grid, math.log(2), 3)
        classify_bd(exp02, grid, Disc(0.5, 0.25))
    return grid


# -- grid spec ------------------------------------------------------------------

def test_grid_spec_validation():
    with pytest.raises(ValidationError):
        GridSpec(0, 1, 1, 4, 4, bailout=100.0)
    with pytest.raises(ValidationError):
        GridSpec(0, 1, 1, 2048, 2048, pixel_budget=1000)
    with pytest.raises(ValidationError):
        GridSpec(0, -1, 1, 4, 4)
    with pytest.raises(ValidationError):
        GridSpec(0, 1, 1, 4, 4, confirm_steps=0)


def test_grid_pixel_centres():
    g = GridSpec.from_bounds(0, 4, -1, 1, 4, 2)
    assert np.allclose(g.xs(), [0.5, 1.5, 2.5, 3.5])
    assert np.allclose(g.ys(), [0.5, -0.5])
    assert GridSpec.from_dict(g.to_dict()) == g


# -- classification -------------------------------------------------------------

def test_exp_strip_all_escaping(ex):
    g = GridSpec.from_bounds(0.5, 1.5, -0.1, 0.1, 48, 12)
    grid = classify_grid(ex, g)
    assert grid.counts()["escaping"] == 48 * 12
    assert np.all(grid.steps <= g.max_iter)


def test_exp_fixed_point_bounded(exp02):
    grid = classify_grid(exp02, single(0))
    assert grid.classes[0, 0] == PixelClass.BOUNDED
    orb = iterate_orbit(exp02, 0, 200, 1e6)
    assert orb.points[-1] == pytest.approx(0.2592, abs=1e-4)


def test_fatou_baker_escapes(fb):
    g = single(10, bailout=1e3, max_iter=1024)
    grid = classify_grid(fb, g)
    assert grid.classes[0, 0] == PixelClass.ESCAPING
    assert grid.steps[0, 0] <= 1e3 - 10


def test_escape_step_matches_orbit(ex):
    grid = classify_grid(ex, single(1.0))
    orb = iterate_orbit(ex, 1.0, 10, 1e6)
    assert grid.steps[0, 0] == orb.exit_step == 3


def test_undetermined_is_possible(fb):
    # slow real drift: never exceeds bailout, never returns below its root
    g = single(2000.0, bailout=1e6, max_iter=8)
    grid = classify_grid(fb, g)
    assert grid.classes[0, 0] == PixelClass.UNDETERMINED


def test_overflow_counts_as_escape(ex):
    # f(700) = e^700 is past the saturation threshold: the orbit stops there
    grid = classify_grid(ex, single(700.0))
    assert grid.classes[0, 0] == PixelClass.ESCAPING and grid.steps[0, 0] == 1
    assert len(grid.orbit_logs[0]) == 2


def test_monotone_in_max_iter(exp02):
    g1 = GridSpec.from_bounds(-2, 4, -3, 3, 48, 48, max_iter=16)
    g2 = GridSpec.from_bounds(-2, 4, -3, 3, 48, 48, max_iter=32)
    a, b = classify_grid(exp02, g1), classify_grid(exp02, g2)
    esc = a.escaping
    assert np.all(b.escaping[esc])
    assert np.array_equal(a.steps[esc], b.steps[esc])


def test_determinism_across_workers(cp):
    g = GridSpec.from_bounds(-40, 40, -40, 40, 40, 40, max_iter=24)
    ref = classify_grid(cp, g)
    for n in (1, 8):
        with ThreadPoolExecutor(n) as pool:
            got = classify_grid(cp, g, pool)
        assert np.array_equal(got.classes, ref.classes)
        assert np.array_equal(got.steps, ref.steps)
        assert got.orbit_logs.keys() == ref.orbit_logs.keys()
        assert all(np.array_equal(got.orbit_logs[k], ref.orbit_logs[k]) for k in ref.orbit_logs)


# -- fast and B_D masks ---------------------------------------------------------

def test_fast_exp_pixel_at_5(ex):
    grid = classify_grid(ex, single(5.0))
    with pytest.warns(LadderOverflow):
        mask = classify_fast(ex, grid, 0.0, 1)
    assert mask[0, 0]
    ladder = grid.meta["fast"]["ladder"]
    hand = [0.0, 1.0, math.e, math.exp(math.e)]
    assert np.allclose(ladder[:4], hand)
    orbit = [math.log(5), 5.0, math.exp(5), math.exp(math.exp(5))]
    assert np.allclose(grid.orbit_logs[0], orbit, rtol=1e-12)
    assert all(orbit[n + 1] > hand[n] for n in range(3))


def test_bounded_never_fast(exp02):
    grid = classify_grid(exp02, single(0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LadderOverflow)
        assert not classify_fast(exp02, grid, 0.0, 3)[0, 0]


def test_bd_product_far_pixel(cp):
    grid = classify_grid(cp, single(1e4))
    classify_fast(cp, grid, math.log(2.0), 3)
    mask = classify_bd(cp, grid, Disc(-1.5, 0.1))
    assert mask[0, 0]
    # oracle for the first ladder entry: log M(1.6) by direct summation
    n = np.arange(1, 10 ** 5, dtype=float)
    assert grid.meta["bd"]["ladder"][1] == pytest.approx(float(np.sum(np.log1p(1.6 / n ** 4))), abs=1e-6)
    assert grid.orbit_logs[0][1] > grid.meta["bd"]["ladder"][1]


def test_bd_pixel_inside_disc(cp):
    grid = classify_grid(cp, single(-1.5))
    classify_fast(cp, grid, math.log(2.0), 3)
    assert not classify_bd(cp, grid, Disc(-1.5, 0.1))[0, 0]


def test_bd_include_n0_is_stricter(cp):
    g = GridSpec.from_bounds(0.5, 3.0, -0.5, 0.5, 12, 4, max_iter=16)
    grid = classify_grid(cp, g)
    classify_fast(cp, grid, math.log(2.0), 3)
    loose = classify_bd(cp, grid, Disc(-1.5, 2.0)).copy()
    strict = classify_bd(cp, grid, Disc(-1.5, 2.0), include_n0=True)
    assert np.all(loose[strict])


def test_mask_function_mismatch(cp, ex):
    grid = classify_grid(cp, single(3.0))
    with pytest.raises(ValidationError):
        classify_fast(ex, grid, 0.0, 1)


def test_ladder_overflow_flag(ex):
    with pytest.warns(LadderOverflow):
        lad = iterated_max_ladder(ex, 0.0, 10)
    assert len(lad) < 11


@pytest.mark.parametrize("kind", ["cp", "qc", "ex"])
def test_inclusion_chain(request, kind):
    f = request.getfixturevalue(kind)
    g = GridSpec.from_bounds(-30, 60, -30, 30, 36, 24, max_iter=24)
    grid = classify_grid(f, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LadderOverflow)
        classify_fast(f, grid, math.log(3.0), 3)
        classify_bd(f, grid, Disc(-1.5, 0.1))
    assert grid.inclusion_violations() == (0, 0)


def test_large_exp_grid_inclusion(exp02_big):
    assert exp02_big.inclusion_violations() == (0, 0)
    assert exp02_big.fast_mask.any()


# -- Julia boundary -------------------------------------------------------------

def test_boundary_all_escaping():
    assert not julia_boundary(np.ones((8, 8), bool)).any()


def test_boundary_half_plane():
    mask = np.zeros((10, 12), bool)
    mask[:, 5:] = True
    b = julia_boundary(mask)
    assert b[:, 5].all() and b.sum() == 10
    both = julia_boundary(mask, side="both")
    assert both[:, 4].all() and both.sum() == 20


def test_boundary_large_exp_grid(exp02_big):
    b = julia_boundary(exp02_big)
    esc = exp02_big.escaping
    assert b.any()
    # recount oracle: every marked pixel has a 4-neighbour of the other class
    ny, nx = esc.shape
    for y, x in zip(*np.nonzero(b)):
        nbrs = [esc[y + dy, x + dx] for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0))
                if 0 <= y + dy < ny and 0 <= x + dx < nx]
        assert esc[y, x] and not all(nbrs)
