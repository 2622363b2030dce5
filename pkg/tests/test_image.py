import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from plsmooth.errors import DegenerateRange, DimensionMismatch
from plsmooth.image import (
    GRADIENT_NORM,
    GradientField,
    ImageBuffer,
    NormState,
    denormalize,
    denormalize_gradient,
    divergence_adjoint,
    forward_gradient,
    normalize_gradient,
    normalize_unit,
)

shapes = st.tuples(st.sampled_from([1, 3]), st.integers(1, 9), st.integers(1, 9))
unit_images = shapes.flatmap(lambda s: arrays(np.float64, s, elements=st.floats(0, 1)))


def test_buffer_rejects_bad_input():
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((2, 3, 3)))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((1, 0, 3)))
    with pytest.raises(ValueError):
        ImageBuffer(np.full((1, 2, 2), np.nan))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((1, 2, 2)), (1.0, 1.0))


def test_from_array_layouts():
    img = ImageBuffer.from_array(np.arange(6.0).reshape(2, 3))
    assert img.shape == (1, 2, 3)
    rgb = ImageBuffer.from_array(np.zeros((2, 3, 3)))
    assert (rgb.channels, rgb.height, rgb.width) == (3, 2, 3)
    np.testing.assert_array_equal(rgb.hwc(), np.zeros((2, 3, 3)))


def test_gradient_of_constant_is_zero():
    g = forward_gradient(ImageBuffer(np.full((3, 4, 5), 0.3)))
    assert not g.gx.data.any() and not g.gy.data.any()


def test_gradient_of_ramp():
    ramp = np.tile(np.arange(5) / 4.0, (3, 1))[None]
    g = forward_gradient(ImageBuffer(ramp))
    np.testing.assert_allclose(g.gx.data[..., :4], 0.25)
    assert not g.gx.data[..., 4].any()
    assert not g.gy.data.any()


def test_gradient_matches_direct_difference(rng):
    u = rng.random((1, 4, 4))
    g = forward_gradient(ImageBuffer(u))
    for y in range(4):
        for x in range(4):
            ex = u[0, y, x + 1] - u[0, y, x] if x < 3 else 0.0
            ey = u[0, y + 1, x] - u[0, y, x] if y < 3 else 0.0
            assert g.gx.data[0, y, x] == ex
            assert g.gy.data[0, y, x] == ey


@given(unit_images)
def test_gradient_of_unit_image_is_bounded(data):
    g = forward_gradient(ImageBuffer(data))
    assert np.all(np.abs(g.gx.data) <= 1) and np.all(np.abs(g.gy.data) <= 1)
    assert not g.gx.data[..., -1].any() and not g.gy.data[..., -1, :].any()


unit_pairs = shapes.flatmap(lambda s: st.tuples(arrays(np.float64, s, elements=st.floats(0, 1)),
                                                 arrays(np.float64, s, elements=st.floats(0, 1))))


@given(unit_pairs, st.floats(-3, 3), st.floats(-3, 3))
def test_gradient_is_linear(pair, a, b):
    u, v = pair
    lhs = forward_gradient(ImageBuffer(a * u + b * v))
    gu, gv = forward_gradient(ImageBuffer(u)), forward_gradient(ImageBuffer(v))
    np.testing.assert_allclose(lhs.gx.data, a * gu.gx.data + b * gv.gx.data, atol=1e-12)
    np.testing.assert_allclose(lhs.gy.data, a * gu.gy.data + b * gv.gy.data, atol=1e-12)


def _field(gx, gy):
    return GradientField(ImageBuffer(gx, (-1, 1)), ImageBuffer(gy, (-1, 1)))


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 3]), st.integers(1, 8), st.integers(1, 8))
def test_adjoint_identity(seed, c, h, w):
    r = np.random.default_rng(seed)
    u = r.standard_normal((c, h, w))
    g = _field(r.standard_normal((c, h, w)), r.standard_normal((c, h, w))).zero_boundary()
    fu = forward_gradient(ImageBuffer(u))
    lhs = np.sum(fu.gx.data * g.gx.data) + np.sum(fu.gy.data * g.gy.data)
    rhs = np.sum(u * divergence_adjoint(g).data)
    norm_g = np.sqrt(np.sum(g.gx.data**2) + np.sum(g.gy.data**2))
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(u) * norm_g + 1e-300


def test_adjoint_on_6x6(rng):
    u = rng.random((1, 6, 6))
    g = _field(rng.random((1, 6, 6)), rng.random((1, 6, 6))).zero_boundary()
    fu = forward_gradient(ImageBuffer(u))
    lhs = np.sum(fu.gx.data * g.gx.data) + np.sum(fu.gy.data * g.gy.data)
    rhs = np.sum(u * divergence_adjoint(g).data)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_adjoint_impulse_and_zero():
    z = np.zeros((1, 4, 4))
    assert not divergence_adjoint(_field(z, z)).data.any()
    gx = z.copy()
    gx[0, 1, 1] = 1.0
    out = divergence_adjoint(_field(gx, z)).data[0]
    # gx[y=1, x=1] = u[1, 2] - u[1, 1]: the adjoint puts -1 on (x=1) and +1 on (x=2).
    assert out[1, 1] == -1.0 and out[1, 2] == 1.0
    assert np.count_nonzero(out) == 2


def test_normalize_examples():
    img, st_ = normalize_unit(ImageBuffer(np.full((1, 1, 1), 51.0), (0.0, 255.0)))
    assert img.data[0, 0, 0] == pytest.approx(0.2)
    back = denormalize(ImageBuffer(np.full((1, 1, 1), 0.2)), st_)
    assert back.data[0, 0, 0] == pytest.approx(51.0)
    zero = ImageBuffer(np.zeros((1, 2, 2)), (-1, 1))
    n = normalize_gradient(GradientField(zero, zero))
    assert np.all(n.gx.data == 0.5)
    mid = ImageBuffer(np.full((1, 2, 2), 0.5))
    assert np.all(denormalize_gradient(GradientField(mid, mid)).gy.data == 0.0)
    assert GRADIENT_NORM == NormState(2.0, -1.0)


def test_normalize_rejects_collapsed_range():
    with pytest.raises(DegenerateRange):
        normalize_unit(ImageBuffer(np.zeros((1, 1, 1)), (0.0, 1e-13)))
    with pytest.raises(ValueError):
        NormState(0.0, 1.0)


@given(arrays(np.float64, (1, 3, 4), elements=st.floats(-1e3, 1e3)), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_normalize_round_trip(data, lo, span):
    img = ImageBuffer(data, (lo, lo + span))
    n, st_ = normalize_unit(img)
    back = denormalize(n, st_)
    np.testing.assert_allclose(back.data, data, atol=1e-12 * max(1.0, np.abs(data).max(), abs(lo) + span))


def test_shape_mismatch_detected():
    a = ImageBuffer(np.zeros((1, 2, 2)))
    b = ImageBuffer(np.zeros((1, 2, 3)))
    with pytest.raises(DimensionMismatch):
        GradientField(a, b)
