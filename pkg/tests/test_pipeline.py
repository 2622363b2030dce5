import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plsmooth.errors import DimensionMismatch, NonPositiveLuminance
from plsmooth.filters import L0, Bilateral, DomainTransformNC, Guided, WeightedMedian, bilateral
from plsmooth.image import ImageBuffer, forward_gradient, normalize_gradient
from plsmooth.pipeline import (
    PipelineConfig,
    ReversalReport,
    ToneMapConfig,
    compress_log_luminance,
    detail_enhance,
    fig2_signal,
    filter_gradients,
    flash_noflash,
    gradient_reversal_count,
    pc_smooth,
    pc_smooth_then_reconstruct,
    pl_smooth,
    tone_map,
)
from plsmooth.studies import DETAIL_PAIRS, psnr

PRESET_PL = [pair[1] for pair in DETAIL_PAIRS.values()]
ALL_SPECS = PRESET_PL + [Guided(4, 1e-4)]


def img(a):
    return ImageBuffer(np.asarray(a, dtype=float))


def scene(n=96):
    """Smooth shading, a soft disc and a sharp rectangle."""
    y, x = np.mgrid[0:n, 0:n].astype(float)
    out = 0.25 + 0.3 * x / (n - 1)
    out += 0.25 / (1 + np.exp((np.hypot(x - n * 0.35, y - n * 0.4) - n * 0.2) / 1.0))
    out += 0.15 * ((y > n * 0.7) & (x > n * 0.5))
    return out


def test_pc_smooth_dispatch_identity(rng):
    src = img(rng.random((1, 10, 10)))
    np.testing.assert_array_equal(pc_smooth(src, Bilateral(2, 0.1)).data, bilateral(src, None, 2, 0.1).data)
    const = img(np.full((3, 6, 6), 0.4))
    assert np.max(np.abs(pc_smooth(const, Bilateral(2, 0.1)).data - 0.4)) < 1e-12


def test_pc_bilateral_reverses_at_k5():
    sig = fig2_signal()
    enhanced = detail_enhance(sig, pc_smooth(sig, Bilateral(16, 0.1)), 5)
    assert gradient_reversal_count(sig, enhanced).reversal_count >= 1


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: type(s).__name__)
@pytest.mark.parametrize("beta", [1.0, 16.0, 256.0])
def test_pl_constant_is_fixed(spec, beta):
    const = img(np.full((3, 12, 10), 0.6))
    assert np.max(np.abs(pl_smooth(const, PipelineConfig(filter=spec, beta=beta)).data - 0.6)) < 1e-9


def test_pl_ramp_example():
    ramp = img(np.tile(np.arange(40) / 39.0, (24, 1))[None])
    out = pl_smooth(ramp, PipelineConfig(filter=Bilateral(4, 0.025), beta=16))
    assert np.max(np.abs(out.data - ramp.data)) < 1e-3


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: type(s).__name__)
@given(a=st.floats(-0.45, 0.45), b=st.floats(-0.45, 0.45), h=st.integers(2, 20), w=st.integers(2, 20))
def test_pl_keeps_planes(spec, a, b, h, w):
    y, x = np.mgrid[0:h, 0:w].astype(float)
    plane = 0.5 + a * (x / (w - 1) - 0.5) + b * (y / (h - 1) - 0.5)
    i0 = img(plane[None])
    out = pl_smooth(i0, PipelineConfig(filter=spec, beta=16))
    assert np.max(np.abs(out.data - i0.data)) < 1e-3


def test_filter_gradients_zero_boundary(rng):
    g = filter_gradients(img(rng.random((3, 7, 9))), Bilateral(2, 0.1))
    assert not g.gx.data[..., -1].any() and not g.gy.data[..., -1, :].any()


def test_fig2_signal_structure():
    sig = fig2_signal()
    y = sig.data[0, 0]
    assert sig.shape == (1, 1, 512)
    assert y.min() >= 0 and y.max() <= 1
    assert np.all(y[:64] == y[0])
    # The 0.4 step spans four pixels.
    assert np.max(y[4:] - y[:-4]) >= 0.4
    np.testing.assert_array_equal(fig2_signal().data, sig.data)


@pytest.mark.parametrize("name", list(DETAIL_PAIRS))
def test_keystone_per_filter(name):
    sig = fig2_signal()
    pc_spec, pl_spec = DETAIL_PAIRS[name]
    count = lambda s: gradient_reversal_count(sig, detail_enhance(sig, s, 2), 0.01).reversal_count
    assert count(pl_smooth(sig, PipelineConfig(filter=pl_spec, beta=16))) == 0
    assert count(pc_smooth(sig, pc_spec)) >= 1
    if name != "dt":
        assert count(pc_smooth_then_reconstruct(sig, pc_spec, 16)) >= 1


def test_control_arm_limits():
    const = img(np.full((1, 8, 8), 0.3))
    assert np.max(np.abs(pc_smooth_then_reconstruct(const, Bilateral(4, 0.1)).data - 0.3)) < 1e-12
    sig = fig2_signal()
    pc = forward_gradient(pc_smooth(sig, Bilateral(16, 0.1)))
    ctrl = forward_gradient(pc_smooth_then_reconstruct(sig, Bilateral(16, 0.1), 1e6))
    assert np.max(np.abs(pc.gx.data - ctrl.gx.data)) < 1e-3


def test_detail_enhance_rules(rng):
    i0, s = img(rng.random((3, 5, 5))), img(rng.random((3, 5, 5)))
    np.testing.assert_array_equal(detail_enhance(i0, s, 0).data, i0.data)
    np.testing.assert_array_equal(detail_enhance(i0, i0, 7).data, i0.data)
    np.testing.assert_array_equal(detail_enhance(i0, s, 5).data, i0.data + 5 * (i0.data - s.data))
    np.testing.assert_allclose(detail_enhance(i0, s, 1).data - i0.data, i0.data - s.data, atol=1e-15)
    k3 = detail_enhance(i0, s, 3).data - i0.data
    np.testing.assert_allclose(k3, 3 * (detail_enhance(i0, s, 1).data - i0.data), atol=1e-14)
    with pytest.raises(DimensionMismatch):
        detail_enhance(i0, img(np.zeros((3, 5, 4))), 1)


def test_reversal_count_examples():
    ramp = img((np.arange(10) * 0.1)[None, None, :] / 1.0 * 0.1)
    assert gradient_reversal_count(ramp, ramp).reversal_count == 0
    base = img((np.arange(10) * 0.1)[None, None, :])
    flipped = base.data.copy()
    flipped[0, 0, 5:] -= 0.15
    rep = gradient_reversal_count(base, img(flipped), 0.01)
    assert rep.reversal_count == 1 and rep.reversal_positions == [("x", 0, 0, 4)]
    mono = img(np.sort(np.random.default_rng(0).random(30))[None, None, :])
    mono2 = img(np.sort(np.random.default_rng(1).random(30))[None, None, :])
    assert gradient_reversal_count(mono, mono2, 0.0).reversal_count == 0
    with pytest.raises(ValueError):
        ReversalReport(2, [("x", 0, 0, 0)], 0.01)
    with pytest.raises(DimensionMismatch):
        gradient_reversal_count(base, img(np.zeros((1, 1, 9))))


# -- tone mapping ---------------------------------------------------------------

def test_tone_map_constant_luminance():
    hdr = img(np.full((3, 16, 16), 42.0))
    out = tone_map(hdr)
    assert np.ptp(out.data) == 0


@given(st.integers(0, 2**32 - 1))
def test_tone_map_range(seed):
    hdr = img(np.random.default_rng(seed).lognormal(0, 2, (3, 12, 12)))
    out = tone_map(hdr, PipelineConfig(filter=Bilateral(4, 0.03), beta=64))
    assert out.data.min() >= 0 and out.data.max() <= 1


def test_tone_map_two_region_detail():
    h, w = 32, 96
    y, x = np.mgrid[0:h, 0:w].astype(float)
    base = np.where(x < w / 2, 1.0, 1000.0)
    detail = 0.05 * np.sin(2 * np.pi * x / 8) * np.sin(2 * np.pi * y / 8)
    hdr = img(np.repeat((base * 10**detail)[None], 3, 0))
    _, log_out = compress_log_luminance(hdr, PipelineConfig(filter=Bilateral(16, 0.03), beta=64))
    amps = []
    for sl in (slice(4, w // 2 - 12), slice(w // 2 + 12, w - 4)):
        region = log_out[4:-4, sl]
        amps.append(np.std(region - region.mean()) / np.std(detail[4:-4, sl]))
    assert abs(amps[0] - amps[1]) <= 0.1 * max(amps)
    assert min(amps) >= 0.9


def test_tone_map_compresses_base():
    hdr = img(np.where(np.arange(64) < 32, 1.0, 1e4)[None, None, :].repeat(8, 1))
    _, log_out = compress_log_luminance(hdr)
    assert np.ptp(log_out) == pytest.approx(np.log10(5.0), rel=0.05)


def test_tone_map_errors():
    with pytest.raises(NonPositiveLuminance):
        tone_map(img(np.zeros((3, 4, 4))))
    with pytest.raises(ValueError):
        ToneMapConfig(target_base_contrast=0.5)
    with pytest.raises(ValueError):
        ToneMapConfig(saturation=0)
    with pytest.raises(ValueError):
        tone_map(img(np.ones((1, 4, 4))), arm="control")


# -- flash / no-flash -----------------------------------------------------------

def test_flash_identical_inputs_keep_strong_edges():
    clean = img(scene()[None])
    sigma_r = 0.005
    out = flash_noflash(clean, clean, Bilateral(16, sigma_r), 128)
    gi = normalize_gradient(forward_gradient(clean))
    go = normalize_gradient(forward_gradient(out))
    for a, b in ((gi.gx.data, go.gx.data), (gi.gy.data, go.gy.data)):
        strong = np.abs(a - 0.5) > 10 * sigma_r
        assert strong.any()
        assert np.max(np.abs(a - b)[strong]) < sigma_r


def test_flash_constant_noflash(rng):
    const = img(np.full((1, 20, 20), 0.7))
    out = flash_noflash(const, img(rng.random((1, 20, 20))), Bilateral(8, 0.005), 128)
    assert np.max(np.abs(out.data - 0.7)) < 1e-9


def test_flash_denoising_gain():
    clean = scene()
    noisy = np.clip(clean + 0.05 * np.random.default_rng(0).standard_normal(clean.shape), 0, 1)
    out = flash_noflash(img(noisy[None]), img(clean[None]), Bilateral(16, 0.005), 128)
    assert psnr(out.data[0], clean) - psnr(noisy, clean) >= 6.0


def test_joint_mode_shape_check(rng):
    with pytest.raises(DimensionMismatch):
        flash_noflash(img(rng.random((1, 6, 6))), img(rng.random((1, 6, 7))))


def test_pipeline_config_invariants():
    with pytest.raises(ValueError):
        PipelineConfig(beta=-1)
    assert PipelineConfig().filter == Bilateral(16, 0.025)


def test_detail_presets():
    assert DETAIL_PAIRS["bilateral"] == (Bilateral(16, 0.1), Bilateral(16, 0.025))
    assert DETAIL_PAIRS["l0"] == (L0(0.007), L0(0.00175))
    assert DETAIL_PAIRS["dt"][1] == DomainTransformNC(16, 0.025)
    assert DETAIL_PAIRS["wmf"][0].sigma_r == 0.1 and isinstance(DETAIL_PAIRS["wmf"][0], WeightedMedian)
