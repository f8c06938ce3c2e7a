import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import palettekit as pk
from palettekit.errors import DecodeError, DimensionMismatchError, EmptyMaskError
from palettekit.image import _apply_hsv_shift, decode_png, encode_png


def rand_img(rng, h=8, w=8):
    return rng.integers(0, 256, (h, w, 3)).astype(np.uint8)


class TestPngIO:
    def test_identity_decode_1x1(self, tmp_path):
        img = np.zeros((1, 1, 3), np.uint8)
        path = tmp_path / "black.png"
        pk.save_image(path, img)
        assert np.array_equal(pk.load_image(path), img)

    def test_round_trip_bit_exact(self, tmp_path, rng):
        img = rand_img(rng, 13, 7)
        path = tmp_path / "rt.png"
        pk.save_image(path, img)
        assert np.array_equal(pk.load_image(path), img)

    def test_alpha_composited_over_white(self):
        from PIL import Image
        import io

        rgba = np.zeros((2, 2, 4), np.uint8)
        rgba[..., 0] = 255  # fully transparent red
        buf = io.BytesIO()
        Image.fromarray(rgba, "RGBA").save(buf, format="PNG")
        out = decode_png(buf.getvalue())
        assert np.all(out == 255)

    def test_alpha_partial(self):
        from PIL import Image
        import io

        rgba = np.array([[[100, 50, 0, 128]]], np.uint8)
        buf = io.BytesIO()
        Image.fromarray(rgba, "RGBA").save(buf, format="PNG")
        out = decode_png(buf.getvalue())
        # c_out = a*c + (1-a)*255, a = 128/255, rounded half up
        a = 128 / 255
        expect = np.floor(np.array([100, 50, 0]) * a + 255 * (1 - a) + 0.5)
        assert np.array_equal(out[0, 0], expect.astype(np.uint8))

    def test_malformed_png_rejected(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"not a png at all")
        with pytest.raises(DecodeError):
            pk.load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            pk.load_image(tmp_path / "nope.png")

    def test_encode_decode(self, rng):
        img = rand_img(rng)
        assert np.array_equal(decode_png(encode_png(img)), img)


class TestLuminance:
    def test_white(self):
        img = np.full((3, 3, 3), 255, np.uint8)
        assert np.allclose(pk.luminance(img), 255.0)

    def test_black(self):
        assert np.all(pk.luminance(np.zeros((2, 2, 3), np.uint8)) == 0.0)

    def test_pure_red_closed_form(self):
        img = np.zeros((1, 1, 3), np.uint8)
        img[0, 0, 0] = 255
        assert pk.luminance(img)[0, 0] == pytest.approx(76.245, abs=1e-9)

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255), st.floats(0, 1))
    @settings(max_examples=50, deadline=None)
    def test_linear_in_blend(self, r, g, b, t):
        a = np.array([[[r, g, b]]], np.uint8)
        bb = np.array([[[b, r, g]]], np.uint8)
        blend = np.floor(a.astype(np.float64) * (1 - t) + bb.astype(np.float64) * t + 0.5)
        lum_blend = pk.luminance(blend.astype(np.uint8))
        expect = pk.luminance(a) * (1 - t) + pk.luminance(bb) * t
        assert abs(lum_blend[0, 0] - expect[0, 0]) <= 1.0  # rounding slack


class TestGradients:
    def test_constant_zero(self):
        gx, gy = pk.gradients(np.full((5, 5), 7.0))
        assert np.all(gx == 0) and np.all(gy == 0)

    def test_1x2_forward_difference(self):
        gx, gy = pk.gradients(np.array([[0.0, 10.0]]))
        assert np.array_equal(gx, [[10.0, 0.0]])
        assert np.array_equal(gy, [[0.0, 0.0]])

    def test_vertical_ramp(self):
        lum = np.arange(5, dtype=np.float64)[:, None] * np.ones((1, 4))
        gx, gy = pk.gradients(lum)
        assert np.all(gy[:-1, :] == 1.0) and np.all(gy[-1, :] == 0.0)
        assert np.all(gx == 0.0)

    def test_shift_equivariant_interior(self, rng):
        lum = rng.random((8, 8)) * 255
        gx, gy = pk.gradients(lum)
        gx_sub, gy_sub = pk.gradients(lum[1:, 1:])
        # cropping the plane shifts the gradient field on interior pixels
        assert np.allclose(gx_sub[:-1, :-1], gx[1:-1, 1:-1])
        assert np.allclose(gy_sub[:-1, :-1], gy[1:-1, 1:-1])


class TestThresholdGradients:
    def test_strict_above(self):
        bx, _ = pk.threshold_gradients(np.array([[9.0]]), np.array([[0.0]]), 8)
        assert bx[0, 0] == 1.0

    def test_strict_boundary(self):
        bx, _ = pk.threshold_gradients(np.array([[8.0]]), np.array([[0.0]]), 8)
        assert bx[0, 0] == 0.0

    def test_absolute_value(self):
        bx, _ = pk.threshold_gradients(np.array([[-9.0]]), np.array([[0.0]]), 8)
        assert bx[0, 0] == 1.0

    def test_binary_output(self, rng):
        g = (rng.random((6, 6)) - 0.5) * 40
        bx, by = pk.threshold_gradients(g, g.T, 8)
        assert set(np.unique(bx)) <= {0.0, 1.0}
        assert set(np.unique(by)) <= {0.0, 1.0}


class TestAugmentHsv:
    def test_strength_zero_identity(self, rng):
        img = rand_img(rng)
        out = pk.augment_hsv(img, pk.AugmentationConfig(strength=0.0, seed=3))
        assert np.array_equal(out, img)

    def test_seeded_determinism(self, rng):
        img = rand_img(rng)
        cfg = pk.AugmentationConfig(strength=0.6, seed=42)
        assert np.array_equal(pk.augment_hsv(img, cfg), pk.augment_hsv(img, cfg))

    def test_gray_hue_invariant(self):
        img = np.full((2, 2, 3), 128, np.uint8)
        out = _apply_hsv_shift(img, dh_degrees=117.0, ds=1.0, dv=1.0)
        assert np.array_equal(out, img)

    def test_round_trip_no_shift(self, rng):
        img = rand_img(rng)
        out = _apply_hsv_shift(img, 0.0, 1.0, 1.0)
        assert np.max(np.abs(out.astype(int) - img.astype(int))) <= 1

    def test_strength_validated(self):
        with pytest.raises(ValueError):
            pk.AugmentationConfig(strength=1.5, seed=0)


class TestReplaceLuminance:
    def test_round_trip(self, rng):
        img = rand_img(rng)
        out = pk.replace_luminance(img, pk.luminance(img))
        assert np.max(np.abs(out.astype(int) - img.astype(int))) <= 1

    def test_gray_to_constant(self):
        img = np.full((4, 4, 3), 90, np.uint8)
        out = pk.replace_luminance(img, np.full((4, 4), 200.0))
        assert np.all(out == 200)

    def test_luma_tracked_where_unclamped(self, rng):
        img = rand_img(rng, 6, 6)
        target = np.full((6, 6), 120.0)
        out = pk.replace_luminance(img, target)
        lum_out = pk.luminance(out)
        unclamped = np.all((out > 0) & (out < 255), axis=2)
        assert np.all(np.abs(lum_out[unclamped] - 120.0) <= 1.5)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            pk.replace_luminance(rand_img(rng), np.zeros((3, 3)))


class TestMeanColor:
    def test_constant_region(self):
        img = np.full((3, 3, 3), 77, np.uint8)
        assert pk.mean_color(img, np.ones((3, 3))) == (77, 77, 77)

    def test_round_half_up(self):
        img = np.array([[(0, 0, 0), (255, 255, 255)]], np.uint8)
        assert pk.mean_color(img, np.ones((1, 2))) == (128, 128, 128)

    def test_single_pixel(self):
        img = np.array([[[9, 8, 7]]], np.uint8)
        assert pk.mean_color(img, np.ones((1, 1))) == (9, 8, 7)

    def test_empty_mask(self, rng):
        with pytest.raises(EmptyMaskError):
            pk.mean_color(rand_img(rng), np.zeros((8, 8)))
