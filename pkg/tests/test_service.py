"""HTTP API tests via the in-process test client."""

import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

import palettekit as pk
from palettekit.conditioning import Variant
from palettekit.data import toy_image
from palettekit.diffusion import ModelConfig, TrainConfig, make_schedule, save_checkpoint, train_base, train_control
from palettekit.image import decode_png, encode_png
from palettekit.service import create_app

CONFIG = ModelConfig(image_size=16, base_channels=8, channel_multipliers=(1, 2),
                     time_embed_dim=16, groups=4)


def b64(img) -> str:
    return base64.b64encode(encode_png(img)).decode("ascii")


def unb64(payload) -> np.ndarray:
    return decode_png(base64.b64decode(payload))


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    ckpt_dir = tmp_path_factory.mktemp("service-ckpts")
    from palettekit.data import ProceduralDataset

    ds = ProceduralDataset(seed=33, count=8, size=16)
    base = train_base(ds, CONFIG, make_schedule(64), steps=6, seed=0,
                      train_cfg=TrainConfig(batch_size=4))
    for variant in (Variant.L, Variant.T):
        ckpt = train_control(ds, base, variant, steps=3, seed=1,
                             train_cfg=TrainConfig(batch_size=4), palette_sizes=(4, 8))
        save_checkpoint(ckpt_dir / f"{variant.value}.ckpt", ckpt)
    app = create_app(str(ckpt_dir))
    return TestClient(app)


@pytest.fixture(scope="module")
def image16():
    return toy_image(77, 0, 16)


class TestQuantizeEndpoint:
    def test_single_color_image(self, client):
        img = np.full((4, 4, 3), 9, np.uint8)
        r = client.post("/api/quantize", json={"image": b64(img), "colors": 4})
        assert r.status_code == 200
        assert len(r.json()["palette"]) == 1

    def test_distinct_color_bound(self, client, image16):
        r = client.post("/api/quantize", json={"image": b64(image16), "colors": 8})
        assert r.status_code == 200
        out = unb64(r.json()["quantized_image"])
        assert len(np.unique(out.reshape(-1, 3), axis=0)) <= 8

    def test_invalid_base64_is_400(self, client):
        r = client.post("/api/quantize", json={"image": "@@not-base64@@", "colors": 4})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "bad_image"

    def test_echo_id(self, client, image16):
        r = client.post("/api/quantize", json={"id": "req-1", "image": b64(image16), "colors": 4})
        assert r.json()["id"] == "req-1"

    def test_size_cap_413(self, client):
        big = np.zeros((300, 300, 3), np.uint8)
        r = client.post("/api/quantize", json={"image": b64(big), "colors": 4})
        assert r.status_code == 413

    def test_colors_out_of_range_rejected(self, client, image16):
        r = client.post("/api/quantize", json={"image": b64(image16), "colors": 1})
        assert r.status_code == 422  # schema validation


class TestTransferEndpoint:
    def quantize(self, client, img, n):
        r = client.post("/api/quantize", json={"image": b64(img), "colors": n})
        return r.json()

    def test_identity_transfer(self, client, image16):
        q = self.quantize(client, image16, 4)
        r = client.post("/api/transfer", json={
            "quantized_image": q["quantized_image"], "palette": q["palette"],
            "target_palette": q["palette"], "mode": "color",
        })
        assert r.status_code == 200
        assert np.array_equal(unb64(r.json()["quantized_image"]),
                              unb64(q["quantized_image"]))

    def test_negative_two_color_swap(self, client):
        img = np.zeros((4, 4, 3), np.uint8)
        img[:, 2:] = 255
        q = self.quantize(client, img, 4)
        r = client.post("/api/transfer", json={
            "quantized_image": q["quantized_image"], "palette": q["palette"],
            "target_palette": q["palette"], "mode": "negative-color",
        })
        out = unb64(r.json()["quantized_image"])
        assert np.array_equal(out, 255 - img)

    def test_size_mismatch_400(self, client, image16):
        q = self.quantize(client, image16, 4)
        r = client.post("/api/transfer", json={
            "quantized_image": q["quantized_image"], "palette": q["palette"],
            "target_palette": q["palette"][:-1] or [[0, 0, 0]], "mode": "color",
        })
        if len(q["palette"]) > 1:
            assert r.status_code == 400
            assert r.json()["error"]["code"] == "palette_size_mismatch"

    def test_composes_with_dequantize(self, client, image16):
        q = self.quantize(client, image16, 8)
        t = client.post("/api/transfer", json={
            "quantized_image": q["quantized_image"], "palette": q["palette"],
            "target_palette": list(reversed(q["palette"])), "mode": "color",
        }).json()
        r = client.post("/api/dequantize", json={
            "quantized_image": t["quantized_image"], "colors": 8,
            "variant": "T", "seed": 0, "steps": 2,
        })
        assert r.status_code == 200


class TestDequantizeEndpoint:
    def test_deterministic(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 8}).json()
        body = {"quantized_image": q["quantized_image"], "colors": 8,
                "variant": "T", "seed": 5, "steps": 2}
        a = client.post("/api/dequantize", json=body).json()["image"]
        b = client.post("/api/dequantize", json=body).json()["image"]
        assert a == b

    def test_missing_texture_400(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 8}).json()
        r = client.post("/api/dequantize", json={
            "quantized_image": q["quantized_image"], "colors": 8,
            "variant": "L", "texture_on": True, "steps": 2,
        })
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "missing_texture"

    def test_texture_dimension_mismatch_400(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 8}).json()
        small = np.zeros((8, 8, 3), np.uint8)
        r = client.post("/api/dequantize", json={
            "quantized_image": q["quantized_image"], "colors": 8,
            "variant": "L", "texture_on": True, "texture_image": b64(small), "steps": 2,
        })
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "dimension_mismatch"

    def test_unavailable_variant_409(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 8}).json()
        r = client.post("/api/dequantize", json={
            "quantized_image": q["quantized_image"], "colors": 8,
            "variant": "G", "steps": 2,
        })
        assert r.status_code == 409
        assert r.json()["error"]["code"] == "checkpoint_unavailable"

    def test_l_post_luminance(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 8}).json()
        r = client.post("/api/dequantize", json={
            "quantized_image": q["quantized_image"], "colors": 8, "variant": "L",
            "texture_on": True, "texture_image": b64(image16), "l_post": True, "steps": 2,
        })
        out = unb64(r.json()["image"])
        unclamped = np.all((out > 0) & (out < 255), axis=2)
        diff = np.abs(pk.luminance(out) - pk.luminance(image16))
        assert np.all(diff[unclamped] <= 1.5)


class TestInpaintEndpoint:
    def test_mean_fill_runs(self, client, image16):
        r = client.post("/api/inpaint", json={
            "image": b64(image16), "mask_rects": [[2, 2, 5, 5]],
            "color": "mean", "variant": "T", "steps": 2,
        })
        assert r.status_code == 200
        assert unb64(r.json()["image"]).shape == image16.shape

    def test_explicit_color_and_multiple_rects(self, client, image16):
        r = client.post("/api/inpaint", json={
            "image": b64(image16), "mask_rects": [[0, 0, 3, 3], [8, 8, 4, 4]],
            "color": [250, 10, 10], "variant": "L", "texture_in_mask": True, "steps": 2,
        })
        assert r.status_code == 200

    def test_out_of_bounds_400(self, client, image16):
        r = client.post("/api/inpaint", json={
            "image": b64(image16), "mask_rects": [[14, 14, 6, 6]],
            "color": "mean", "variant": "T", "steps": 2,
        })
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "out_of_bounds"

    def test_zero_area_mask_with_explicit_color(self, client, image16):
        r = client.post("/api/inpaint", json={
            "image": b64(image16), "mask_rects": [[0, 0, 0, 0]],
            "color": [5, 5, 5], "variant": "T", "steps": 2,
        })
        assert r.status_code == 200


class TestCheckpointsEndpoint:
    def test_listing(self, client):
        r = client.get("/api/checkpoints")
        assert r.status_code == 200
        entries = r.json()["checkpoints"]
        assert {e["variant"] for e in entries} == {"L", "T"}
        assert all(e["image_size"] == 16 for e in entries)

    def test_listing_stable(self, client):
        a = client.get("/api/checkpoints").json()
        b = client.get("/api/checkpoints").json()
        assert a == b

    def test_empty_dir(self, tmp_path):
        empty = TestClient(create_app(str(tmp_path)))
        r = empty.get("/api/checkpoints")
        assert r.status_code == 200
        assert r.json()["checkpoints"] == []


class TestSchemaValidation:
    def test_malformed_body_422(self, client):
        r = client.post("/api/quantize", json={"colors": 4})
        assert r.status_code == 422

    def test_bad_mode_400(self, client, image16):
        q = client.post("/api/quantize", json={"image": b64(image16), "colors": 4}).json()
        r = client.post("/api/transfer", json={
            "quantized_image": q["quantized_image"], "palette": q["palette"],
            "target_palette": q["palette"], "mode": "sideways",
        })
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "bad_mode"
