import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import palettekit as pk
from palettekit.data import toy_image


def distinct_colors(img):
    return np.unique(img.reshape(-1, 3), axis=0)


class TestPaletteTypes:
    def test_palette_rejects_duplicates(self):
        with pytest.raises(ValueError):
            pk.Palette.from_list([[1, 2, 3], [1, 2, 3]])

    def test_palette_json_round_trip(self):
        pal = pk.Palette.from_list([[0, 0, 0], [10, 20, 30]])
        assert pk.Palette.from_json(pal.to_json()).to_list() == pal.to_list()

    @pytest.mark.parametrize("n", [4, 8, 16, 32, 64, 128])
    def test_spec_accepts_powers_of_two(self, n):
        assert pk.PaletteSpec(n).n_colors == n

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 12, 256])
    def test_spec_rejects_others(self, n):
        with pytest.raises(ValueError):
            pk.PaletteSpec(n)

    def test_indexed_image_validates_indices(self):
        pal = pk.Palette.from_list([[0, 0, 0]])
        with pytest.raises(ValueError):
            pk.IndexedImage(np.array([[1]]), pal)


class TestMedianCut:
    def test_few_colors_identity(self):
        img = np.array([[(0, 0, 0), (255, 255, 255)]], np.uint8)
        q = pk.median_cut(img, 4)
        assert np.array_equal(pk.render(q), img)
        assert sorted(q.palette.to_list()) == [[0, 0, 0], [255, 255, 255]]

    def test_skewed_multiplicity_identity(self):
        # one dominant color plus two rare ones still gets exact boxes
        img = np.zeros((10, 10, 3), np.uint8)
        img[0, 0] = (200, 10, 10)
        img[5, 5] = (10, 200, 10)
        q = pk.median_cut(img, 4)
        assert np.array_equal(pk.render(q), img)

    def test_1d_split_derived(self):
        img = np.array([[(10, 0, 0), (20, 0, 0), (200, 0, 0), (210, 0, 0)]], np.uint8)
        q = pk.median_cut(img, 2)
        assert q.palette.to_list() == [[15, 0, 0], [205, 0, 0]]
        # brute-force optimal 1-D two-cluster split agrees
        vals = [10, 20, 200, 210]
        best = min(
            range(1, 4),
            key=lambda cut: sum((v - np.mean(vals[:cut])) ** 2 for v in vals[:cut])
            + sum((v - np.mean(vals[cut:])) ** 2 for v in vals[cut:]),
        )
        assert best == 2

    @pytest.mark.parametrize("n", [4, 8, 16, 32, 64, 128])
    def test_distinct_color_bound(self, n, rng):
        img = rng.integers(0, 256, (16, 16, 3)).astype(np.uint8)
        out = pk.render(pk.median_cut(img, n))
        assert len(distinct_colors(out)) <= n

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, (12, 12, 3)).astype(np.uint8)
        a = pk.median_cut(img, 8)
        b = pk.median_cut(img, 8)
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.palette.colors, b.palette.colors)

    def test_monotone_fidelity_on_corpus(self, toy_corpus_16):
        def corpus_mse(n):
            errs = []
            for img in toy_corpus_16:
                out = pk.render(pk.median_cut(img, n))
                errs.append(np.mean((out.astype(float) - img.astype(float)) ** 2))
            return float(np.mean(errs))

        mses = [corpus_mse(n) for n in (4, 8, 16, 32)]
        assert all(a >= b for a, b in zip(mses, mses[1:]))

    def test_accepts_palette_spec(self, rng):
        img = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
        q = pk.median_cut(img, pk.PaletteSpec(16))
        assert len(q.palette) <= 16


class TestRender:
    def test_single_entry_palette(self):
        pal = pk.Palette.from_list([[5, 6, 7]])
        q = pk.IndexedImage(np.zeros((3, 3), np.int32), pal)
        assert np.all(pk.render(q) == [5, 6, 7])

    def test_explicit_indices(self):
        pal = pk.Palette.from_list([[1, 2, 3], [4, 5, 6]])
        q = pk.IndexedImage(np.array([[0, 1]]), pal)
        assert pk.render(q).tolist() == [[[1, 2, 3], [4, 5, 6]]]

    def test_project_render_fixed_point(self, rng):
        img = rng.integers(0, 256, (6, 6, 3)).astype(np.uint8)
        q = pk.median_cut(img, 8)
        r1 = pk.render(q)
        r2 = pk.render(pk.project_to_palette(r1, q.palette))
        assert np.array_equal(r1, r2)


class TestProjectToPalette:
    def test_palette_drawn_image_identity(self, rng):
        pal = pk.Palette.from_list([[0, 0, 0], [255, 0, 0], [0, 255, 0]])
        idx = rng.integers(0, 3, (5, 5)).astype(np.int32)
        img = pk.render(pk.IndexedImage(idx, pal))
        assert np.array_equal(pk.render(pk.project_to_palette(img, pal)), img)

    def test_nearest_color_derived(self):
        pal = pk.Palette.from_list([[0, 0, 0], [255, 255, 255]])
        img = np.full((1, 1, 3), 100, np.uint8)
        assert pk.project_to_palette(img, pal).indices[0, 0] == 0

    def test_tie_breaks_to_lowest_index(self):
        pal = pk.Palette.from_list([[0, 0, 0], [2, 0, 0]])
        img = np.array([[[1, 0, 0]]], np.uint8)
        assert pk.project_to_palette(img, pal).indices[0, 0] == 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_projection_optimality_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        pal = pk.Palette(
            np.unique(rng.integers(0, 256, (5, 3)), axis=0).astype(np.uint8)
        )
        img = rng.integers(0, 256, (4, 4, 3)).astype(np.uint8)
        q = pk.project_to_palette(img, pal)
        flat = img.reshape(-1, 3).astype(np.int64)
        pc = pal.colors.astype(np.int64)
        for p, chosen in zip(flat, q.indices.reshape(-1)):
            dists = ((p[None] - pc) ** 2).sum(axis=1)
            assert dists[chosen] == dists.min()


def test_quantize_toy_corpus_reproducible():
    imgs = [toy_image(3, i, 16) for i in range(5)]
    hashes_a = [pk.median_cut(img, 8).palette.to_json() for img in imgs]
    hashes_b = [pk.median_cut(img, 8).palette.to_json() for img in imgs]
    assert hashes_a == hashes_b
