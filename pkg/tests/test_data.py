import numpy as np
import pytest

import palettekit as pk
from palettekit.data import ImageFolderDataset, ProceduralDataset, toy_image


class TestToyImage:
    def test_deterministic(self):
        assert np.array_equal(toy_image(1, 5, 32), toy_image(1, 5, 32))

    def test_distinct_across_indices(self):
        assert not np.array_equal(toy_image(1, 0, 32), toy_image(1, 1, 32))

    def test_distinct_across_seeds(self):
        assert not np.array_equal(toy_image(1, 0, 32), toy_image(2, 0, 32))

    def test_shape_and_dtype(self):
        img = toy_image(0, 0, 16)
        assert img.shape == (16, 16, 3) and img.dtype == np.uint8

    def test_corpus_has_texture_content(self):
        # thresholded gradients must fire somewhere on a reasonable corpus
        fired = 0
        for i in range(32):
            lum = pk.luminance(toy_image(4, i, 32))
            bx, by = pk.threshold_gradients(*pk.gradients(lum))
            fired += int(bx.sum() + by.sum() > 0)
        assert fired > 16


class TestProceduralDataset:
    def test_len_and_indexing(self):
        ds = ProceduralDataset(seed=0, count=10, size=16)
        assert len(ds) == 10
        assert ds[3].shape == (16, 16, 3)

    def test_out_of_range(self):
        ds = ProceduralDataset(seed=0, count=2, size=8)
        with pytest.raises(IndexError):
            ds[2]

    def test_same_seed_same_items(self):
        a = ProceduralDataset(seed=9, count=4, size=8)
        b = ProceduralDataset(seed=9, count=4, size=8)
        assert all(np.array_equal(a[i], b[i]) for i in range(4))


class TestImageFolderDataset:
    def test_crops_from_folder(self, tmp_path, rng):
        for i in range(3):
            img = rng.integers(0, 256, (40, 40, 3)).astype(np.uint8)
            pk.save_image(tmp_path / f"img{i}.png", img)
        ds = ImageFolderDataset(tmp_path, size=16, seed=1, samples_per_file=4)
        assert len(ds) == 12
        crop = ds[5]
        assert crop.shape == (16, 16, 3)
        assert np.array_equal(ds[5], crop)  # deterministic

    def test_empty_folder_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            ImageFolderDataset(tmp_path, size=8)

    def test_too_small_image_rejected(self, tmp_path, rng):
        pk.save_image(tmp_path / "small.png", rng.integers(0, 256, (4, 4, 3)).astype(np.uint8))
        ds = ImageFolderDataset(tmp_path, size=16)
        with pytest.raises(ValueError):
            ds[0]
