import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import palettekit as pk
from palettekit.errors import SizeMismatchError
from palettekit.transfer import load_colormap


def brute_force_min(cost):
    n = cost.shape[0]
    best_total, best_perm = None, None
    for perm in itertools.permutations(range(n)):
        total = sum(cost[i, perm[i]] for i in range(n))
        if best_total is None or total < best_total or (
            total == best_total and list(perm) < list(best_perm)
        ):
            best_total, best_perm = total, perm
    return best_total, list(best_perm)


def random_palette(rng, n):
    colors = set()
    while len(colors) < n:
        colors.add(tuple(int(v) for v in rng.integers(0, 256, 3)))
    return pk.Palette.from_list(sorted(colors))


class TestBuildCost:
    def test_identical_palettes_zero_diagonal(self):
        pal = pk.Palette.from_list([[1, 2, 3], [9, 9, 9]])
        cost = pk.build_cost(pal, pal, pk.TransferMode.COLOR)
        assert np.all(np.diag(cost) == 0)

    def test_squared_distance(self):
        src = pk.Palette.from_list([[0, 0, 0]])
        tgt = pk.Palette.from_list([[3, 4, 0]])
        assert pk.build_cost(src, tgt, pk.TransferMode.COLOR)[0, 0] == 25

    def test_negative_mode_negates(self):
        src = pk.Palette.from_list([[0, 0, 0], [10, 0, 0]])
        tgt = pk.Palette.from_list([[5, 5, 5], [250, 0, 0]])
        c = pk.build_cost(src, tgt, pk.TransferMode.COLOR)
        nc = pk.build_cost(src, tgt, pk.TransferMode.NEGATIVE_COLOR)
        assert np.array_equal(nc, -c)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            pk.build_cost(
                pk.Palette.from_list([[0, 0, 0]]),
                pk.Palette.from_list([[0, 0, 0], [1, 1, 1]]),
                pk.TransferMode.COLOR,
            )


class TestSolveAssignment:
    def test_identity_on_zero_diagonal(self):
        pal = pk.Palette.from_list([[0, 0, 0], [100, 0, 0], [0, 100, 0]])
        a = pk.solve_assignment(pk.build_cost(pal, pal, pk.TransferMode.COLOR))
        assert a.mapping.tolist() == [0, 1, 2]

    def test_two_color_derived(self):
        src = pk.Palette.from_list([[0, 0, 0], [255, 255, 255]])
        tgt = pk.Palette.from_list([[250, 250, 250], [5, 5, 5]])
        a = pk.solve_assignment(pk.build_cost(src, tgt, pk.TransferMode.COLOR))
        assert a.mapping.tolist() == [1, 0]

    def test_negative_mode_swaps(self):
        pal = pk.Palette.from_list([[0, 0, 0], [255, 255, 255]])
        a = pk.solve_assignment(pk.build_cost(pal, pal, pk.TransferMode.NEGATIVE_COLOR))
        assert a.mapping.tolist() == [1, 0]

    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, seed, n):
        rng = np.random.default_rng(seed)
        mode = pk.TransferMode.COLOR if seed % 2 else pk.TransferMode.NEGATIVE_COLOR
        cost = pk.build_cost(random_palette(rng, n), random_palette(rng, n), mode)
        a = pk.solve_assignment(cost)
        total = int(cost[np.arange(n), a.mapping].sum())
        best_total, best_perm = brute_force_min(cost)
        assert total == best_total
        assert a.mapping.tolist() == best_perm  # lexicographically smallest optimum

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_lexicographic_tie_break_with_ties(self, seed):
        # tiny integer costs force many cost-equal optima
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        cost = rng.integers(0, 3, (n, n)).astype(np.int64)
        a = pk.solve_assignment(cost)
        best_total, best_perm = brute_force_min(cost)
        assert a.mapping.tolist() == best_perm

    def test_bijection_always(self, rng):
        for n in (1, 2, 5, 17):
            cost = rng.integers(0, 10**6, (n, n))
            a = pk.solve_assignment(cost)
            assert sorted(a.mapping.tolist()) == list(range(n))


class TestTransferPalette:
    def make_checkerboard(self, pal):
        idx = np.indices((4, 4)).sum(axis=0) % 2
        return pk.IndexedImage(idx.astype(np.int32), pal)

    def test_identity_transfer(self):
        pal = pk.Palette.from_list([[0, 0, 0], [200, 10, 30]])
        q = self.make_checkerboard(pal)
        out = pk.transfer_palette(q, pal, pk.TransferMode.COLOR)
        assert np.array_equal(pk.render(out), pk.render(q))

    def test_negative_inverts_checkerboard(self):
        pal = pk.Palette.from_list([[0, 0, 0], [255, 255, 255]])
        q = self.make_checkerboard(pal)
        out = pk.transfer_palette(q, pal, pk.TransferMode.NEGATIVE_COLOR)
        assert np.array_equal(out.indices, q.indices)
        assert np.array_equal(pk.render(out), 255 - pk.render(q))

    def test_indices_always_preserved(self, rng):
        src = random_palette(rng, 6)
        tgt = random_palette(rng, 6)
        q = pk.IndexedImage(rng.integers(0, 6, (5, 5)).astype(np.int32), src)
        out = pk.transfer_palette(q, tgt, pk.TransferMode.COLOR)
        assert np.array_equal(out.indices, q.indices)
        # re-projecting the render onto the new palette recovers the index map
        reproj = pk.project_to_palette(pk.render(out), out.palette)
        assert np.array_equal(reproj.indices, out.indices)

    def test_size_mismatch(self, rng):
        src = random_palette(rng, 4)
        q = pk.IndexedImage(np.zeros((2, 2), np.int32), src)
        with pytest.raises(SizeMismatchError):
            pk.transfer_palette(q, random_palette(rng, 5), pk.TransferMode.COLOR)


class TestResampleColormap:
    def test_two_stop_endpoints(self):
        pal = pk.resample_colormap([[0, 0, 0], [255, 255, 255]], 2)
        assert pal.to_list() == [[0, 0, 0], [255, 255, 255]]

    def test_midpoint_rounds_half_up(self):
        pal = pk.resample_colormap([[0, 0, 0], [255, 255, 255]], 3)
        assert pal.to_list()[1] == [128, 128, 128]

    def test_n_one_first_stop(self):
        pal = pk.resample_colormap([[7, 8, 9], [255, 0, 0]], 1)
        assert pal.to_list() == [[7, 8, 9]]

    def test_duplicates_perturbed_distinct(self):
        pal = pk.resample_colormap([[10, 10, 10], [10, 10, 10]], 4)
        assert len(pal) == 4  # Palette enforces distinctness

    def test_load_colormap(self, tmp_path):
        path = tmp_path / "map.json"
        path.write_text("[[0, 0, 0], [128, 64, 32], [255, 255, 255]]")
        stops = load_colormap(path)
        assert stops.shape == (3, 3)
        assert stops[1].tolist() == [128.0, 64.0, 32.0]
