import numpy as np
import pytest

from dvs.core import LabelMap, crop
from dvs.errors import CompletenessError, ConfigError, ShapeError
from dvs.region import SCHEME_GRID, DivisionScheme, make_regions, stitch


class TestDivisionScheme:
    def test_names_map_to_grids(self):
        assert DivisionScheme.from_name("original").num_regions == 1
        assert DivisionScheme.from_name("half").num_regions == 2
        assert DivisionScheme.from_name("2x2").num_regions == 4
        assert DivisionScheme.from_name("3x3").num_regions == 9
        assert DivisionScheme.from_name("4x4").num_regions == 16

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            DivisionScheme.from_name("5x5")

    def test_mismatched_grid_rejected(self):
        with pytest.raises(ConfigError):
            DivisionScheme("2x2", 3, 3, 0)

    def test_negative_overlap_rejected(self):
        with pytest.raises(ConfigError):
            DivisionScheme.from_name("2x2", -1)


class TestMakeRegions:
    def test_original_is_whole_frame(self):
        (geom,) = make_regions(DivisionScheme.from_name("original", 0), 128, 128)
        assert (geom.origin_x, geom.origin_y, geom.width, geom.height) == (0, 0, 128, 128)
        assert geom.core.area == 128 * 128

    def test_2x2_no_overlap(self):
        geoms = make_regions(DivisionScheme.from_name("2x2", 0), 128, 128)
        origins = [(g.origin_x, g.origin_y) for g in geoms]
        assert origins == [(0, 0), (64, 0), (0, 64), (64, 64)]
        assert all((g.width, g.height) == (64, 64) for g in geoms)

    def test_2x2_overlap_expands_interior_edges(self):
        geoms = make_regions(DivisionScheme.from_name("2x2", 8), 128, 128)
        first = geoms[0]
        assert (first.width, first.height) == (72, 72)
        assert (first.core.w, first.core.h) == (64, 64)
        # interior region of a 3x3 grows on all four sides
        mid = make_regions(DivisionScheme.from_name("3x3", 8), 126, 126)[4]
        assert (mid.width, mid.height) == (58, 58)

    def test_cores_tile_exactly(self):
        for name in SCHEME_GRID:
            for overlap in (0, 8, 64):
                geoms = make_regions(DivisionScheme.from_name(name, overlap), 256, 256)
                cover = np.zeros((256, 256), dtype=np.int32)
                for g in geoms:
                    cover[g.core.y : g.core.y1, g.core.x : g.core.x1] += 1
                assert (cover == 1).all()
                assert sum(g.core.area for g in geoms) == 256 * 256

    def test_remainder_goes_to_last_row_and_column(self):
        geoms = make_regions(DivisionScheme.from_name("3x3", 0), 130, 127)
        widths = [geoms[i].core.w for i in (0, 1, 2)]
        heights = [geoms[i].core.h for i in (0, 3, 6)]
        assert widths == [43, 43, 44]
        assert heights == [42, 42, 43]

    def test_overlap_too_large(self):
        # expansion is clamped to the frame, so the limit is the region size
        with pytest.raises(ConfigError):
            make_regions(DivisionScheme.from_name("4x4", 64), 64, 64)

    def test_region_pixel_overhead_monotone_in_overlap(self):
        totals = []
        for overlap in (0, 4, 8, 16, 32):
            geoms = make_regions(DivisionScheme.from_name("2x2", overlap), 128, 128)
            totals.append(sum(g.pixels for g in geoms))
        assert all(b > a for a, b in zip(totals, totals[1:]))


class TestStitch:
    def test_single_region_identity(self, rng):
        lab = LabelMap(rng.integers(0, 4, size=(32, 32)))
        (geom,) = make_regions(DivisionScheme.from_name("original", 0), 32, 32)
        out = stitch([(geom, lab)])
        assert np.array_equal(out.data, lab.data)

    def test_quadrant_constant_maps(self):
        geoms = make_regions(DivisionScheme.from_name("2x2", 0), 8, 8)
        pieces = [
            (g, LabelMap(np.full((g.height, g.width), i, dtype=np.int32)))
            for i, g in enumerate(geoms)
        ]
        out = stitch(pieces)
        assert out.data[0, 0] == 0 and out.data[0, 7] == 1
        assert out.data[7, 0] == 2 and out.data[7, 7] == 3

    def test_core_owner_wins_in_overlap_bands(self):
        geoms = make_regions(DivisionScheme.from_name("2x2", 8), 32, 32)
        # every region claims a distinct constant id over its whole extent,
        # including the overlap bands
        pieces = [
            (g, LabelMap(np.full((g.height, g.width), i, dtype=np.int32)))
            for i, g in enumerate(geoms)
        ]
        out = stitch(pieces)
        for i, g in enumerate(geoms):
            core = out.data[g.core.y : g.core.y1, g.core.x : g.core.x1]
            assert (core == i).all()

    def test_round_trip_all_schemes_and_overlaps(self, rng):
        full = LabelMap(rng.integers(0, 7, size=(96, 80)))
        for name in SCHEME_GRID:
            for overlap in (0, 5, 16):
                geoms = make_regions(DivisionScheme.from_name(name, overlap), 80, 96)
                out = stitch([(g, crop(full, g)) for g in geoms])
                assert np.array_equal(out.data, full.data), (name, overlap)

    def test_overlap_never_changes_consistent_stitch(self, rng):
        full = LabelMap(rng.integers(0, 5, size=(64, 64)))
        outs = []
        for overlap in (0, 4, 12):
            geoms = make_regions(DivisionScheme.from_name("2x2", overlap), 64, 64)
            outs.append(stitch([(g, crop(full, g)) for g in geoms]).data)
        assert np.array_equal(outs[0], outs[1])
        assert np.array_equal(outs[1], outs[2])

    def test_missing_region_detected(self, rng):
        full = LabelMap(rng.integers(0, 5, size=(64, 64)))
        geoms = make_regions(DivisionScheme.from_name("2x2", 0), 64, 64)
        pieces = [(g, crop(full, g)) for g in geoms[:-1]]
        with pytest.raises(CompletenessError):
            stitch(pieces)

    def test_size_mismatch_detected(self):
        geoms = make_regions(DivisionScheme.from_name("2x2", 0), 64, 64)
        bad = LabelMap(np.zeros((10, 10), dtype=np.int32))
        with pytest.raises(ShapeError):
            stitch([(geoms[0], bad)])
