"""
Tests for :py:mod:`hovertools.tiling` module.
"""
# Copyright (C) 2026 hovertools developers
#
# This program is free software: you can redistribute it and/or modify it
# under the terms of the GNU Lesser General Public License as published by
# the Free Software Foundation, either version 3 of the License, or (at your
# option) any later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or
# FITNESS FOR A PARTICULAR PURPOSE.  See the GNU Lesser General Public License
# for more details.
#
# You should have received a copy of the GNU Lesser General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

import json
import unittest

import numpy as np
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies

from hovertools import errors
from hovertools import tiling
from tests import dev_test


def _centre_output(window, geometry):
    """Emulate a network with valid convolutions that maps its input to the centre of it."""
    margin = geometry.margin
    return window[..., margin:margin + geometry.output_size, margin:margin + geometry.output_size]


def _round_trip(image, geometry=None):
    actual_geometry = geometry if geometry is not None else tiling.TileGeometry()
    height, width = image.shape[-2:]
    plan = tiling.plan_tiles(width, height, actual_geometry)
    tile_outputs = [
        (tile, _centre_output(tiling.extract_tile(image, tile, actual_geometry), actual_geometry))
        for tile in plan.tiles]
    return tiling.stitch_maps(tile_outputs, plan)


def _mirrored(indices, size):
    """``indices`` mirrored into ``0..size-1`` without repeating the edge pixel."""
    period = 2 * size - 2
    result = np.mod(indices, period)
    return np.where(result >= size, period - result, result)


class TileGeometryTest(unittest.TestCase):
    def test_can_use_default_geometry(self):
        geometry = tiling.TileGeometry()
        self.assertEqual((geometry.input_size, geometry.output_size, geometry.margin), (270, 80, 95))

    def test_fails_on_broken_geometry(self):
        dev_test.assert_raises_and_fnmatches(
            self, errors.InterfaceError, 'input size is 80 but must be greater than output size 80',
            tiling.TileGeometry, 80, 80)
        dev_test.assert_raises_and_fnmatches(
            self, errors.InterfaceError, 'difference between input size 271 and output size 80 must be even',
            tiling.TileGeometry, 271, 80)
        self.assertRaises(errors.InterfaceError, tiling.TileGeometry, 10, 0)


class PlanTilesTest(unittest.TestCase):
    def test_can_plan_large_image(self):
        plan = tiling.plan_tiles(1000, 1000)
        self.assertEqual(len(plan.tiles), 169)
        self.assertEqual((plan.tile_rows, plan.tile_cols), (13, 13))

    def test_can_place_windows_around_outputs(self):
        plan = tiling.plan_tiles(1000, 170)
        first_tile = plan.tiles[0]
        self.assertEqual(first_tile.input_window, tiling.Rect(-95, -95, 270, 270))
        self.assertEqual(first_tile.output_rect, tiling.Rect(0, 0, 80, 80))
        last_tile = plan.tiles[-1]
        self.assertEqual((last_tile.tile_row, last_tile.tile_col), (2, 12))
        self.assertEqual(last_tile.input_window, tiling.Rect(65, 865, 270, 270))
        self.assertEqual(last_tile.output_rect, tiling.Rect(160, 960, 10, 40))

    def test_can_cover_image_exactly_once(self):
        plan = tiling.plan_tiles(333, 161)
        coverage = np.zeros((161, 333), dtype=np.int32)
        for tile in plan.tiles:
            rect = tile.output_rect
            coverage[rect.top:rect.top + rect.height, rect.left:rect.left + rect.width] += 1
        self.assertTrue(np.all(coverage == 1))

    def test_can_plan_single_pixel(self):
        plan = tiling.plan_tiles(1, 1)
        self.assertEqual(len(plan.tiles), 1)
        self.assertEqual(plan.tiles[0].output_rect, tiling.Rect(0, 0, 1, 1))

    def test_can_count_tiles_for_every_side_length(self):
        for side in range(1, 501):
            expected_tile_count = -(-side // 80)
            self.assertEqual(len(tiling.plan_tiles(side, 1).tiles), expected_tile_count, 'width=%d' % side)
            self.assertEqual(len(tiling.plan_tiles(1, side).tiles), expected_tile_count, 'height=%d' % side)

    @settings(max_examples=200, deadline=None)
    @given(strategies.integers(1, 500), strategies.integers(1, 500))
    def test_can_count_tiles_for_any_image_size(self, width, height):
        plan = tiling.plan_tiles(width, height)
        self.assertEqual((plan.tile_rows, plan.tile_cols), (-(-height // 80), -(-width // 80)))
        self.assertEqual(len(plan.tiles), plan.tile_rows * plan.tile_cols)
        last_rect = plan.tiles[-1].output_rect
        self.assertEqual((last_rect.top + last_rect.height, last_rect.left + last_rect.width), (height, width))

    def test_fails_on_empty_image(self):
        dev_test.assert_raises_and_fnmatches(
            self, errors.InterfaceError, 'image size is 0x5 but must be at least 1x1', tiling.plan_tiles, 0, 5)


class TilePlanDocumentTest(unittest.TestCase):
    def test_can_convert_plan_to_document_and_back(self):
        plan = tiling.plan_tiles(201, 97, tiling.TileGeometry(64, 32))
        document = json.loads(json.dumps(plan.as_document()))
        self.assertEqual(document['margin'], 16)
        self.assertEqual(len(document['tiles']), 7 * 4)
        self.assertEqual(tiling.tile_plan_from_document(document), plan)

    def test_fails_on_other_version(self):
        document = tiling.plan_tiles(10, 10).as_document()
        document['version'] = 2
        dev_test.assert_raises_and_fnmatches(
            self, errors.DataFormatError, 'tile plan version is 2 but must be 1',
            tiling.tile_plan_from_document, document)

    def test_fails_on_missing_key(self):
        document = tiling.plan_tiles(10, 10).as_document()
        del document['tiles']
        dev_test.assert_raises_and_fnmatches(
            self, errors.DataFormatError, "cannot read tile plan: *", tiling.tile_plan_from_document, document)

    def test_fails_on_changed_tile(self):
        document = json.loads(json.dumps(tiling.plan_tiles(100, 10).as_document()))
        document['tiles'][1]['output_rect']['width'] = 80
        dev_test.assert_raises_and_fnmatches(
            self, errors.DataFormatError, 'tiles in tile plan must match the tiles planned for its image size',
            tiling.tile_plan_from_document, document)


class ExtractTileTest(unittest.TestCase):
    def test_can_extract_window_of_single_pixel(self):
        tile = tiling.plan_tiles(1, 1).tiles[0]
        window = tiling.extract_tile([[7]], tile)
        self.assertEqual(window.shape, (270, 270))
        self.assertTrue(np.all(window == 7))

    def test_can_extract_window_larger_than_image(self):
        image = np.arange(35).reshape(5, 7)
        for tile in tiling.plan_tiles(7, 5).tiles:
            window = tiling.extract_tile(image, tile)
            rows = _mirrored(np.arange(tile.input_window.top, tile.input_window.top + 270), 5)
            cols = _mirrored(np.arange(tile.input_window.left, tile.input_window.left + 270), 7)
            self.assertTrue(np.array_equal(window, image[rows[:, np.newaxis], cols[np.newaxis, :]]))

    def test_can_extract_reflected_window(self):
        image = np.arange(12).reshape(3, 4)
        geometry = tiling.TileGeometry(6, 2)
        tile = tiling.plan_tiles(4, 3, geometry).tiles[0]
        window = tiling.extract_tile(image, tile, geometry)
        self.assertEqual(window.shape, (6, 6))
        self.assertEqual(window[2:4, 2:4].tolist(), [[0, 1], [4, 5]])
        self.assertEqual(window[0].tolist(), [10, 9, 8, 9, 10, 11])

    def test_can_extract_window_of_stack(self):
        image = np.stack([np.zeros((5, 5)), np.ones((5, 5))])
        tile = tiling.plan_tiles(5, 5).tiles[0]
        window = tiling.extract_tile(image, tile)
        self.assertEqual(window.shape, (2, 270, 270))
        self.assertFalse(window[0].any())
        self.assertTrue(window[1].all())

    def test_fails_on_image_with_broken_dimensions(self):
        tile = tiling.plan_tiles(5, 5).tiles[0]
        self.assertRaises(errors.DataError, tiling.extract_tile, np.zeros(5), tile)


class StitchMapsTest(unittest.TestCase):
    def test_can_stitch_extracted_tiles_of_odd_sized_images(self):
        random = np.random.default_rng(12)
        sizes = [(1001, 733)] + [
            (2 * int(random.integers(10, 200)) + 1, 2 * int(random.integers(10, 200)) + 1) for _ in range(19)]
        for width, height in sizes:
            image = random.integers(0, 65536, size=(height, width)).astype(np.float32)
            stitched = _round_trip(image)
            self.assertEqual(stitched.dtype, image.dtype)
            self.assertTrue(np.array_equal(stitched, image), 'size=%dx%d' % (width, height))

    def test_can_stitch_stack(self):
        random = np.random.default_rng(13)
        image = random.uniform(-1, 1, size=(2, 45, 71))
        self.assertTrue(np.array_equal(_round_trip(image, tiling.TileGeometry(24, 10)), image))

    def test_can_stitch_cropped_outputs(self):
        plan = tiling.plan_tiles(100, 90)
        tile_outputs = [
            (tile, np.full((tile.output_rect.height, tile.output_rect.width), tile.tile_row * 10 + tile.tile_col))
            for tile in plan.tiles]
        stitched = tiling.stitch_maps(tile_outputs, plan)
        self.assertEqual(stitched[0, 0], 0)
        self.assertEqual(stitched[89, 99], 11)
        self.assertEqual(stitched[85, 5], 10)

    def test_fails_on_missing_tile(self):
        plan = tiling.plan_tiles(100, 10)
        tile_outputs = [(plan.tiles[0], np.zeros((80, 80)))]
        dev_test.assert_raises_and_fnmatches(
            self, errors.TilingError, 'output for tile (0, 1) must be provided', tiling.stitch_maps, tile_outputs, plan)

    def test_fails_on_duplicate_tile(self):
        plan = tiling.plan_tiles(10, 10)
        tile_outputs = [(plan.tiles[0], np.zeros((80, 80)))] * 2
        dev_test.assert_raises_and_fnmatches(
            self, errors.TilingError, 'tile (0, 0) must be stitched only once', tiling.stitch_maps, tile_outputs, plan)

    def test_fails_on_unplanned_tile(self):
        plan = tiling.plan_tiles(10, 10)
        other_tile = tiling.plan_tiles(20, 20).tiles[0]
        dev_test.assert_raises_and_fnmatches(
            self, errors.TilingError, 'tile (0, 0) must be part of the tile plan',
            tiling.stitch_maps, [(other_tile, np.zeros((80, 80)))], plan)

    def test_fails_on_output_with_broken_shape(self):
        plan = tiling.plan_tiles(10, 10)
        dev_test.assert_raises_and_fnmatches(
            self, errors.DimensionError, 'output of tile (0, 0) has shape (70, 70) but must have (80, 80)',
            tiling.stitch_maps, [(plan.tiles[0], np.zeros((70, 70)))], plan)


if __name__ == '__main__':
    unittest.main()
