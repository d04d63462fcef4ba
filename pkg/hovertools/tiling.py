"""
Tiling of images that are larger than a single network window.

A network with valid convolutions turns an input window of
``input_size²`` pixels into an output of ``output_size²`` pixels for the
centre of the window. The image is split into a grid of output cells of
``output_size²`` pixels; each cell is expanded by the margin
``(input_size - output_size) / 2`` on all sides to obtain its input window.
Parts of a window beyond the image borders are filled by mirroring the
image without repeating the edge pixel. Network outputs are stitched into
full size maps before post processing.
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

import collections
import logging

import numpy as np

from hovertools import errors

_log = logging.getLogger("hovertools")

DEFAULT_INPUT_SIZE = 270
DEFAULT_OUTPUT_SIZE = 80

#: Version of the structure returned by :py:meth:`TilePlan.as_document`.
DOCUMENT_VERSION = 1

#: Rectangle in pixels; ``top`` and ``left`` can be negative for input windows.
Rect = collections.namedtuple('Rect', ['top', 'left', 'height', 'width'])

#: Tile at position ``(tile_row, tile_col)`` in the grid of output cells.
Tile = collections.namedtuple('Tile', ['tile_row', 'tile_col', 'input_window', 'output_rect'])


class TileGeometry(object):
    """
    Input and output size of the network.

    :raises hovertools.errors.InterfaceError: unless \
      ``input_size > output_size >= 1`` and their difference is even
    """
    def __init__(self, input_size=DEFAULT_INPUT_SIZE, output_size=DEFAULT_OUTPUT_SIZE):
        if output_size < 1:
            raise errors.InterfaceError('output size is %d but must be at least 1' % output_size)
        if input_size <= output_size:
            raise errors.InterfaceError(
                'input size is %d but must be greater than output size %d' % (input_size, output_size))
        if (input_size - output_size) % 2 != 0:
            raise errors.InterfaceError(
                'difference between input size %d and output size %d must be even' % (input_size, output_size))
        self.input_size = int(input_size)
        self.output_size = int(output_size)

    @property
    def margin(self):
        return (self.input_size - self.output_size) // 2

    def __eq__(self, other):
        return isinstance(other, TileGeometry) \
            and (self.input_size, self.output_size) == (other.input_size, other.output_size)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return 'TileGeometry(input_size=%d, output_size=%d)' % (self.input_size, self.output_size)


class TilePlan(object):
    """
    Tiles for an image of ``width`` x ``height`` pixels in raster order.
    """
    def __init__(self, width, height, geometry, tiles):
        self.width = width
        self.height = height
        self.geometry = geometry
        self.tiles = tiles
        self._position_to_tile = collections.OrderedDict(
            ((tile.tile_row, tile.tile_col), tile) for tile in tiles)

    @property
    def tile_rows(self):
        return -(-self.height // self.geometry.output_size)

    @property
    def tile_cols(self):
        return -(-self.width // self.geometry.output_size)

    def tile_at(self, tile_row, tile_col):
        """
        The :py:class:`Tile` at ``(tile_row, tile_col)`` or ``None``.
        """
        return self._position_to_tile.get((tile_row, tile_col))

    def as_document(self):
        """
        The plan as structure of dictionaries and lists that can be dumped
        as JSON for external inference drivers.
        """
        return collections.OrderedDict([
            ('version', DOCUMENT_VERSION),
            ('width', self.width),
            ('height', self.height),
            ('input_size', self.geometry.input_size),
            ('output_size', self.geometry.output_size),
            ('margin', self.geometry.margin),
            ('tiles', [
                collections.OrderedDict([
                    ('tile_row', tile.tile_row),
                    ('tile_col', tile.tile_col),
                    ('input_window', collections.OrderedDict(tile.input_window._asdict())),
                    ('output_rect', collections.OrderedDict(tile.output_rect._asdict())),
                ]) for tile in self.tiles
            ]),
        ])

    def __eq__(self, other):
        return isinstance(other, TilePlan) and (self.as_document() == other.as_document())

    def __ne__(self, other):
        return not self.__eq__(other)


def plan_tiles(width, height, geometry=None):
    """
    :py:class:`TilePlan` covering an image of ``width`` x ``height`` pixels
    with ``ceil(width / output_size) * ceil(height / output_size)`` tiles.
    Output rectangles of edge tiles are clipped to the image while input
    windows always have ``input_size²`` pixels.
    """
    actual_geometry = geometry if geometry is not None else TileGeometry()
    if width < 1 or height < 1:
        raise errors.InterfaceError('image size is %dx%d but must be at least 1x1' % (width, height))
    output_size = actual_geometry.output_size
    margin = actual_geometry.margin
    tiles = []
    for tile_row, top in enumerate(range(0, height, output_size)):
        for tile_col, left in enumerate(range(0, width, output_size)):
            input_window = Rect(top - margin, left - margin, actual_geometry.input_size, actual_geometry.input_size)
            output_rect = Rect(top, left, min(output_size, height - top), min(output_size, width - left))
            tiles.append(Tile(tile_row, tile_col, input_window, output_rect))
    result = TilePlan(width, height, actual_geometry, tiles)
    _log.debug('planned %d tile(s) for %dx%d image', len(tiles), width, height)
    return result


def tile_plan_from_document(document):
    """
    :py:class:`TilePlan` described by ``document`` as created by
    :py:meth:`TilePlan.as_document`.

    :raises hovertools.errors.DataFormatError: if ``document`` is broken
    """
    try:
        version = document['version']
        if version != DOCUMENT_VERSION:
            raise errors.DataFormatError('tile plan version is %r but must be %d' % (version, DOCUMENT_VERSION))
        geometry = TileGeometry(int(document['input_size']), int(document['output_size']))
        result = plan_tiles(int(document['width']), int(document['height']), geometry)
        tiles = [
            Tile(
                int(tile['tile_row']), int(tile['tile_col']),
                Rect(**dict((key, int(value)) for key, value in tile['input_window'].items())),
                Rect(**dict((key, int(value)) for key, value in tile['output_rect'].items())))
            for tile in document['tiles']
        ]
    except (KeyError, TypeError, ValueError) as error:
        raise errors.DataFormatError('cannot read tile plan: %s' % error, cause=error)
    if tiles != result.tiles:
        raise errors.DataFormatError('tiles in tile plan must match the tiles planned for its image size')
    return result


def _covered_span(start, length, size):
    """
    ``(lower, upper, before, after)`` such that mirror padding the image
    span ``lower..upper-1`` by ``before`` and ``after`` pixels covers
    ``start..start+length-1``. The span reaches far enough into the image
    for the mirrored pixels.

    >>> _covered_span(-2, 6, 3)
    (0, 3, 2, 1)
    >>> _covered_span(90, 20, 100)
    (89, 100, 0, 10)
    """
    before = max(0, -start)
    after = max(0, start + length - size)
    lower = max(0, start)
    upper = min(size, start + length)
    if before:
        upper = min(size, max(upper, before + 1))
    if after:
        lower = max(0, min(lower, size - 1 - after))
    return lower, upper, before, after


def extract_tile(image, tile, geometry=None):
    """
    Input window of ``tile`` from ``image``, which is either a single grid
    of shape ``(height, width)`` or a stack of shape
    ``(channels, height, width)``. Parts of the window outside the image
    are mirrored without repeating the edge pixel.
    """
    assert tile is not None
    image = np.asarray(image)
    if image.ndim not in (2, 3):
        raise errors.DataError('image must have 2 or 3 dimensions but has %d' % image.ndim)
    height, width = image.shape[-2:]
    window = tile.input_window
    if geometry is not None:
        assert window.height == geometry.input_size, 'window=%s, geometry=%s' % (window, geometry)
    top, bottom, rows_before, rows_after = _covered_span(window.top, window.height, height)
    left, right, cols_before, cols_after = _covered_span(window.left, window.width, width)
    pad_widths = [(0, 0)] * (image.ndim - 2) + [(rows_before, rows_after), (cols_before, cols_after)]
    padded = np.pad(image[..., top:bottom, left:right], pad_widths, mode='reflect')
    row_offset = window.top - top + rows_before
    col_offset = window.left - left + cols_before
    return padded[..., row_offset:row_offset + window.height, col_offset:col_offset + window.width]


def crop_output(tile, output, geometry):
    """
    Part of the full ``output_size²`` network ``output`` of ``tile`` that
    lies within its clipped output rectangle.
    """
    assert tile is not None
    assert geometry is not None
    output = np.asarray(output)
    expected_shape = (geometry.output_size, geometry.output_size)
    if output.shape[-2:] != expected_shape:
        raise errors.DimensionError(
            'output of tile (%d, %d) has shape %s but must have %s'
            % (tile.tile_row, tile.tile_col, output.shape[-2:], expected_shape))
    return output[..., :tile.output_rect.height, :tile.output_rect.width]


def stitch_maps(tile_outputs, plan):
    """
    Full image map assembled from ``tile_outputs``, a sequence of
    ``(tile, output)`` with exactly one entry for each tile of ``plan``.
    Outputs can either be full ``output_size²`` network outputs or already
    be cropped to the tile's output rectangle.

    :raises hovertools.errors.TilingError: on missing, duplicate or \
      unplanned tiles
    """
    assert tile_outputs is not None
    assert plan is not None

    result = None
    stitched_positions = set()
    for tile, output in tile_outputs:
        position = (tile.tile_row, tile.tile_col)
        if plan.tile_at(*position) != tile:
            raise errors.TilingError('tile %s must be part of the tile plan' % (position,))
        if position in stitched_positions:
            raise errors.TilingError('tile %s must be stitched only once' % (position,))
        stitched_positions.add(position)
        output = np.asarray(output)
        rect = tile.output_rect
        if output.shape[-2:] != (rect.height, rect.width):
            output = crop_output(tile, output, plan.geometry)
        if result is None:
            result = np.zeros(output.shape[:-2] + (plan.height, plan.width), dtype=output.dtype)
        elif output.shape[:-2] != result.shape[:-2]:
            raise errors.DimensionError(
                'output of tile %s has %d channel dimension(s) %s but must match %s'
                % (position, output.ndim - 2, output.shape[:-2], result.shape[:-2]))
        result[..., rect.top:rect.top + rect.height, rect.left:rect.left + rect.width] = output
    for tile in plan.tiles:
        if (tile.tile_row, tile.tile_col) not in stitched_positions:
            raise errors.TilingError('output for tile %s must be provided' % ((tile.tile_row, tile.tile_col),))
    return result
