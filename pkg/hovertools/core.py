"""
Grid types, connected component labelling and per instance geometry shared
by all other modules.

Grids are represented as two dimensional :py:class:`numpy.ndarray`:

* instance map - non negative integer labels with 0 for background
* type map - non negative integer class ids with 0 for background
* binary mask - values 0 and 1
* hover map - float array of shape ``(2, height, width)`` with the
  horizontal channel first
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
from scipy import ndimage
from skimage import measure

from hovertools import errors

_log = logging.getLogger("hovertools")

#: Data type used for instance maps in memory.
LABEL_DTYPE = np.int32

#: Connectivities supported by :py:func:`connected_components`.
CONNECTIVITIES = (4, 8)
DEFAULT_CONNECTIVITY = 8

#: Channel index of the horizontal distances in a hover map.
HORIZONTAL = 0
#: Channel index of the vertical distances in a hover map.
VERTICAL = 1

#: Geometry of a single instance; ``bbox`` is inclusive ``(r0, c0, r1, c1)``.
InstanceStats = collections.namedtuple('InstanceStats', ['label', 'area', 'centroid', 'bbox'])

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def validated_grid(name, grid):
    """
    ``grid`` as :py:class:`numpy.ndarray` after checking that it is a non
    empty two dimensional grid.

    :raises hovertools.errors.DataError: if ``grid`` is no 2D grid
    """
    assert name
    result = np.asarray(grid)
    if result.ndim != 2:
        raise errors.DataError('%s must be a 2D grid but has %d dimension(s)' % (name, result.ndim))
    if min(result.shape) < 1:
        raise errors.DataError('%s must have at least 1 row and 1 column but has shape %s' % (name, result.shape))
    return result


def _validated_integer_grid(name, grid):
    result = validated_grid(name, grid)
    if result.dtype == np.bool_:
        result = result.astype(LABEL_DTYPE)
    elif not np.issubdtype(result.dtype, np.integer):
        if not np.all(np.equal(np.mod(result, 1), 0)):
            raise errors.DataError('%s must contain only integer values' % name)
    if result.size and result.min() < 0:
        raise errors.DataError('%s must not contain negative values but contains %s' % (name, result.min()))
    return result.astype(LABEL_DTYPE, copy=False)


def validated_instance_map(instance_map, name='instance map'):
    """
    ``instance_map`` as integer array with labels >= 0.
    """
    return _validated_integer_grid(name, instance_map)


def validated_type_map(type_map, class_count=None, name='type map'):
    """
    ``type_map`` as integer array with class ids in ``0..class_count-1``.
    """
    result = _validated_integer_grid(name, type_map)
    if class_count is not None and result.max() >= class_count:
        raise errors.LabelError(
            '%s must contain class ids from 0 to %d but contains %d' % (name, class_count - 1, result.max()))
    return result


def validated_binary_mask(mask, name='binary mask'):
    """
    ``mask`` as integer array of 0 and 1.
    """
    result = _validated_integer_grid(name, mask)
    if result.max() > 1:
        raise errors.DataError('%s must contain only 0 and 1 but contains %d' % (name, result.max()))
    return result


def validated_hover_map(hover_map, name='hover map'):
    """
    ``hover_map`` as float array of shape ``(2, height, width)``.
    """
    result = np.asarray(hover_map, dtype=np.float64)
    if result.ndim != 3 or result.shape[0] != 2:
        raise errors.DataError('%s must have shape (2, height, width) but has shape %s' % (name, result.shape))
    validated_grid(name, result[HORIZONTAL])
    return result


def validate_same_shape(name, grid, other_name, other_grid):
    """
    Check that the spatial dimensions (the last two axes) of ``grid`` and
    ``other_grid`` match.

    :raises hovertools.errors.DimensionError: if the dimensions differ
    """
    shape = np.shape(grid)[-2:]
    other_shape = np.shape(other_grid)[-2:]
    if shape != other_shape:
        raise errors.DimensionError(
            '%s has %dx%d pixels but must match %s with %dx%d pixels'
            % (name, shape[1], shape[0], other_name, other_shape[1], other_shape[0]))


def instance_labels(instance_map):
    """
    Sorted positive labels present in ``instance_map``.

    >>> instance_labels([[0, 5], [2, 5]])
    [2, 5]
    """
    labels = np.unique(validated_instance_map(instance_map))
    return [int(label) for label in labels if label > 0]


def connected_components(mask, connectivity=DEFAULT_CONNECTIVITY):
    """
    Instance map where each maximal connected foreground region of ``mask``
    receives a distinct label ``1..N`` assigned in raster scan order of the
    region's first pixel.
    """
    assert connectivity in CONNECTIVITIES, 'connectivity=%r' % connectivity
    foreground = validated_grid('mask', mask) > 0
    labelled, instance_count = ndimage.label(foreground, structure=_STRUCTURES[connectivity])
    _log.debug('found %d connected components', instance_count)
    return relabel_sequential(labelled)


def relabel_sequential(instance_map):
    """
    ``instance_map`` with labels remapped to ``1..N`` in raster order of
    their first appearance; background remains 0.
    """
    im = validated_instance_map(instance_map)
    labels, first_indices, inverse = np.unique(im.ravel(), return_index=True, return_inverse=True)
    new_labels = np.zeros(len(labels), dtype=LABEL_DTYPE)
    positive = np.flatnonzero(labels > 0)
    order = np.argsort(first_indices[positive], kind='stable')
    new_labels[positive[order]] = np.arange(1, len(positive) + 1, dtype=LABEL_DTYPE)
    return new_labels[inverse.ravel()].reshape(im.shape)


def instance_stats(instance_map):
    """
    :py:class:`InstanceStats` for each positive label in ``instance_map``
    in ascending label order. The centroid is the unweighted mean of the
    member pixel coordinates.
    """
    im = validated_instance_map(instance_map)
    result = []
    for region in measure.regionprops(im):
        r0, c0, r1, c1 = region.bbox
        centroid_row, centroid_col = region.centroid
        result.append(InstanceStats(
            int(region.label), int(region.area), (float(centroid_row), float(centroid_col)), (r0, c0, r1 - 1, c1 - 1)))
    return result


def instance_areas(instance_map):
    """
    Array where index ``label`` holds the pixel count of ``label``.
    """
    im = validated_instance_map(instance_map)
    return np.bincount(im.ravel())


def remove_small_instances(instance_map, min_area):
    """
    ``instance_map`` with instances smaller than ``min_area`` pixels set to
    background and the remaining labels resequenced.
    """
    assert min_area >= 0, 'min_area=%r' % min_area
    im = validated_instance_map(instance_map)
    if min_area > 0:
        areas = instance_areas(im)
        too_small = areas < min_area
        too_small[0] = False
        if too_small.any():
            _log.debug('removing %d instance(s) with less than %d pixels', int(too_small.sum()), min_area)
            im = np.where(too_small[im], 0, im).astype(LABEL_DTYPE)
    return relabel_sequential(im)
