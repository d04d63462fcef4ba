"""
Ground truth targets derived from an annotated instance map: horizontal and
vertical distance maps, the nuclear binary map and the nuclear type map.
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
import math

import numpy as np
from scipy import ndimage

from hovertools import core
from hovertools import errors

_log = logging.getLogger("hovertools")


def _normalized_offsets(offsets):
    """
    ``offsets`` with negative values divided by the largest negative
    magnitude and positive values by the largest positive value.
    """
    result = offsets.astype(np.float64)
    negative = offsets < 0
    positive = offsets > 0
    if negative.any():
        result[negative] /= -offsets[negative].min()
    if positive.any():
        result[positive] /= offsets[positive].max()
    return result


def rounded_centre(value):
    """
    ``value`` rounded to the nearest integer with halves rounded up.

    >>> rounded_centre(2.5), rounded_centre(-0.5), rounded_centre(1.49)
    (3, 0, 1)
    """
    return int(math.floor(value + 0.5))


def hover_targets(instance_map):
    """
    Hover map of shape ``(2, height, width)`` for ``instance_map``.

    For each instance the centre of mass is rounded to the nearest pixel.
    The horizontal channel holds the column offset and the vertical channel
    the row offset to that centre, each side normalized separately so the
    values span ``[-1, 0]`` left of (above) the centre and ``[0, 1]`` right
    of (below) it. Background pixels are 0.
    """
    im = core.validated_instance_map(instance_map)
    result = np.zeros((2,) + im.shape, dtype=np.float64)
    for label_index, instance_slice in enumerate(ndimage.find_objects(im)):
        if instance_slice is None:
            continue
        label = label_index + 1
        is_instance = im[instance_slice] == label
        rows, cols = np.nonzero(is_instance)
        rows = rows + instance_slice[0].start
        cols = cols + instance_slice[1].start
        centre_row = rounded_centre(rows.mean())
        centre_col = rounded_centre(cols.mean())
        result[core.HORIZONTAL, rows, cols] = _normalized_offsets(cols - centre_col)
        result[core.VERTICAL, rows, cols] = _normalized_offsets(rows - centre_row)
    return result


def binary_target(instance_map):
    """
    Binary mask with 1 wherever ``instance_map`` holds an instance.
    """
    im = core.validated_instance_map(instance_map)
    return (im > 0).astype(core.LABEL_DTYPE)


def type_target(instance_map, types):
    """
    Type map where the pixels of each instance carry the class id
    ``types[label]``.

    :param types: mapping of instance label to class id >= 1
    :raises hovertools.errors.LabelError: if a label has no class id or the \
      class id is less than 1
    """
    assert types is not None

    im = core.validated_instance_map(instance_map)
    labels = core.instance_labels(im)
    lookup = np.zeros(int(im.max()) + 1, dtype=core.LABEL_DTYPE)
    for label in labels:
        class_id = types.get(label)
        if class_id is None:
            raise errors.LabelError('instance %d must have a nuclear type' % label)
        if class_id < 1:
            raise errors.LabelError(
                'nuclear type of instance %d must be at least 1 but is %s' % (label, class_id))
        lookup[label] = class_id
    return lookup[im]


def instance_types_from_type_map(instance_map, type_map):
    """
    :py:class:`collections.OrderedDict` mapping each label in
    ``instance_map`` to the most frequent non background class id of its
    pixels in ``type_map`` (ties go to the lower class id).

    :raises hovertools.errors.LabelError: if an instance has no pixel with \
      a class id other than background
    """
    im = core.validated_instance_map(instance_map)
    tm = core.validated_type_map(type_map)
    core.validate_same_shape('type map', tm, 'instance map', im)

    result = collections.OrderedDict()
    for label_index, instance_slice in enumerate(ndimage.find_objects(im)):
        if instance_slice is None:
            continue
        label = label_index + 1
        votes = np.bincount(tm[instance_slice][im[instance_slice] == label])
        votes[0] = 0
        if votes.sum() == 0:
            raise errors.LabelError('instance %d must overlap with at least one typed pixel' % label)
        result[label] = int(np.argmax(votes))
    return result
