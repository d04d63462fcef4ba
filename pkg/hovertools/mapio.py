"""
File formats for maps and annotations.

* Float maps are stored as raw little endian 32 bit floats in planar
  channel layout (:file:`*.f32`) together with a JSON descriptor that has
  the same name but the suffix :file:`.json`.
* Label maps (instance maps, type maps and binary masks) are stored as 16
  bit grayscale PNG images.
* Annotations are tables with the columns ``label``, ``type``,
  ``centroid_row`` and ``centroid_col``.

All files are written atomically: they either hold the complete new
content or remain unchanged.
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
import copy
import io
import json
import logging
import os

import numpy as np
import six
from PIL import Image

from hovertools import core
from hovertools import errors
from hovertools import losses
from hovertools import metrics
from hovertools import rowio
from hovertools import _tools

_log = logging.getLogger("hovertools")

FLOAT_MAP_SUFFIX = '.f32'
DESCRIPTOR_SUFFIX = '.json'
FLOAT_DTYPE_NAME = 'f32le'
_FLOAT_DTYPE = np.dtype('<f4')

#: Largest label a label map file can hold.
MAX_LABEL = 65535

#: Default nuclear types of annotation files.
DEFAULT_CLASS_NAMES = collections.OrderedDict([
    (1, 'miscellaneous'),
    (2, 'inflammatory'),
    (3, 'epithelial'),
    (4, 'spindle'),
])

#: Text used in annotation files for ground truth without type.
UNLABELLED_TEXT = 'unlabelled'

ANNOTATION_HEADER = ['label', 'type', 'centroid_row', 'centroid_col']

Annotation = collections.namedtuple('Annotation', ['label', 'type_id', 'centroid_row', 'centroid_col'])

HOVER_CHANNEL_NAMES = ['horizontal', 'vertical']


def descriptor_path(float_map_path):
    """
    Path of the JSON descriptor belonging to ``float_map_path``.

    >>> descriptor_path('scene_hover.f32')
    'scene_hover.json'
    """
    return _tools.with_suffix(float_map_path, DESCRIPTOR_SUFFIX)


def write_float_map(target_path, float_map, channel_names=None):
    """
    Write ``float_map`` of shape ``(height, width)`` or
    ``(channels, height, width)`` to ``target_path`` and its descriptor.
    """
    assert target_path is not None
    values = np.asarray(float_map)
    if values.ndim == 2:
        values = values[np.newaxis]
    if values.ndim != 3:
        raise errors.DataError('float map must have 2 or 3 dimensions but has %d' % values.ndim)
    channel_count, height, width = values.shape
    if channel_names is None:
        channel_names = ['channel_%d' % channel for channel in range(channel_count)]
    assert len(channel_names) == channel_count, 'channel_names=%r, channel_count=%d' % (channel_names, channel_count)

    descriptor = collections.OrderedDict([
        ('width', width),
        ('height', height),
        ('channels', channel_count),
        ('dtype', FLOAT_DTYPE_NAME),
        ('channel_names', list(channel_names)),
    ])
    with _tools.atomic_target(target_path) as target_stream:
        target_stream.write(np.ascontiguousarray(values, dtype=_FLOAT_DTYPE).tobytes())
    with _tools.atomic_target(descriptor_path(target_path), 'w', newline='\n') as descriptor_stream:
        descriptor_stream.write(six.text_type(json.dumps(descriptor, indent=2, sort_keys=True)) + '\n')
    _log.info('wrote float map with %d channel(s) to "%s"', channel_count, target_path)


def _read_descriptor(source_path):
    location = errors.Location(descriptor_path(source_path))
    try:
        with io.open(descriptor_path(source_path), 'r', encoding='utf-8') as descriptor_stream:
            descriptor = json.load(descriptor_stream)
    except ValueError as error:
        raise errors.DataFormatError('cannot parse float map descriptor: %s' % error, location, cause=error)
    try:
        width = int(descriptor['width'])
        height = int(descriptor['height'])
        channel_count = int(descriptor['channels'])
        dtype_name = descriptor['dtype']
        channel_names = list(descriptor.get('channel_names', []))
    except (KeyError, TypeError, ValueError) as error:
        raise errors.DataFormatError('float map descriptor must describe width, height, channels and dtype: %s' % error,
                                     location, cause=error)
    if dtype_name != FLOAT_DTYPE_NAME:
        raise errors.DataFormatError(
            'dtype is %s but must be %s' % (_tools.text_repr(dtype_name), _tools.text_repr(FLOAT_DTYPE_NAME)), location)
    if min(width, height, channel_count) < 1:
        raise errors.DataFormatError(
            'width, height and channels must be at least 1 but are %d, %d and %d' % (width, height, channel_count), location)
    if channel_names and len(channel_names) != channel_count:
        raise errors.DataFormatError(
            'channel_names must have %d entries but has %d' % (channel_count, len(channel_names)), location)
    return width, height, channel_count, channel_names


def read_float_map(source_path):
    """
    Tuple ``(values, channel_names)`` read from ``source_path``; ``values``
    is a float32 array of shape ``(channels, height, width)``.

    :raises hovertools.errors.DataFormatError: if the descriptor is broken \
      or does not match the size of the data
    """
    assert source_path is not None
    width, height, channel_count, channel_names = _read_descriptor(source_path)
    expected_size = width * height * channel_count * _FLOAT_DTYPE.itemsize
    with io.open(source_path, 'rb') as source_stream:
        data = source_stream.read()
    if len(data) != expected_size:
        raise errors.DataFormatError(
            'float map must have %d bytes for %dx%d pixels with %d channel(s) but has %d bytes'
            % (expected_size, width, height, channel_count, len(data)), errors.Location(source_path),
            'descriptor', errors.Location(descriptor_path(source_path)))
    values = np.frombuffer(data, dtype=_FLOAT_DTYPE).reshape(channel_count, height, width).astype(np.float32)
    _log.info('read float map with %d channel(s) from "%s"', channel_count, source_path)
    return values, channel_names


def write_label_map(target_path, label_map):
    """
    Write ``label_map`` to ``target_path`` as 16 bit grayscale PNG.

    :raises hovertools.errors.DataError: on labels beyond :py:data:`MAX_LABEL`
    """
    assert target_path is not None
    labels = core.validated_instance_map(label_map, 'label map')
    if labels.max() > MAX_LABEL:
        raise errors.DataError('label map must contain labels up to %d but contains %d' % (MAX_LABEL, labels.max()))
    image = Image.fromarray(np.ascontiguousarray(labels, dtype='<u2'))
    with _tools.atomic_target_path(target_path) as temp_path:
        image.save(temp_path, format='PNG')
    _log.info('wrote label map with %d label(s) to "%s"', int(labels.max()), target_path)


def read_label_map(source_path):
    """
    Integer label map read from the grayscale image ``source_path``.

    :raises hovertools.errors.DataFormatError: if the image cannot be read \
      or has more than 1 channel
    """
    assert source_path is not None
    location = errors.Location(source_path)
    try:
        with Image.open(source_path) as image:
            if image.mode not in ('1', 'L', 'P', 'I', 'I;16', 'I;16L', 'I;16B'):
                raise errors.DataFormatError(
                    'label map must be a single channel grayscale image but has mode %s' % image.mode, location)
            if image.mode == 'P':
                raise errors.DataFormatError('label map must not use a color palette', location)
            result = np.array(image).astype(core.LABEL_DTYPE)
    except (IOError, OSError, SyntaxError) as error:
        if isinstance(error, (IOError, OSError)) and not os.path.exists(source_path):
            raise
        raise errors.DataFormatError('cannot read label map: %s' % error, location, cause=error)
    _log.info('read label map from "%s"', source_path)
    return result


def read_probability_map(source_path):
    """
    Nuclear pixel probabilities read either from a single channel float map
    or from a label map where every positive label is taken as probability 1.
    """
    assert source_path is not None
    if _tools.suffix_of(source_path) == 'png':
        result = (read_label_map(source_path) > 0).astype(np.float64)
    else:
        values, _ = read_float_map(source_path)
        if values.shape[0] != 1:
            raise errors.DataFormatError(
                'probability map must have 1 channel but has %d' % values.shape[0], errors.Location(source_path))
        result = values[0].astype(np.float64)
    return result


def read_hover_map(source_path):
    """
    Hover map of shape ``(2, height, width)`` read from a float map.
    """
    values, _ = read_float_map(source_path)
    if values.shape[0] != 2:
        raise errors.DataFormatError(
            'hover map must have 2 channels but has %d' % values.shape[0], errors.Location(source_path))
    return values.astype(np.float64)


def read_type_probabilities(source_path, class_count=None):
    """
    Class probabilities of shape ``(K, height, width)`` read either from a
    float map with ``K`` channels or from a type map that is expanded to one
    channel per class with probability 1 for the class of each pixel.
    """
    assert source_path is not None
    if _tools.suffix_of(source_path) == 'png':
        type_map = read_label_map(source_path)
        actual_class_count = class_count if class_count is not None else max(2, int(type_map.max()) + 1)
        try:
            result = losses.one_hot(type_map, actual_class_count)
        except errors.DataError as error:
            error.prepend_message('cannot use type map', errors.Location(source_path))
            raise
    else:
        values, _ = read_float_map(source_path)
        if values.shape[0] < 2:
            raise errors.DataFormatError(
                'class probabilities must have at least 2 channels but have %d' % values.shape[0],
                errors.Location(source_path))
        if class_count is not None and values.shape[0] != class_count:
            raise errors.DataFormatError(
                'class probabilities must have %d channels but have %d' % (class_count, values.shape[0]),
                errors.Location(source_path))
        result = values.astype(np.float64)
    return result


def type_text(type_id):
    return UNLABELLED_TEXT if type_id == metrics.UNLABELLED else six.text_type(type_id)


def write_annotations(target_path, annotations):
    """
    Write ``annotations``, a sequence of :py:class:`Annotation`, to the
    comma separated file ``target_path``.
    """
    assert target_path is not None
    assert annotations is not None
    with _tools.atomic_target(target_path, 'w', newline='') as target_stream:
        with rowio.DelimitedRowWriter(target_stream) as annotation_writer:
            annotation_writer.write_row(ANNOTATION_HEADER)
            for annotation in annotations:
                annotation_writer.write_row([
                    six.text_type(annotation.label),
                    type_text(annotation.type_id),
                    repr(float(annotation.centroid_row)),
                    repr(float(annotation.centroid_col)),
                ])
    _log.info('wrote %d annotation(s) to "%s"', len(annotations), target_path)


def read_annotations(source, class_ids=None):
    """
    List of :py:class:`Annotation` read from ``source``. The first row must
    be the header. Types are either one of ``class_ids`` (default:
    :py:data:`DEFAULT_CLASS_NAMES`) or the word ``unlabelled``.

    :raises hovertools.errors.DataFormatError: on broken rows
    :raises hovertools.errors.LabelError: on duplicate labels or unknown types
    """
    assert source is not None
    valid_class_ids = set(class_ids if class_ids is not None else DEFAULT_CLASS_NAMES.keys())
    result = []
    label_to_location_map = {}
    location = errors.Location(source, has_cell=True)
    for row_index, row in enumerate(rowio.auto_rows(source)):
        row = [item.strip() for item in row]
        if row_index == 0:
            if row[:len(ANNOTATION_HEADER)] != ANNOTATION_HEADER:
                raise errors.DataFormatError(
                    'annotation header must be %s but is %s' % (ANNOTATION_HEADER, row), location)
        elif any(row):
            if len(row) != len(ANNOTATION_HEADER):
                raise errors.DataFormatError(
                    'annotation must have %d items but has %d: %s' % (len(ANNOTATION_HEADER), len(row), row), location)
            label_text, type_id_text, centroid_row_text, centroid_col_text = row
            try:
                label = int(label_text)
                centroid_row = float(centroid_row_text)
                centroid_col = float(centroid_col_text)
            except ValueError as error:
                raise errors.DataFormatError('cannot read annotation: %s' % error, location, cause=error)
            if label < 1:
                raise errors.LabelError('label must be at least 1 but is %d' % label, location)
            if type_id_text.lower() == UNLABELLED_TEXT:
                type_id = metrics.UNLABELLED
            else:
                try:
                    type_id = int(type_id_text)
                except ValueError:
                    type_id = None
                if type_id not in valid_class_ids:
                    raise errors.LabelError(
                        'type is %s but must be one of: %s or %s' % (
                            _tools.text_repr(type_id_text), ', '.join(six.text_type(class_id) for class_id in sorted(valid_class_ids)),
                            UNLABELLED_TEXT), location)
            previous_location = label_to_location_map.get(label)
            if previous_location is not None:
                raise errors.LabelError(
                    'label %d must be unique' % label, location, 'first annotation with this label', previous_location)
            label_to_location_map[label] = copy.copy(location)
            result.append(Annotation(label, type_id, centroid_row, centroid_col))
        location.advance_line()
    _log.info('read %d annotation(s) from %s', len(result), location.file_path)
    return result


def annotations_for(instance_map, types):
    """
    List of :py:class:`Annotation` for each instance in ``instance_map``
    with the type taken from the mapping ``types`` (label to type id).
    """
    result = []
    for stats in core.instance_stats(instance_map):
        type_id = types.get(stats.label, metrics.UNLABELLED)
        result.append(Annotation(stats.label, type_id, stats.centroid[0], stats.centroid[1]))
    return result
