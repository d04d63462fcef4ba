"""
Post processing that turns predicted maps into classified nuclear instances.

The nuclear pixel probability ``q`` is thresholded with ``h`` to obtain the
nuclear mask. The Sobel gradients of the hover map channels are min-max
normalized and combined by a pixelwise maximum into ``S_m``. Markers are
the nuclear pixels where ``S_m`` does not exceed ``k``, the energy
landscape is ``(1 - [S_m > k]) * [q > h]``, and a marker controlled
watershed floods the nuclear mask. Finally each instance gets the class
most of its pixels vote for.

Besides the Sobel based variant, markers can be obtained by thresholding
the square sum of the hover channels and the energy can be derived from
that square sum.
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
import heapq
import itertools
import logging

import numpy as np
from scipy import ndimage

from hovertools import config
from hovertools import core
from hovertools import errors
from hovertools import _tools

_log = logging.getLogger("hovertools")

ENERGY_SOBEL = 'sobel'
ENERGY_SQSUM = 'sqsum'
ENERGY_MODES = (ENERGY_SOBEL, ENERGY_SQSUM)

MARKER_SOBEL = 'sobel'
MARKER_THRESHOLD = 'threshold'
MARKER_MODES = (MARKER_SOBEL, MARKER_THRESHOLD)

SOBEL_KSIZES = (3, 5)

# Smoothing and derivative parts of the separable Sobel kernels.
_SOBEL_PARTS = {
    3: (np.array([1.0, 2.0, 1.0]), np.array([-1.0, 0.0, 1.0])),
    5: (np.array([1.0, 4.0, 6.0, 4.0, 1.0]), np.array([-1.0, -2.0, 0.0, 2.0, 1.0])),
}

# Neighbour offsets in the order the watershed visits them.
_NEIGHBOUR_OFFSETS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

#: Class id and mean class probability assigned to an instance.
InstanceType = collections.namedtuple('InstanceType', ['class_id', 'probability'])


class PostProcConfig(object):
    """
    Parameters of the post processing.

    :param float h: threshold for the nuclear pixel probability
    :param float k: threshold for the normalized Sobel energy
    :param int sobel_ksize: size of the Sobel kernel, 3 or 5
    :param int min_marker_area: markers with less pixels are removed
    :param int min_instance_area: instances with less pixels are removed
    :param str energy_mode: ``'sobel'`` or ``'sqsum'``
    :param str marker_mode: ``'sobel'`` or ``'threshold'``
    :param tuple threshold_marker_range: ``(lower, upper)`` limits of the \
      square sum for threshold markers
    :raises hovertools.errors.InterfaceError: on invalid values
    """
    KEYS = (
        'h', 'k', 'sobel_ksize', 'min_marker_area', 'min_instance_area', 'energy_mode', 'marker_mode',
        'threshold_marker_range')

    def __init__(self, h=0.5, k=0.4, sobel_ksize=3, min_marker_area=10, min_instance_area=10,
                 energy_mode=ENERGY_SOBEL, marker_mode=MARKER_SOBEL, threshold_marker_range=(0.0, 0.4)):
        if not 0.0 < h < 1.0:
            raise errors.InterfaceError('h is %r but must be greater than 0 and less than 1' % h)
        if not 0.0 < k < 1.0:
            raise errors.InterfaceError('k is %r but must be greater than 0 and less than 1' % k)
        if sobel_ksize not in SOBEL_KSIZES:
            raise errors.InterfaceError(
                'sobel_ksize is %r but must be one of: %s' % (sobel_ksize, _tools.human_readable_list(SOBEL_KSIZES)))
        if min_marker_area < 0:
            raise errors.InterfaceError('min_marker_area is %r but must be at least 0' % min_marker_area)
        if min_instance_area < 0:
            raise errors.InterfaceError('min_instance_area is %r but must be at least 0' % min_instance_area)
        if energy_mode not in ENERGY_MODES:
            raise errors.InterfaceError(
                'energy_mode is %s but must be one of: %s'
                % (_tools.text_repr(energy_mode), _tools.human_readable_list(ENERGY_MODES)))
        if marker_mode not in MARKER_MODES:
            raise errors.InterfaceError(
                'marker_mode is %s but must be one of: %s'
                % (_tools.text_repr(marker_mode), _tools.human_readable_list(MARKER_MODES)))
        lower, upper = threshold_marker_range
        if not lower < upper:
            raise errors.InterfaceError(
                'threshold_marker_range is %s but the lower limit must be less than the upper limit'
                % _tools.range_text(lower, upper))
        self.h = float(h)
        self.k = float(k)
        self.sobel_ksize = int(sobel_ksize)
        self.min_marker_area = int(min_marker_area)
        self.min_instance_area = int(min_instance_area)
        self.energy_mode = energy_mode
        self.marker_mode = marker_mode
        self.threshold_marker_range = (float(lower), float(upper))

    @staticmethod
    def from_settings(source):
        """
        :py:class:`PostProcConfig` read from settings document ``source``;
        missing keys keep their default value.
        """
        settings = config.read_settings(source, PostProcConfig.KEYS)
        keywords = {}
        for key, setting in settings.items():
            if key in ('h', 'k'):
                value = config.float_value(setting)
            elif key in ('sobel_ksize', 'min_marker_area', 'min_instance_area'):
                value = config.int_value(setting)
            elif key == 'energy_mode':
                value = config.choice_value(setting, ENERGY_MODES)
            elif key == 'marker_mode':
                value = config.choice_value(setting, MARKER_MODES)
            else:
                assert key == 'threshold_marker_range', 'key=%r' % key
                value = config.range_value(setting)
            keywords[key] = value
        try:
            return PostProcConfig(**keywords)
        except errors.InterfaceError as error:
            error.prepend_message('cannot use post processing settings', errors.Location(source))
            raise

    def as_settings(self):
        """
        :py:class:`collections.OrderedDict` with all settings in
        :py:attr:`KEYS` order.
        """
        return collections.OrderedDict((key, getattr(self, key)) for key in PostProcConfig.KEYS)

    def to_settings(self, target_path):
        config.write_settings(target_path, self.as_settings())

    def __eq__(self, other):
        return isinstance(other, PostProcConfig) and (self.as_settings() == other.as_settings())

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return 'PostProcConfig(%s)' % ', '.join(
            '%s=%r' % (key, value) for key, value in self.as_settings().items())


class ProbMaps(object):
    """
    Predicted probabilities: the nuclear pixel probability ``np_prob`` (which
    is clamped to ``[0, 1]``) and optionally the per class probabilities
    ``type_probs`` of shape ``(K, height, width)`` including background as
    class 0.
    """
    def __init__(self, np_prob, type_probs=None):
        self.np_prob = np.clip(
            core.validated_grid('nuclear pixel probabilities', np.asarray(np_prob, dtype=np.float64)), 0.0, 1.0)
        if type_probs is not None:
            type_probs = np.asarray(type_probs, dtype=np.float64)
            if type_probs.ndim != 3 or type_probs.shape[0] < 2:
                raise errors.DataError(
                    'type probabilities must have shape (K, height, width) with K >= 2 but have shape %s'
                    % (type_probs.shape,))
            core.validate_same_shape(
                'type probabilities', type_probs, 'nuclear pixel probabilities', self.np_prob)
        self.type_probs = type_probs


class ClassifiedInstances(object):
    """
    Instance map together with a mapping of each label to its
    :py:class:`InstanceType`. Without type probabilities :py:attr:`types`
    is empty.
    """
    def __init__(self, instances, types=None):
        self.instances = instances
        self.types = types if types is not None else collections.OrderedDict()

    @property
    def instance_count(self):
        return int(self.instances.max()) if self.instances.size else 0


#: All intermediate maps computed by :py:func:`run_pipeline_stages`.
PipelineResult = collections.namedtuple(
    'PipelineResult', ['classified', 'nuclear_mask', 'sobel_energy', 'markers', 'energy'])


def _sobel_gradients(channel, ksize):
    """
    Signed horizontal and vertical Sobel derivatives of ``channel`` using
    mirror padding that does not repeat the edge pixel.
    """
    smoothing, derivative = _SOBEL_PARTS[ksize]
    horizontal_kernel = np.outer(smoothing, derivative)
    vertical_kernel = np.outer(derivative, smoothing)
    horizontal = ndimage.correlate(channel, horizontal_kernel, mode='mirror')
    vertical = ndimage.correlate(channel, vertical_kernel, mode='mirror')
    return horizontal, vertical


def horizontal_gradient(channel, ksize=3):
    """Signed Sobel derivative of ``channel`` along the columns."""
    return _sobel_gradients(np.asarray(channel, dtype=np.float64), ksize)[0]


def vertical_gradient(channel, ksize=3):
    """Signed Sobel derivative of ``channel`` along the rows."""
    return _sobel_gradients(np.asarray(channel, dtype=np.float64), ksize)[1]


def min_max_normalized(grid):
    """
    ``grid`` scaled to ``[0, 1]``; a constant grid results in all zeros.
    """
    minimum = grid.min()
    maximum = grid.max()
    if maximum > minimum:
        result = (grid - minimum) / (maximum - minimum)
    else:
        result = np.zeros_like(grid, dtype=np.float64)
    return result


def sobel_energy(hover_map, cfg):
    """
    ``S_m``: pixelwise maximum of the min-max normalized Sobel gradient
    magnitudes of the horizontal channel along the columns and the vertical
    channel along the rows.
    """
    hover = core.validated_hover_map(hover_map)
    horizontal = np.abs(horizontal_gradient(hover[core.HORIZONTAL], cfg.sobel_ksize))
    vertical = np.abs(vertical_gradient(hover[core.VERTICAL], cfg.sobel_ksize))
    return np.maximum(min_max_normalized(horizontal), min_max_normalized(vertical))


def square_sum(hover_map):
    """Pixelwise sum of the squared hover channels."""
    hover = core.validated_hover_map(hover_map)
    return hover[core.HORIZONTAL] ** 2 + hover[core.VERTICAL] ** 2


def pseudo_distance_energy(hover_map):
    """
    ``1 - (x² + y²)`` clamped to ``[0, 1]``: high at instance centres and
    low at their boundaries.
    """
    return np.clip(1.0 - square_sum(hover_map), 0.0, 1.0)


def threshold(grid, limit):
    """
    Binary mask with 1 where ``grid`` is strictly greater than ``limit``.

    >>> threshold([[0.3, 0.5, 0.7]], 0.5).tolist()
    [[0, 0, 1]]
    """
    return (np.asarray(grid) > limit).astype(core.LABEL_DTYPE)


def compute_markers(np_prob, s_m, cfg, hover_map=None):
    """
    Instance map of watershed markers.

    In ``'sobel'`` marker mode these are the connected components of
    ``max(0, [q > h] - [S_m > k])``. In ``'threshold'`` marker mode these
    are the connected components of the nuclear pixels whose hover square
    sum lies within ``cfg.threshold_marker_range``, which requires
    ``hover_map``. In both modes markers with less than
    ``cfg.min_marker_area`` pixels are removed.
    """
    q = core.validated_grid('nuclear pixel probabilities', np_prob)
    nuclear_mask = threshold(q, cfg.h)
    if cfg.marker_mode == MARKER_SOBEL:
        s_m = core.validated_grid('sobel energy', s_m)
        core.validate_same_shape('sobel energy', s_m, 'nuclear pixel probabilities', q)
        marker_mask = np.maximum(nuclear_mask - threshold(s_m, cfg.k), 0)
    else:
        assert cfg.marker_mode == MARKER_THRESHOLD, 'cfg.marker_mode=%r' % cfg.marker_mode
        if hover_map is None:
            raise errors.InterfaceError('threshold markers require a hover map')
        core.validate_same_shape('hover map', hover_map, 'nuclear pixel probabilities', q)
        lower, upper = cfg.threshold_marker_range
        distances = square_sum(hover_map)
        marker_mask = nuclear_mask * ((distances >= lower) & (distances <= upper))
    result = core.remove_small_instances(core.connected_components(marker_mask), cfg.min_marker_area)
    _log.debug('computed %d marker(s)', int(result.max()))
    return result


def energy_landscape(np_prob, s_m, cfg, hover_map=None):
    """
    Energy to flood: ``(1 - [S_m > k]) * [q > h]`` in ``'sobel'`` energy
    mode or :py:func:`pseudo_distance_energy` masked by ``[q > h]`` in
    ``'sqsum'`` energy mode, which requires ``hover_map``.
    """
    q = core.validated_grid('nuclear pixel probabilities', np_prob)
    nuclear_mask = threshold(q, cfg.h)
    if cfg.energy_mode == ENERGY_SOBEL:
        s_m = core.validated_grid('sobel energy', s_m)
        core.validate_same_shape('sobel energy', s_m, 'nuclear pixel probabilities', q)
        result = (1 - threshold(s_m, cfg.k)) * nuclear_mask
    else:
        assert cfg.energy_mode == ENERGY_SQSUM, 'cfg.energy_mode=%r' % cfg.energy_mode
        if hover_map is None:
            raise errors.InterfaceError('square sum energy requires a hover map')
        core.validate_same_shape('hover map', hover_map, 'nuclear pixel probabilities', q)
        result = pseudo_distance_energy(hover_map) * nuclear_mask
    return result.astype(np.float64)


def watershed(markers, energy, mask):
    """
    Marker controlled priority flood watershed on ``energy`` restricted to
    ``mask``.

    The queue is seeded with the unlabelled mask pixels next to a marker in
    raster order. The pixel with the highest energy is popped first with
    ties going to the pixel queued earliest. A popped pixel receives the
    label of the pixel that queued it and queues its own unlabelled
    neighbours. Mask components without any marker become additional
    instances with labels following the highest marker label. Neighbours
    use 8-connectivity.

    :raises hovertools.errors.DataError: if a marker pixel lies outside \
      ``mask``
    """
    labels = core.validated_instance_map(markers).copy()
    height, width = labels.shape
    energy = core.validated_grid('energy', np.asarray(energy, dtype=np.float64))
    mask = core.validated_binary_mask(mask, 'watershed mask')
    core.validate_same_shape('energy', energy, 'markers', labels)
    core.validate_same_shape('watershed mask', mask, 'markers', labels)
    if np.any((labels > 0) & (mask == 0)):
        raise errors.DataError('all markers must lie inside the watershed mask')

    flat_labels = labels.ravel().tolist()
    flat_energy = energy.ravel().tolist()
    flat_mask = mask.ravel().tolist()
    is_queued = [label > 0 for label in flat_labels]
    queue = []
    age = itertools.count()

    def queue_neighbours(index, label):
        row, col = divmod(index, width)
        for row_offset, col_offset in _NEIGHBOUR_OFFSETS_8:
            neighbour_row = row + row_offset
            neighbour_col = col + col_offset
            if 0 <= neighbour_row < height and 0 <= neighbour_col < width:
                neighbour_index = neighbour_row * width + neighbour_col
                if flat_mask[neighbour_index] and not is_queued[neighbour_index]:
                    is_queued[neighbour_index] = True
                    heapq.heappush(queue, (-flat_energy[neighbour_index], next(age), neighbour_index, label))

    for index in np.flatnonzero(labels).tolist():
        queue_neighbours(index, flat_labels[index])
    while queue:
        _, _, index, label = heapq.heappop(queue)
        flat_labels[index] = label
        queue_neighbours(index, label)

    result = np.array(flat_labels, dtype=core.LABEL_DTYPE).reshape(height, width)
    orphans = core.connected_components((mask > 0) & (result == 0))
    orphan_count = int(orphans.max())
    if orphan_count:
        _log.debug('adding %d mask component(s) without marker as instances', orphan_count)
        label_offset = int(result.max())
        result = np.where(orphans > 0, orphans + label_offset, result).astype(core.LABEL_DTYPE)
    return result


def classify_instances(instance_map, type_probs):
    """
    :py:class:`ClassifiedInstances` where each instance gets the class most
    of its pixels have the highest probability for.

    Background (class 0) only is a candidate if no pixel votes for a
    foreground class. Ties are broken by the higher mean probability of the
    tied classes over the instance, then by the lower class id. In case all
    pixels vote for background, the foreground class with the highest mean
    probability is assigned.
    """
    im = core.validated_instance_map(instance_map)
    probs = np.asarray(type_probs, dtype=np.float64)
    if probs.ndim != 3 or probs.shape[0] < 2:
        raise errors.DataError(
            'type probabilities must have shape (K, height, width) with K >= 2 but have shape %s' % (probs.shape,))
    core.validate_same_shape('type probabilities', probs, 'instance map', im)
    class_count = probs.shape[0]
    votes_map = np.argmax(probs, axis=0)

    types = collections.OrderedDict()
    for label_index, instance_slice in enumerate(ndimage.find_objects(im)):
        if instance_slice is None:
            continue
        label = label_index + 1
        is_instance = im[instance_slice] == label
        votes = np.bincount(votes_map[instance_slice][is_instance], minlength=class_count)
        mean_probs = probs[(slice(None),) + instance_slice][:, is_instance].mean(axis=1)
        if votes[1:].sum() > 0:
            candidates = [
                class_id for class_id in range(1, class_count) if votes[class_id] == votes[1:].max()]
        else:
            candidates = list(range(1, class_count))
        # Highest mean probability first, lower class id on ties.
        class_id = min(candidates, key=lambda candidate: (-mean_probs[candidate], candidate))
        types[label] = InstanceType(int(class_id), float(mean_probs[class_id]))
    return ClassifiedInstances(im, types)


def run_pipeline_stages(hover_map, maps, cfg):
    """
    Like :py:func:`run_pipeline` but returning a :py:class:`PipelineResult`
    that also holds the intermediate maps.
    """
    assert maps is not None
    assert cfg is not None

    hover = core.validated_hover_map(hover_map)
    core.validate_same_shape('hover map', hover, 'nuclear pixel probabilities', maps.np_prob)
    q = maps.np_prob
    nuclear_mask = threshold(q, cfg.h)
    s_m = sobel_energy(hover, cfg)
    markers = compute_markers(q, s_m, cfg, hover)
    energy = energy_landscape(q, s_m, cfg, hover)
    instances = watershed(markers, energy, nuclear_mask)
    instances = core.relabel_sequential(core.remove_small_instances(instances, cfg.min_instance_area))
    if maps.type_probs is not None:
        classified = classify_instances(instances, maps.type_probs)
    else:
        classified = ClassifiedInstances(instances)
    _log.debug('post processing found %d instance(s)', classified.instance_count)
    return PipelineResult(classified, nuclear_mask, s_m, markers, energy)


def run_pipeline(hover_map, maps, cfg):
    """
    :py:class:`ClassifiedInstances` for the predicted ``hover_map`` and
    :py:class:`ProbMaps` ``maps`` using :py:class:`PostProcConfig` ``cfg``.
    Classification is skipped if ``maps`` has no type probabilities.
    """
    return run_pipeline_stages(hover_map, maps, cfg).classified
