"""
Synthetic scenes of elliptic nuclei with known instances and types.
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
import os

import numpy as np
from skimage import draw

from hovertools import config
from hovertools import core
from hovertools import errors
from hovertools import mapio
from hovertools import targetgen

_log = logging.getLogger("hovertools")

#: Scene created by :py:func:`synth_scene`; ``centroids`` has one
#: ``(row, col)`` per instance in label order, ``types`` maps labels to
#: class ids.
SynthScene = collections.namedtuple('SynthScene', ['instances', 'type_map', 'centroids', 'types'])


class SynthConfig(object):
    """
    Parameters for synthetic scenes.

    :param int height: image height in pixels
    :param int width: image width in pixels
    :param int count: number of nuclei per scene
    :param tuple radius_range: ``(lower, upper)`` limits for the semi axes \
      of the nuclei in pixels
    :param float overlap: fraction of a new nucleus that may cover earlier \
      nuclei; covered pixels remain with the earlier nucleus
    :param int class_count: number of nuclear types; types are drawn from \
      ``1..class_count``
    :param int seed: seed for the random generator
    :param int scene_count: number of scenes in a data set
    :param int max_attempts: attempts to place a nucleus before giving up
    :raises hovertools.errors.InterfaceError: on invalid values
    """
    KEYS = (
        'height', 'width', 'count', 'radius_range', 'overlap', 'class_count', 'seed', 'scene_count',
        'max_attempts')

    def __init__(self, height=256, width=256, count=30, radius_range=(6.0, 10.0), overlap=0.1, class_count=4,
                 seed=0, scene_count=1, max_attempts=100):
        if height < 1 or width < 1:
            raise errors.InterfaceError('image size is %dx%d but must be at least 1x1' % (width, height))
        if count < 0:
            raise errors.InterfaceError('count is %d but must be at least 0' % count)
        lower_radius, upper_radius = radius_range
        if not 0.0 < lower_radius <= upper_radius:
            raise errors.InterfaceError(
                'radius_range is %r...%r but must be positive with the lower limit not exceeding the upper limit'
                % (lower_radius, upper_radius))
        if count > 0 and 2 * lower_radius + 1 > min(height, width):
            raise errors.InterfaceError(
                'nuclei with a radius of at least %r must fit into an image of %dx%d pixels'
                % (lower_radius, width, height))
        if not 0.0 <= overlap < 1.0:
            raise errors.InterfaceError('overlap is %r but must be at least 0 and less than 1' % overlap)
        if class_count < 1:
            raise errors.InterfaceError('class_count is %d but must be at least 1' % class_count)
        if seed < 0:
            raise errors.InterfaceError('seed is %d but must be at least 0' % seed)
        if scene_count < 1:
            raise errors.InterfaceError('scene_count is %d but must be at least 1' % scene_count)
        if max_attempts < 1:
            raise errors.InterfaceError('max_attempts is %d but must be at least 1' % max_attempts)
        self.height = int(height)
        self.width = int(width)
        self.count = int(count)
        self.radius_range = (float(lower_radius), float(upper_radius))
        self.overlap = float(overlap)
        self.class_count = int(class_count)
        self.seed = int(seed)
        self.scene_count = int(scene_count)
        self.max_attempts = int(max_attempts)

    @staticmethod
    def from_settings(source):
        """
        :py:class:`SynthConfig` read from settings document ``source``;
        missing keys keep their default value.
        """
        settings = config.read_settings(source, SynthConfig.KEYS)
        keywords = {}
        for key, setting in settings.items():
            if key == 'radius_range':
                value = config.range_value(setting)
            elif key == 'overlap':
                value = config.float_value(setting)
            else:
                value = config.int_value(setting)
            keywords[key] = value
        try:
            return SynthConfig(**keywords)
        except errors.InterfaceError as error:
            error.prepend_message('cannot use synthetic scene settings', errors.Location(source))
            raise

    def as_settings(self):
        return collections.OrderedDict((key, getattr(self, key)) for key in SynthConfig.KEYS)

    def to_settings(self, target_path):
        config.write_settings(target_path, self.as_settings())

    def with_seed(self, seed):
        """
        Copy of this configuration using ``seed``.
        """
        keywords = self.as_settings()
        keywords['seed'] = seed
        return SynthConfig(**keywords)

    def __eq__(self, other):
        return isinstance(other, SynthConfig) and (self.as_settings() == other.as_settings())

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return 'SynthConfig(%s)' % ', '.join('%s=%r' % (key, value) for key, value in self.as_settings().items())


def _centre_range(extent, size):
    lower = min(extent, (size - 1) / 2)
    upper = max(size - 1 - extent, lower)
    return lower, upper


def _placed_region(cfg, instances, random):
    """
    Pixels of a new random nucleus that remain after removing those covered
    by earlier nuclei, or ``None`` if the nucleus must be rejected.
    """
    height, width = instances.shape
    lower_radius, upper_radius = cfg.radius_range
    row_radius, col_radius = random.uniform(lower_radius, upper_radius, size=2)
    rotation = random.uniform(-math.pi, math.pi)
    extent = max(row_radius, col_radius)
    centre_row = random.uniform(*_centre_range(extent, height))
    centre_col = random.uniform(*_centre_range(extent, width))
    rows, cols = draw.ellipse(centre_row, centre_col, row_radius, col_radius, shape=(height, width), rotation=rotation)
    result = None
    if rows.size > 0:
        region = np.zeros(instances.shape, dtype=bool)
        region[rows, cols] = True
        contested = region & (instances > 0)
        if contested.sum() <= cfg.overlap * region.sum():
            own = region & ~contested
            # Pixels lost to earlier nuclei must not split the new one.
            if own.any() and core.connected_components(own).max() == 1:
                result = own
    return result


def synth_scene(cfg, scene_index=0):
    """
    :py:class:`SynthScene` number ``scene_index`` for ``cfg``. Scenes are
    fully determined by ``cfg.seed`` and ``scene_index``.

    :raises hovertools.errors.PlacementError: if a nucleus cannot be \
      placed within ``cfg.max_attempts`` attempts
    """
    assert cfg is not None
    assert scene_index >= 0, 'scene_index=%r' % scene_index

    random = np.random.default_rng([cfg.seed, scene_index])
    instances = np.zeros((cfg.height, cfg.width), dtype=core.LABEL_DTYPE)
    types = collections.OrderedDict()
    for label in range(1, cfg.count + 1):
        region = None
        attempt = 0
        while region is None and attempt < cfg.max_attempts:
            region = _placed_region(cfg, instances, random)
            attempt += 1
        if region is None:
            raise errors.PlacementError(
                'cannot place nucleus %d of %d within %d attempts; reduce count or radius_range or increase overlap'
                % (label, cfg.count, cfg.max_attempts))
        instances[region] = label
        types[label] = int(random.integers(1, cfg.class_count + 1))
    centroids = np.array(
        [stats.centroid for stats in core.instance_stats(instances)], dtype=np.float64).reshape(-1, 2)
    type_map = targetgen.type_target(instances, types)
    _log.debug('created synthetic scene %d with %d nuclei', scene_index, cfg.count)
    return SynthScene(instances, type_map, centroids, types)


def synth_scenes(cfg):
    """
    All ``cfg.scene_count`` scenes of a synthetic data set.
    """
    for scene_index in range(cfg.scene_count):
        yield synth_scene(cfg, scene_index)


def scene_name(scene_index):
    """
    >>> scene_name(7)
    'scene_0007'
    """
    return 'scene_%04d' % scene_index


def write_scene(target_folder, name, scene):
    """
    Write ``scene`` as instance map, type map and annotations to
    ``target_folder`` and return the paths in this order.
    """
    instances_path = os.path.join(target_folder, name + '_instances.png')
    type_map_path = os.path.join(target_folder, name + '_types.png')
    annotations_path = os.path.join(target_folder, name + '_annotations.csv')
    mapio.write_label_map(instances_path, scene.instances)
    mapio.write_label_map(type_map_path, scene.type_map)
    mapio.write_annotations(annotations_path, mapio.annotations_for(scene.instances, scene.types))
    return instances_path, type_map_path, annotations_path
