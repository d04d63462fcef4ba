#!/usr/bin/env python
"""
Front end for command line application. This takes care of parsing the
command line options, calling the appropriate low level function, reporting
any errors and setting a proper exit code to be passed to the end user.
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

import argparse
import concurrent.futures
import json
import logging
import os
import sys

import six

from hovertools import errors
from hovertools import mapio
from hovertools import metrics
from hovertools import postproc
from hovertools import reports
from hovertools import synth
from hovertools import targetgen
from hovertools import tiling
from hovertools import _tools
from hovertools import __version__

DEFAULT_LOG_LEVEL = 'info'
assert DEFAULT_LOG_LEVEL in _tools.LOG_LEVEL_NAME_TO_LEVEL_MAP
DEFAULT_WORKERS = 1
RADIUS_CHOICES = (metrics.RADIUS_20X, metrics.RADIUS_40X)

_log = logging.getLogger("hovertools")


def _validate_same_shape(path, grid, other_path, other_grid):
    shape = grid.shape[-2:]
    other_shape = other_grid.shape[-2:]
    if shape != other_shape:
        raise errors.DimensionError(
            'image has %dx%d pixels but must match %dx%d pixels' % (shape[1], shape[0], other_shape[1], other_shape[0]),
            errors.Location(path), 'image to match', errors.Location(other_path))


def _scene_base_name(instances_path):
    """
    >>> _scene_base_name('/tmp/scene_0001_instances.png')
    'scene_0001'
    """
    result = os.path.splitext(os.path.basename(instances_path))[0]
    if result.endswith('_instances'):
        result = result[:-len('_instances')]
    return result


def _annotation_types(annotations):
    return dict((annotation.label, annotation.type_id) for annotation in annotations)


def _segmentation_metrics_for(gt_and_pred_path):
    gt_path, pred_path = gt_and_pred_path
    gt = mapio.read_label_map(gt_path)
    pred = mapio.read_label_map(pred_path)
    _validate_same_shape(pred_path, pred, gt_path, gt)
    return metrics.segmentation_metrics(gt, pred)


def _class_metrics_for(gt_and_pred_path_and_radius):
    gt_path, pred_path, radius = gt_and_pred_path_and_radius
    gt_annotations = mapio.read_annotations(gt_path)
    pred_annotations = mapio.read_annotations(pred_path)
    for annotation in pred_annotations:
        if annotation.type_id == metrics.UNLABELLED:
            raise errors.LabelError(
                'predicted nucleus %d must have a type' % annotation.label, errors.Location(pred_path))
    det = metrics.match_by_radius(
        [(annotation.centroid_row, annotation.centroid_col) for annotation in gt_annotations],
        [(annotation.centroid_row, annotation.centroid_col) for annotation in pred_annotations],
        radius)
    return metrics.classification_scores(
        det,
        [annotation.type_id for annotation in gt_annotations],
        [annotation.type_id for annotation in pred_annotations],
        mapio.DEFAULT_CLASS_NAMES.keys())


def _write_synth_scene(cfg_and_scene_index_and_folder):
    cfg, scene_index, target_folder = cfg_and_scene_index_and_folder
    scene = synth.synth_scene(cfg, scene_index)
    return synth.write_scene(target_folder, synth.scene_name(scene_index), scene)


class _ArgumentParser(argparse.ArgumentParser):
    """
    Parser that raises :py:exc:`hovertools.errors.ArgumentError` for broken
    arguments instead of printing the usage and exiting.
    """
    def error(self, message):
        raise errors.ArgumentError('%s: %s' % (self.prog, message))


class HovertoolsApp(object):
    """
    Command line application to prepare training targets, post process
    network predictions, evaluate results and create synthetic data.
    """
    def __init__(self):
        self._log = _log
        self.args = None
        self.command = None
        self.workers = DEFAULT_WORKERS

    def set_options(self, argv):
        """
        Reset options and set them again from argument list such as ``sys.argv[1:]``.
        """
        assert argv is not None

        description = 'prepare, post process and evaluate nuclear instance segmentation and classification'
        version = '%(prog)s ' + __version__

        common_parser = _ArgumentParser(add_help=False)
        common_parser.add_argument(
            '--log', metavar='LEVEL', choices=sorted(_tools.LOG_LEVEL_NAME_TO_LEVEL_MAP.keys()), dest='log_level',
            default=DEFAULT_LOG_LEVEL, help='set log level to LEVEL (default: %s)' % DEFAULT_LOG_LEVEL)
        common_parser.add_argument(
            '--workers', '-w', metavar='COUNT', dest='workers', default=DEFAULT_WORKERS, type=int,
            help='number of images to process concurrently (default: %d)' % DEFAULT_WORKERS)

        parser = _ArgumentParser(description=description)
        parser.add_argument('--version', action='version', version=version)
        subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
        subparsers.required = True

        gen_targets_parser = subparsers.add_parser(
            'gen-targets', parents=[common_parser],
            help='write hover, nuclear pixel and type targets for an instance map')
        gen_targets_parser.add_argument(
            '--instances', metavar='LABEL-MAP', required=True, help='PNG instance map')
        gen_targets_parser.add_argument(
            '--types', metavar='ANNOTATIONS', required=True, help='annotations with the type of each instance')
        gen_targets_parser.add_argument(
            '--out-dir', metavar='FOLDER', dest='out_dir', required=True, help='folder to write targets to')

        postproc_parser = subparsers.add_parser(
            'postproc', parents=[common_parser], help='turn network predictions into classified instances')
        postproc_parser.add_argument(
            '--np', metavar='MAP', dest='np_path', required=True,
            help='nuclear pixel probabilities as float map or binary PNG')
        postproc_parser.add_argument(
            '--hover', metavar='MAP', dest='hover_path', required=True, help='hover map as float map')
        postproc_parser.add_argument(
            '--nc', metavar='MAP', dest='nc_path', help='class probabilities as float map or PNG type map')
        postproc_parser.add_argument(
            '--config', '-c', metavar='SETTINGS', dest='config_path',
            help='post processing settings (default: built in defaults)')
        postproc_parser.add_argument(
            '--out', metavar='LABEL-MAP', dest='out_path', required=True, help='PNG instance map to write')
        postproc_parser.add_argument(
            '--types-out', metavar='ANNOTATIONS', dest='types_out_path',
            help='annotations with the predicted type of each instance; requires --nc')

        eval_seg_parser = subparsers.add_parser(
            'eval-seg', parents=[common_parser], help='compute segmentation metrics for instance maps')
        eval_seg_parser.add_argument(
            '--gt', metavar='LABEL-MAP', dest='gt_paths', nargs='+', required=True, help='ground truth instance maps')
        eval_seg_parser.add_argument(
            '--pred', metavar='LABEL-MAP', dest='pred_paths', nargs='+', required=True,
            help='predicted instance maps in the same order as the ground truth')
        eval_seg_parser.add_argument(
            '--out', metavar='REPORT', dest='out_path', required=True, help='report to write (*.csv or *.xlsx)')

        eval_class_parser = subparsers.add_parser(
            'eval-class', parents=[common_parser], help='compute detection and classification metrics')
        eval_class_parser.add_argument(
            '--gt-ann', metavar='ANNOTATIONS', dest='gt_paths', nargs='+', required=True,
            help='ground truth annotations')
        eval_class_parser.add_argument(
            '--pred-ann', metavar='ANNOTATIONS', dest='pred_paths', nargs='+', required=True,
            help='predicted annotations in the same order as the ground truth')
        eval_class_parser.add_argument(
            '--radius', metavar='PIXELS', type=int, choices=RADIUS_CHOICES, default=metrics.DEFAULT_RADIUS,
            help='maximum distance of matching centroids: %d at 20x, %d at 40x (default: %d)'
            % (metrics.RADIUS_20X, metrics.RADIUS_40X, metrics.DEFAULT_RADIUS))
        eval_class_parser.add_argument(
            '--out', metavar='REPORT', dest='out_path', required=True, help='report to write (*.csv or *.xlsx)')

        tile_plan_parser = subparsers.add_parser(
            'tile-plan', parents=[common_parser], help='write the tiles needed to process a large image')
        tile_plan_parser.add_argument('--width', metavar='PIXELS', type=int, required=True, help='image width')
        tile_plan_parser.add_argument('--height', metavar='PIXELS', type=int, required=True, help='image height')
        tile_plan_parser.add_argument(
            '--input', metavar='PIXELS', dest='input_size', type=int, default=tiling.DEFAULT_INPUT_SIZE,
            help='size of network input windows (default: %d)' % tiling.DEFAULT_INPUT_SIZE)
        tile_plan_parser.add_argument(
            '--output', metavar='PIXELS', dest='output_size', type=int, default=tiling.DEFAULT_OUTPUT_SIZE,
            help='size of network outputs (default: %d)' % tiling.DEFAULT_OUTPUT_SIZE)
        tile_plan_parser.add_argument(
            '--out', metavar='JSON', dest='out_path', help='file to write the plan to (default: standard output)')

        synth_parser = subparsers.add_parser(
            'synth', parents=[common_parser], help='create a synthetic data set')
        synth_parser.add_argument(
            '--config', '-c', metavar='SETTINGS', dest='config_path',
            help='synthetic scene settings (default: built in defaults)')
        synth_parser.add_argument(
            '--seed', '-s', metavar='SEED', type=int, help='seed for random numbers (default: from settings)')
        synth_parser.add_argument(
            '--out-dir', metavar='FOLDER', dest='out_dir', required=True, help='folder to write scenes to')

        args = parser.parse_args(argv[1:])

        self._log.setLevel(_tools.LOG_LEVEL_NAME_TO_LEVEL_MAP[args.log_level])
        if args.workers < 1:
            parser.error('option --workers is %d but must be at least 1' % args.workers)
        if args.command in ('eval-seg', 'eval-class') and len(args.gt_paths) != len(args.pred_paths):
            parser.error(
                '%d ground truth file(s) must be paired with the same number of prediction files but got %d'
                % (len(args.gt_paths), len(args.pred_paths)))
        if args.command == 'postproc' and args.types_out_path is not None and args.nc_path is None:
            parser.error('option --types-out requires option --nc')
        self.args = args
        self.command = args.command
        self.workers = args.workers

        self._log.debug('hovertools %s', __version__)
        self._log.debug('arguments=%s', args)

    def _mapped(self, function, items):
        """
        Results of ``function`` for all ``items`` in the order of ``items``,
        computed concurrently if more than 1 worker is requested.
        """
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            result = [function(item) for item in items]
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=self.workers) as executor:
                result = list(executor.map(function, items))
        return result

    def gen_targets(self):
        args = self.args
        instances = mapio.read_label_map(args.instances)
        annotations = mapio.read_annotations(args.types)
        try:
            type_map = targetgen.type_target(instances, _annotation_types(annotations))
        except errors.LabelError as error:
            error.prepend_message('cannot use annotations for "%s"' % args.instances, errors.Location(args.types))
            raise
        _tools.mkdirs(args.out_dir)
        base_name = _scene_base_name(args.instances)
        mapio.write_float_map(
            os.path.join(args.out_dir, base_name + '_hover' + mapio.FLOAT_MAP_SUFFIX),
            targetgen.hover_targets(instances), mapio.HOVER_CHANNEL_NAMES)
        mapio.write_label_map(os.path.join(args.out_dir, base_name + '_np.png'), targetgen.binary_target(instances))
        mapio.write_label_map(os.path.join(args.out_dir, base_name + '_types.png'), type_map)

    def postproc(self):
        args = self.args
        if args.config_path is not None:
            cfg = postproc.PostProcConfig.from_settings(args.config_path)
        else:
            cfg = postproc.PostProcConfig()
        np_prob = mapio.read_probability_map(args.np_path)
        hover = mapio.read_hover_map(args.hover_path)
        _validate_same_shape(args.hover_path, hover, args.np_path, np_prob)
        type_probs = None
        if args.nc_path is not None:
            type_probs = mapio.read_type_probabilities(args.nc_path)
            _validate_same_shape(args.nc_path, type_probs, args.np_path, np_prob)
        classified = postproc.run_pipeline(hover, postproc.ProbMaps(np_prob, type_probs), cfg)
        _log.info('found %d instance(s)', classified.instance_count)
        mapio.write_label_map(args.out_path, classified.instances)
        if args.types_out_path is not None:
            types = dict((label, instance_type.class_id) for label, instance_type in classified.types.items())
            mapio.write_annotations(args.types_out_path, mapio.annotations_for(classified.instances, types))

    def eval_seg(self):
        args = self.args
        per_image = self._mapped(_segmentation_metrics_for, zip(args.gt_paths, args.pred_paths))
        image_names = [os.path.basename(gt_path) for gt_path in args.gt_paths]
        average = metrics.dataset_average(per_image)
        _log.info('average pq=%.4f, aji=%.4f, dice=%.4f', average.pq, average.aji, average.dice)
        reports.write_segmentation_report(args.out_path, image_names, per_image)

    def eval_class(self):
        args = self.args
        per_image = self._mapped(
            _class_metrics_for, [(gt_path, pred_path, args.radius) for gt_path, pred_path in zip(args.gt_paths, args.pred_paths)])
        pooled = metrics.pool_class_metrics(per_image)
        _log.info('f_d=%.4f, f_c=%.4f', pooled.f_d, pooled.f_c_all)
        reports.write_class_report(args.out_path, pooled)

    def tile_plan(self):
        args = self.args
        plan = tiling.plan_tiles(args.width, args.height, tiling.TileGeometry(args.input_size, args.output_size))
        plan_text = six.text_type(json.dumps(plan.as_document(), indent=2)) + '\n'
        if args.out_path is not None:
            with _tools.atomic_target(args.out_path, 'w', newline='\n') as plan_stream:
                plan_stream.write(plan_text)
            _log.info('wrote plan with %d tile(s) to "%s"', len(plan.tiles), args.out_path)
        else:
            sys.stdout.write(plan_text)

    def synth(self):
        args = self.args
        if args.config_path is not None:
            cfg = synth.SynthConfig.from_settings(args.config_path)
        else:
            cfg = synth.SynthConfig()
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        _tools.mkdirs(args.out_dir)
        self._mapped(_write_synth_scene, [(cfg, scene_index, args.out_dir) for scene_index in range(cfg.scene_count)])
        _log.info('wrote %d synthetic scene(s) to "%s"', cfg.scene_count, args.out_dir)

    def run(self):
        assert self.command is not None
        command_to_function_map = {
            'gen-targets': self.gen_targets,
            'postproc': self.postproc,
            'eval-seg': self.eval_seg,
            'eval-class': self.eval_class,
            'tile-plan': self.tile_plan,
            'synth': self.synth,
        }
        command_to_function_map[self.command]()


def process(argv=None):
    """
    Do whatever the command line options ``argv`` request. In case of error,
    raise an appropriate :py:exc:`Exception`.

    Before calling this, module :py:mod:`logging` has to be set up properly.
    For example, by calling :py:func:`logging.basicConfig`.

    :return: 0
    """
    if argv is None:  # pragma: no cover
        argv = sys.argv
    assert argv

    hovertools_app = HovertoolsApp()
    hovertools_app.set_options(argv)
    hovertools_app.run()
    return 0


def _write_error_record(record, error_stream=None):
    target_stream = error_stream if error_stream is not None else sys.stderr
    target_stream.write(six.text_type(json.dumps(record, sort_keys=True)) + '\n')


def main(argv=None, error_stream=None):
    """
    Main routine that logs errors and won't ``sys.exit()`` unless ``argv`` asks for help or the version.
    Additionally each error is written to ``error_stream`` (default:
    ``sys.stderr``) as a single line JSON record.

    Before calling this, module ``logging`` has to be set up properly. For example, by calling
    ``logging.basicConfig()``.

    The result can be:

    * 0 - everything worked out fine
    * 1 - data or settings are broken and must be fixed
    * 2 - arguments passed in ``argv`` must be fixed
    * 3 - a proper environment for the program to run must be provided (files must exist,
      access rights must be provided, ...)
    * 4 - something unexpected happened and the program code must be fixed
    """
    if argv is None:  # pragma: no cover
        argv = sys.argv
    assert argv

    result = 1
    try:
        result = process(argv)
    except (EnvironmentError, OSError) as error:
        result = 3
        _log.error("%s", error)
        _write_error_record({'error': 'EnvironmentError', 'message': six.text_type(error)}, error_stream)
    except errors.ArgumentError as error:
        result = 2
        _log.error("%s", error)
        _write_error_record(error.as_record(), error_stream)
    except errors.HovertoolsError as error:
        _log.error("%s", error)
        _write_error_record(error.as_record(), error_stream)
    except Exception as error:  # pragma: no cover
        result = 4
        _log.exception("cannot handle unexpected error: %s", error)
        _write_error_record({'error': type(error).__name__, 'message': six.text_type(error)}, error_stream)
    return result


def main_for_script():  # pragma: no cover
    """
    Main routine that reports errors in options to `sys.stderr` and does `sys.exit()`.
    """
    logging.basicConfig(level=logging.INFO)
    sys.exit(main())


if __name__ == '__main__':
    main_for_script()
