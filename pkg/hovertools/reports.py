"""
Reports of evaluation results as comma separated text or Excel documents.
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

import logging

import six

from hovertools import mapio
from hovertools import metrics
from hovertools import rowio
from hovertools import _tools

_log = logging.getLogger("hovertools")

#: Name of the row holding the data set average in segmentation reports.
AVERAGE_ROW_NAME = 'average'

SEGMENTATION_HEADER = ['image'] + list(metrics.SegMetrics._fields)

CLASS_HEADER = ['measure', 'type', 'value', 'tp', 'tn', 'fp', 'fn']


def segmentation_rows(image_names, per_image):
    """
    Rows of a segmentation report: the header, one row for each image and
    a final row with the average over all images.

    >>> rows = segmentation_rows(['a', 'b'], [
    ...     metrics.SegMetrics(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    ...     metrics.SegMetrics(0.5, 0.5, 0.5, 0.5, 0.5, 0.25)])
    >>> rows[-1]
    ['average', 0.75, 0.75, 0.75, 0.75, 0.75, 0.625]
    """
    assert len(image_names) == len(per_image), 'image_names=%r, per_image=%r' % (image_names, per_image)
    result = [list(SEGMENTATION_HEADER)]
    for image_name, image_metrics in zip(image_names, per_image):
        result.append([six.text_type(image_name)] + [float(value) for value in image_metrics])
    average = metrics.dataset_average(per_image)
    result.append([AVERAGE_ROW_NAME] + [float(value) for value in average])
    return result


def _type_name(type_id, class_names):
    return class_names.get(type_id, six.text_type(type_id))


def class_rows(class_metrics, class_names=None):
    """
    Rows of a classification report for the pooled ``class_metrics``: the
    header, detection quality, ``F_c`` for each type, ``F_c`` for all types
    together, the accuracy within detected instances and, unless some
    ground truth is unlabelled, the product of detection quality and
    accuracy.
    """
    assert class_metrics is not None
    actual_class_names = class_names if class_names is not None else mapio.DEFAULT_CLASS_NAMES
    cm = class_metrics
    result = [
        list(CLASS_HEADER),
        ['f_d', '', cm.f_d, cm.tp_d, '', cm.fp_d, cm.fn_d],
    ]
    for type_id, f_c in cm.per_type.items():
        counts = cm.type_counts[type_id]
        result.append(['f_c', _type_name(type_id, actual_class_names), f_c] + list(counts))
    result.append(['f_c', 'all', cm.f_c_all, cm.correct, '', cm.incorrect, ''])
    result.append(['accuracy', '', cm.accuracy, cm.correct, '', cm.incorrect, ''])
    result.append(['unlabelled', '', cm.unlabelled, '', '', '', ''])
    if cm.unlabelled == 0:
        _, detection_times_accuracy = metrics.decomposition_check(cm)
        result.append(['f_d*accuracy', '', detection_times_accuracy, '', '', '', ''])
    return [[_cell(item) for item in row] for row in result]


def _cell(item):
    if isinstance(item, six.string_types):
        result = six.text_type(item)
    elif isinstance(item, bool) or isinstance(item, six.integer_types):
        result = int(item)
    else:
        result = float(item)
    return result


def write_rows(target_path, rows):
    """
    Write ``rows`` to ``target_path`` as Excel document if the suffix is
    :file:`.xlsx` and as comma separated text otherwise.
    """
    assert target_path is not None
    with _tools.atomic_target_path(target_path) as temp_path:
        with rowio.row_writer(temp_path) as report_writer:
            report_writer.write_rows(rows)
    _log.info('wrote report with %d row(s) to "%s"', len(rows), target_path)


def write_segmentation_report(target_path, image_names, per_image):
    write_rows(target_path, segmentation_rows(image_names, per_image))


def write_class_report(target_path, class_metrics, class_names=None):
    write_rows(target_path, class_rows(class_metrics, class_names))
