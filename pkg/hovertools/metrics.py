"""
Evaluation metrics for nuclear instance segmentation and classification.

Segmentation quality is measured with DICE, DICE2, the aggregated Jaccard
index (AJI) and panoptic quality (PQ), which is the product of detection
quality (DQ) and segmentation quality (SQ). Classification is measured
with the combined detection and classification score ``F_c`` per nuclear
type, based on matching nuclear centroids within a radius.

All segmentation metrics consider two empty instance maps a perfect match
with a value of 1.
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
from scipy.spatial import distance

from hovertools import core
from hovertools import errors

_log = logging.getLogger("hovertools")

#: Type of a ground truth instance that has no annotated nuclear type.
UNLABELLED = -1

#: Matching radius in pixels at 20x magnification.
RADIUS_20X = 6
#: Matching radius in pixels at 40x magnification.
RADIUS_40X = 12
DEFAULT_RADIUS = RADIUS_40X

#: Weights for FP_c, FN_c, FP_d and FN_d in the ``F_c`` score.
CLASSIFICATION_WEIGHTS = (2, 2, 1, 1)

MatchedPair = collections.namedtuple('MatchedPair', ['gt_label', 'pred_label', 'iou'])
SegMatchResult = collections.namedtuple('SegMatchResult', ['pairs', 'unmatched_gt', 'unmatched_pred'])
SegMetrics = collections.namedtuple('SegMetrics', ['dice', 'dice2', 'aji', 'dq', 'sq', 'pq'])
DetectedPair = collections.namedtuple('DetectedPair', ['gt_index', 'pred_index', 'distance'])
DetMatchResult = collections.namedtuple('DetMatchResult', ['tp_pairs', 'fn_gt', 'fp_pred', 'radius'])
TypeCounts = collections.namedtuple('TypeCounts', ['tp_c', 'tn_c', 'fp_c', 'fn_c'])


class _Overlaps(object):
    """
    Areas of all ground truth and predicted instances and the pixel counts
    of all their non empty intersections.
    """
    def __init__(self, gt, pred):
        gt = core.validated_instance_map(gt, 'ground truth')
        pred = core.validated_instance_map(pred, 'prediction')
        core.validate_same_shape('prediction', pred, 'ground truth', gt)

        gt_labels, gt_first_indices, gt_areas = np.unique(gt.ravel(), return_index=True, return_counts=True)
        pred_labels, pred_first_indices, pred_areas = np.unique(pred.ravel(), return_index=True, return_counts=True)
        self.gt_areas = collections.OrderedDict(
            (int(label), int(area)) for label, area in zip(gt_labels, gt_areas) if label > 0)
        self.pred_areas = collections.OrderedDict(
            (int(label), int(area)) for label, area in zip(pred_labels, pred_areas) if label > 0)
        # Raster index of the first pixel of each instance.
        self.gt_first_indices = dict(
            (int(label), int(index)) for label, index in zip(gt_labels, gt_first_indices) if label > 0)
        self.pred_first_indices = dict(
            (int(label), int(index)) for label, index in zip(pred_labels, pred_first_indices) if label > 0)

        is_overlap = (gt > 0) & (pred > 0)
        pred_base = np.int64(pred.max()) + 1
        keys = gt[is_overlap].astype(np.int64) * pred_base + pred[is_overlap]
        unique_keys, counts = np.unique(keys, return_counts=True)
        # For each ground truth label the list of (pred_label, intersection) in ascending pred_label order.
        self.intersections = collections.defaultdict(list)
        for key, count in zip(unique_keys.tolist(), counts.tolist()):
            gt_label, pred_label = divmod(key, int(pred_base))
            self.intersections[gt_label].append((pred_label, count))

    def union(self, gt_label, pred_label, intersection):
        return self.gt_areas[gt_label] + self.pred_areas[pred_label] - intersection

    @property
    def is_empty(self):
        return not self.gt_areas and not self.pred_areas


def dice_score(x, y):
    """
    ``2|X∩Y| / (|X|+|Y|)`` for the foreground of ``x`` and ``y``; 1 if both
    are empty.

    >>> dice_score([[1, 1, 1, 1, 0, 0]], [[0, 0, 1, 1, 1, 1]])
    0.5
    """
    x_mask = core.validated_grid('x', x) > 0
    y_mask = core.validated_grid('y', y) > 0
    core.validate_same_shape('y', y_mask, 'x', x_mask)
    area_sum = int(x_mask.sum()) + int(y_mask.sum())
    if area_sum == 0:
        result = 1.0
    else:
        result = 2.0 * int(np.count_nonzero(x_mask & y_mask)) / area_sum
    return result


def dice2_score(gt, pred):
    """
    DICE aggregated over ground truth instances: each ground truth
    instance is paired with the prediction it shares the most pixels with
    (ties go to the prediction whose first pixel comes first in raster
    order); ``2|x∩y|`` and ``|x|+|y|`` are summed over all pairs, unpaired
    ground truth contributes ``|x|`` to the denominator only.
    """
    overlaps = _Overlaps(gt, pred)
    if overlaps.is_empty:
        return 1.0
    numerator = 0
    denominator = 0
    for gt_label, gt_area in overlaps.gt_areas.items():
        candidates = overlaps.intersections.get(gt_label)
        if candidates:
            pred_label, intersection = min(
                candidates, key=lambda candidate: (-candidate[1], overlaps.pred_first_indices[candidate[0]]))
            numerator += 2 * intersection
            denominator += gt_area + overlaps.pred_areas[pred_label]
        else:
            denominator += gt_area
    return numerator / denominator if denominator else 0.0


def _aji_order(overlaps):
    """
    Ground truth labels ordered by descending best IoU with any prediction
    and then by the raster position of their first pixel.
    """
    def best_iou(gt_label):
        return max(
            [intersection / overlaps.union(gt_label, pred_label, intersection)
             for pred_label, intersection in overlaps.intersections.get(gt_label, [])] or [0.0])

    return sorted(overlaps.gt_areas, key=lambda gt_label: (-best_iou(gt_label), overlaps.gt_first_indices[gt_label]))


def aji_score(gt, pred):
    """
    Aggregated Jaccard index. Ground truth instances are processed in
    descending order of their best IoU with any prediction, ties in raster
    order of their first pixel. Each is matched to the not yet used
    prediction with the highest IoU (ties go to the prediction whose first
    pixel comes first). Intersections and unions of matches are summed;
    ground truth without an overlapping unused prediction adds its area to
    the union and predictions that were never used add their areas to the
    union. The result does not depend on how instances are labelled.

    >>> aji_score([[1, 1, 1, 2, 2, 0]], [[1, 1, 1, 1, 1, 0]]) == aji_score([[2, 2, 2, 1, 1, 0]], [[1, 1, 1, 1, 1, 0]])
    True
    """
    overlaps = _Overlaps(gt, pred)
    if overlaps.is_empty:
        return 1.0
    used_pred_labels = set()
    intersection_sum = 0
    union_sum = 0
    for gt_label in _aji_order(overlaps):
        best_match = None
        best_key = None
        for pred_label, intersection in overlaps.intersections.get(gt_label, []):
            if pred_label not in used_pred_labels:
                union = overlaps.union(gt_label, pred_label, intersection)
                key = (-intersection / union, overlaps.pred_first_indices[pred_label])
                if best_key is None or key < best_key:
                    best_key = key
                    best_match = (pred_label, intersection, union)
        if best_match is None:
            union_sum += overlaps.gt_areas[gt_label]
        else:
            pred_label, intersection, union = best_match
            used_pred_labels.add(pred_label)
            intersection_sum += intersection
            union_sum += union
    for pred_label, pred_area in overlaps.pred_areas.items():
        if pred_label not in used_pred_labels:
            union_sum += pred_area
    return intersection_sum / union_sum


def match_iou(gt, pred):
    """
    :py:class:`SegMatchResult` pairing all ground truth and predicted
    instances with an IoU greater than 0.5. Such pairs are unique, so no
    assignment is necessary.
    """
    overlaps = _Overlaps(gt, pred)
    pairs = []
    for gt_label in overlaps.gt_areas:
        for pred_label, intersection in overlaps.intersections.get(gt_label, []):
            union = overlaps.union(gt_label, pred_label, intersection)
            if 2 * intersection > union:
                pairs.append(MatchedPair(gt_label, pred_label, intersection / union))
    matched_gt_labels = set(pair.gt_label for pair in pairs)
    matched_pred_labels = set(pair.pred_label for pair in pairs)
    assert len(matched_gt_labels) == len(pairs), 'pairs=%s' % pairs
    assert len(matched_pred_labels) == len(pairs), 'pairs=%s' % pairs
    unmatched_gt = [label for label in overlaps.gt_areas if label not in matched_gt_labels]
    unmatched_pred = [label for label in overlaps.pred_areas if label not in matched_pred_labels]
    return SegMatchResult(pairs, unmatched_gt, unmatched_pred)


def panoptic_quality(match):
    """
    Tuple ``(dq, sq, pq)`` for ``match``.

    >>> match = SegMatchResult([MatchedPair(1, 1, 0.7)], [2], [])
    >>> dq, sq, pq = panoptic_quality(match)
    >>> round(dq, 4), sq, round(pq, 4)
    (0.6667, 0.7, 0.4667)
    """
    assert match is not None
    tp_count = len(match.pairs)
    fn_count = len(match.unmatched_gt)
    fp_count = len(match.unmatched_pred)
    if tp_count == 0:
        if fn_count == 0 and fp_count == 0:
            dq = sq = 1.0
        else:
            dq = sq = 0.0
    else:
        dq = tp_count / (tp_count + 0.5 * fp_count + 0.5 * fn_count)
        sq = sum(pair.iou for pair in match.pairs) / tp_count
    return dq, sq, dq * sq


def segmentation_metrics(gt, pred):
    """
    :py:class:`SegMetrics` comparing the instance maps ``gt`` and ``pred``.
    """
    dq, sq, pq = panoptic_quality(match_iou(gt, pred))
    return SegMetrics(dice_score(gt, pred), dice2_score(gt, pred), aji_score(gt, pred), dq, sq, pq)


def dataset_average(per_image):
    """
    :py:class:`SegMetrics` holding the unweighted mean of each metric over
    ``per_image``. Note that the mean ``pq`` generally differs from the
    product of the mean ``dq`` and mean ``sq``.

    :raises hovertools.errors.DataError: if ``per_image`` is empty
    """
    assert per_image is not None
    if len(per_image) == 0:
        raise errors.DataError('metrics of at least 1 image must be available to compute an average')
    values = np.array([list(metrics) for metrics in per_image], dtype=np.float64)
    return SegMetrics(*[float(value) for value in values.mean(axis=0)])


def instance_centroids(instance_map):
    """
    Tuple ``(labels, centroids)`` with the sorted labels of
    ``instance_map`` and the ``(row, col)`` centroid of each of them.
    """
    stats = core.instance_stats(instance_map)
    return [stat.label for stat in stats], [stat.centroid for stat in stats]


def match_by_radius(gt_centroids, pred_centroids, radius=DEFAULT_RADIUS):
    """
    :py:class:`DetMatchResult` pairing ground truth and predicted centroids
    that are at most ``radius`` pixels apart. Candidate pairs are accepted
    greedily in ascending order of distance (ties go to the lower ground
    truth index, then the lower prediction index) as long as neither side
    has been matched already.
    """
    assert radius > 0, 'radius=%r' % radius
    gt_points = np.asarray(gt_centroids, dtype=np.float64).reshape(-1, 2)
    pred_points = np.asarray(pred_centroids, dtype=np.float64).reshape(-1, 2)
    tp_pairs = []
    if len(gt_points) and len(pred_points):
        distances = distance.cdist(gt_points, pred_points)
        gt_indices, pred_indices = np.nonzero(distances <= radius)
        candidate_distances = distances[gt_indices, pred_indices]
        is_gt_matched = np.zeros(len(gt_points), dtype=bool)
        is_pred_matched = np.zeros(len(pred_points), dtype=bool)
        for candidate in np.lexsort((pred_indices, gt_indices, candidate_distances)):
            gt_index = int(gt_indices[candidate])
            pred_index = int(pred_indices[candidate])
            if not is_gt_matched[gt_index] and not is_pred_matched[pred_index]:
                is_gt_matched[gt_index] = True
                is_pred_matched[pred_index] = True
                tp_pairs.append(DetectedPair(gt_index, pred_index, float(candidate_distances[candidate])))
    matched_gt = set(pair.gt_index for pair in tp_pairs)
    matched_pred = set(pair.pred_index for pair in tp_pairs)
    fn_gt = [index for index in range(len(gt_points)) if index not in matched_gt]
    fp_pred = [index for index in range(len(pred_points)) if index not in matched_pred]
    return DetMatchResult(tp_pairs, fn_gt, fp_pred, radius)


def _ratio(numerator, denominator):
    return numerator / denominator if denominator else 0.0


class ClassMetrics(object):
    """
    Detection and classification counts together with the scores derived
    from them.

    :param int tp_d: correctly detected instances
    :param int fp_d: predictions without ground truth
    :param int fn_d: ground truth without prediction
    :param int correct: detected instances with correct type (``A_c``)
    :param int incorrect: detected instances with wrong type (``B_c``), \
      already reduced by ``unlabelled``
    :param int unlabelled: detected instances whose ground truth has no type
    :param type_counts: mapping of type id to :py:class:`TypeCounts`, \
      with ``fn_c`` already reduced by ``unlabelled``
    """
    def __init__(self, tp_d, fp_d, fn_d, correct, incorrect, unlabelled, type_counts):
        self.tp_d = tp_d
        self.fp_d = fp_d
        self.fn_d = fn_d
        self.correct = correct
        self.incorrect = incorrect
        self.unlabelled = unlabelled
        self.type_counts = collections.OrderedDict(sorted(type_counts.items()))
        self.f_d = _ratio(2 * tp_d, 2 * tp_d + fp_d + fn_d)
        self.per_type = collections.OrderedDict(
            (type_id, self._f_c(counts)) for type_id, counts in self.type_counts.items())

    def _f_c(self, counts):
        fp_c_weight, fn_c_weight, fp_d_weight, fn_d_weight = CLASSIFICATION_WEIGHTS
        agreed = 2 * (counts.tp_c + counts.tn_c)
        return _ratio(
            agreed, agreed + fp_c_weight * counts.fp_c + fn_c_weight * counts.fn_c
            + fp_d_weight * self.fp_d + fn_d_weight * self.fn_d)

    @property
    def counts(self):
        """Tuple ``(tp_d, fp_d, fn_d)``."""
        return self.tp_d, self.fp_d, self.fn_d

    @property
    def types(self):
        return list(self.type_counts.keys())

    @property
    def f_c_all(self):
        """``F_c`` with the type extended to all types."""
        return _ratio(2 * self.correct, 2 * (self.correct + self.incorrect) + self.fp_d + self.fn_d)

    @property
    def accuracy(self):
        """Classification accuracy within correctly detected instances."""
        return _ratio(self.correct, self.correct + self.incorrect)

    def __repr__(self):
        return 'ClassMetrics(f_d=%r, per_type=%r, counts=%r)' % (self.f_d, dict(self.per_type), self.counts)


def _validated_type(type_id, types, name):
    if type_id not in types:
        raise errors.LabelError('%s type must be one of %s but is: %r' % (name, sorted(types), type_id))
    return type_id


def classification_scores(det, gt_types, pred_types, types):
    """
    :py:class:`ClassMetrics` for the detection result ``det``.

    For each type ``t`` the correctly detected pairs are split into
    correctly classified pairs of type ``t`` (``TP_c``), correctly
    classified pairs of other types (``TN_c``), incorrectly classified pairs
    predicted as ``t`` (``FP_c``) and incorrectly classified pairs
    predicted as another type (``FN_c``). Pairs whose ground truth is
    :py:data:`UNLABELLED` are counted as incorrectly classified and then
    subtracted from the incorrect count and from ``FN_c`` of every type.

    :param gt_types: type id or :py:data:`UNLABELLED` for each ground truth
    :param pred_types: type id for each prediction
    :param types: all valid type ids
    :raises hovertools.errors.LabelError: on type ids not in ``types``
    """
    assert det is not None
    type_ids = sorted(set(types))
    assert type_ids, 'types must not be empty'
    assert UNLABELLED not in type_ids

    correct = 0
    incorrect = 0
    unlabelled = 0
    raw_counts = collections.OrderedDict((type_id, [0, 0, 0, 0]) for type_id in type_ids)
    for pair in det.tp_pairs:
        gt_type = gt_types[pair.gt_index]
        pred_type = _validated_type(pred_types[pair.pred_index], type_ids, 'predicted')
        if gt_type == UNLABELLED:
            unlabelled += 1
        else:
            _validated_type(gt_type, type_ids, 'ground truth')
        is_correct = gt_type == pred_type
        if is_correct:
            correct += 1
        else:
            incorrect += 1
        for type_id, type_count in raw_counts.items():
            if is_correct:
                type_count[0 if pred_type == type_id else 1] += 1
            elif (pred_type == type_id) and (gt_type != UNLABELLED):
                type_count[2] += 1
            else:
                type_count[3] += 1
    for index in det.fp_pred:
        _validated_type(pred_types[index], type_ids, 'predicted')

    # Unlabelled ground truth cannot be judged, so it only affects detection.
    incorrect -= unlabelled
    type_counts = collections.OrderedDict(
        (type_id, TypeCounts(tp_c, tn_c, fp_c, fn_c - unlabelled))
        for type_id, (tp_c, tn_c, fp_c, fn_c) in raw_counts.items())
    return ClassMetrics(
        len(det.tp_pairs), len(det.fp_pred), len(det.fn_gt), correct, incorrect, unlabelled, type_counts)


def pool_class_metrics(per_image):
    """
    :py:class:`ClassMetrics` with the counts of all ``per_image`` metrics
    summed up, so scores are rates over the whole data set.

    :raises hovertools.errors.DataError: if ``per_image`` is empty
    """
    assert per_image is not None
    if len(per_image) == 0:
        raise errors.DataError('classification metrics of at least 1 image must be available to pool them')
    type_ids = per_image[0].types
    for metrics in per_image[1:]:
        assert metrics.types == type_ids, 'types=%r, expected=%r' % (metrics.types, type_ids)
    type_counts = collections.OrderedDict(
        (type_id, TypeCounts(*[sum(values) for values in zip(*[metrics.type_counts[type_id] for metrics in per_image])]))
        for type_id in type_ids)
    return ClassMetrics(
        sum(metrics.tp_d for metrics in per_image),
        sum(metrics.fp_d for metrics in per_image),
        sum(metrics.fn_d for metrics in per_image),
        sum(metrics.correct for metrics in per_image),
        sum(metrics.incorrect for metrics in per_image),
        sum(metrics.unlabelled for metrics in per_image),
        type_counts)


def decomposition_check(cm):
    """
    Tuple with ``F_c`` for all types and the product of ``F_d`` and the
    classification accuracy within correctly detected instances. Both are
    equal if the ground truth types are exhaustive.

    :raises hovertools.errors.LabelError: if ``cm`` involves unlabelled \
      ground truth
    """
    assert cm is not None
    if cm.unlabelled:
        raise errors.LabelError(
            'ground truth types must be exhaustive but %d detected instance(s) are unlabelled' % cm.unlabelled)
    return cm.f_c_all, cm.f_d * cm.accuracy
