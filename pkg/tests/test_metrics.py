"""
Tests for :py:mod:`hovertools.metrics` module.
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

import unittest

import numpy as np

from hovertools import errors
from hovertools import metrics
from hovertools import synth
from tests import dev_test

_EPITHELIAL = 3
_INFLAMMATORY = 2
_TYPES = (1, 2, 3, 4)


def _over_penalization_scene():
    """
    Ground truth with a large nucleus, a small nucleus right next to it and
    another large nucleus, together with prediction A where the first
    nucleus spills 3 pixels into the small one and prediction B without
    spill. Neither prediction detects the small nucleus.
    """
    gt = np.zeros((10, 24), dtype=np.int32)
    gt[:, 0:10] = 1
    gt[0:4, 10:14] = 2
    gt[:, 14:24] = 3
    pred_b = np.where(gt == 2, 0, gt)
    pred_a = pred_b.copy()
    pred_a[0:3, 10] = 1
    return gt, pred_a, pred_b


def _det(pair_count, fp_count=0, fn_count=0):
    """
    Detection where the first ``pair_count`` ground truth and predicted
    indices are paired, followed by ``fn_count`` ground truth and
    ``fp_count`` predictions without partner.
    """
    pairs = [metrics.DetectedPair(index, index, 0.0) for index in range(pair_count)]
    fn_gt = list(range(pair_count, pair_count + fn_count))
    fp_pred = list(range(pair_count, pair_count + fp_count))
    return metrics.DetMatchResult(pairs, fn_gt, fp_pred, metrics.DEFAULT_RADIUS)


class DiceTest(unittest.TestCase):
    def test_can_compute_dice(self):
        mask = [[1, 1, 0], [0, 1, 0]]
        self.assertEqual(metrics.dice_score(mask, mask), 1.0)
        self.assertEqual(metrics.dice_score([[1, 1, 0, 0]], [[0, 0, 1, 1]]), 0.0)
        self.assertEqual(metrics.dice_score([[1, 1, 1, 1, 0, 0]], [[0, 0, 1, 1, 1, 1]]), 0.5)

    def test_can_compute_dice_of_empty_masks(self):
        self.assertEqual(metrics.dice_score(np.zeros((3, 3)), np.zeros((3, 3))), 1.0)

    def test_can_ignore_instance_identity(self):
        self.assertEqual(metrics.dice_score([[1, 2, 2, 0]], [[5, 5, 1, 0]]), 1.0)

    def test_fails_on_different_shapes(self):
        self.assertRaises(errors.DimensionError, metrics.dice_score, np.zeros((2, 2)), np.zeros((2, 3)))


class Dice2Test(unittest.TestCase):
    def test_can_compute_dice2(self):
        gt = np.array([[1, 1, 0, 2, 2]])
        self.assertEqual(metrics.dice2_score(gt, gt), 1.0)
        self.assertEqual(metrics.dice2_score(gt, np.zeros_like(gt)), 0.0)
        self.assertEqual(metrics.dice2_score(np.zeros_like(gt), np.zeros_like(gt)), 1.0)

    def test_can_prefer_larger_intersection(self):
        gt = [[1, 1, 1, 1, 0]]
        pred = [[2, 3, 3, 3, 3]]
        # Ground truth pairs with prediction 3: 2 * 3 / (4 + 4).
        self.assertEqual(metrics.dice2_score(gt, pred), 0.75)

    def test_can_over_penalize_boundary_spill(self):
        gt, pred_a, pred_b = _over_penalization_scene()
        self.assertAlmostEqual(metrics.dice2_score(gt, pred_a), 406 / 522)
        self.assertAlmostEqual(metrics.dice2_score(gt, pred_b), 400 / 416)
        self.assertLess(metrics.dice2_score(gt, pred_a), metrics.segmentation_metrics(gt, pred_a).pq)


class AjiTest(unittest.TestCase):
    def test_can_compute_aji(self):
        gt = np.array([[1, 1, 0, 2, 2]])
        self.assertEqual(metrics.aji_score(gt, gt), 1.0)
        self.assertEqual(metrics.aji_score([[1, 1, 0, 0]], [[0, 0, 1, 1]]), 0.0)
        self.assertEqual(metrics.aji_score(np.zeros((2, 2)), np.zeros((2, 2))), 1.0)

    def test_can_add_unused_predictions_to_union(self):
        gt = [[1, 1, 1, 0, 0]]
        pred = [[1, 1, 1, 0, 2]]
        self.assertEqual(metrics.aji_score(gt, pred), 0.75)

    def test_can_use_each_prediction_once(self):
        gt = [[1, 1, 2, 2, 0]]
        pred = [[1, 1, 1, 1, 0]]
        # Ground truth 2 finds prediction 1 already used.
        self.assertEqual(metrics.aji_score(gt, pred), 2 / 6)

    def test_can_ignore_ground_truth_labels_when_sharing_a_prediction(self):
        pred = [[1, 1, 1, 1, 1, 0]]
        # Ground truth with the higher IoU is matched first: 3 / (5 + 2).
        self.assertEqual(metrics.aji_score([[1, 1, 1, 2, 2, 0]], pred), 3 / 7)
        self.assertEqual(metrics.aji_score([[2, 2, 2, 1, 1, 0]], pred), 3 / 7)

    def test_can_ignore_prediction_labels(self):
        gt = [[1, 1, 1, 1, 0], [0, 0, 0, 0, 0], [2, 2, 2, 2, 2]]
        pred = [[3, 3, 5, 5, 0], [0, 0, 0, 0, 0], [5, 5, 5, 5, 5]]
        swapped_pred = [[5, 5, 3, 3, 0], [0, 0, 0, 0, 0], [3, 3, 3, 3, 3]]
        self.assertEqual(metrics.aji_score(gt, pred), metrics.aji_score(gt, swapped_pred))

    def test_can_match_brute_force_on_small_scenes(self):
        random = np.random.default_rng(20)
        gt = np.zeros((12, 12), dtype=np.int32)
        gt[1:6, 1:6] = 1
        gt[6:11, 4:10] = 2
        pred = np.zeros((12, 12), dtype=np.int32)
        pred[2:7, 0:5] = 4
        pred[5:12, 5:11] = 1
        self.assertAlmostEqual(metrics.aji_score(gt, pred), dev_test.brute_force_aji(gt, pred), places=12)
        for _ in range(20):
            gt = dev_test.random_instance_map(random, 12, 12)
            pred = dev_test.random_instance_map(random, 12, 12)
            self.assertAlmostEqual(metrics.aji_score(gt, pred), dev_test.brute_force_aji(gt, pred), places=12)


class MatchIouTest(unittest.TestCase):
    def test_can_match_identical_maps(self):
        gt = np.array([[1, 1, 0, 2, 2]])
        match = metrics.match_iou(gt, gt)
        self.assertEqual(match.pairs, [metrics.MatchedPair(1, 1, 1.0), metrics.MatchedPair(2, 2, 1.0)])
        self.assertEqual((match.unmatched_gt, match.unmatched_pred), ([], []))

    def test_can_reject_iou_of_exactly_one_half(self):
        match = metrics.match_iou([[1, 1]], [[1, 0]])
        self.assertEqual(match, metrics.SegMatchResult([], [1], [1]))

    def test_can_match_prediction_overlapping_two_nuclei(self):
        gt = [[1, 1, 1, 2, 2, 2, 2, 2, 2, 2]]
        pred = [[1, 1, 1, 1, 1, 0, 0, 0, 0, 0]]
        match = metrics.match_iou(gt, pred)
        self.assertEqual(match.pairs, [metrics.MatchedPair(1, 1, 0.6)])
        self.assertEqual(match.unmatched_gt, [2])
        self.assertEqual(match.unmatched_pred, [])


class PanopticQualityTest(unittest.TestCase):
    def test_can_compute_perfect_quality(self):
        match = metrics.SegMatchResult([metrics.MatchedPair(1, 1, 1.0), metrics.MatchedPair(2, 2, 1.0)], [], [])
        self.assertEqual(metrics.panoptic_quality(match), (1.0, 1.0, 1.0))

    def test_can_compute_quality_with_missed_nucleus(self):
        dq, sq, pq = metrics.panoptic_quality(metrics.SegMatchResult([metrics.MatchedPair(1, 1, 0.7)], [2], []))
        self.assertAlmostEqual(dq, 2 / 3)
        self.assertEqual(sq, 0.7)
        self.assertAlmostEqual(pq, 0.4667, places=4)
        self.assertEqual(pq, dq * sq)

    def test_can_compute_quality_without_true_positives(self):
        self.assertEqual(metrics.panoptic_quality(metrics.SegMatchResult([], [], [1, 2])), (0.0, 0.0, 0.0))
        self.assertEqual(metrics.panoptic_quality(metrics.SegMatchResult([], [], [])), (1.0, 1.0, 1.0))

    def test_can_change_pq_only_little_for_boundary_spill(self):
        gt, pred_a, pred_b = _over_penalization_scene()
        metrics_a = metrics.segmentation_metrics(gt, pred_a)
        metrics_b = metrics.segmentation_metrics(gt, pred_b)
        self.assertAlmostEqual(metrics_a.pq, 0.8 * (100 / 103 + 1.0) / 2)
        self.assertAlmostEqual(metrics_b.pq, 0.8)
        self.assertGreater(abs(metrics_a.dice2 - metrics_b.dice2), 0.15)
        self.assertLess(abs(metrics_a.pq - metrics_b.pq), 0.05)


class SegmentationMetricsPropertiesTest(unittest.TestCase):
    def test_can_keep_metric_identities(self):
        random = np.random.default_rng(1)
        for _ in range(200):
            gt = dev_test.random_instance_map(random, 16, 16)
            pred = dev_test.random_instance_map(random, 16, 16)
            seg_metrics = metrics.segmentation_metrics(gt, pred)
            self.assertEqual(seg_metrics.pq, seg_metrics.dq * seg_metrics.sq)
            for value in seg_metrics:
                self.assertTrue(0.0 <= value <= 1.0, 'seg_metrics=%s' % (seg_metrics,))
            if gt.any():
                self.assertEqual(metrics.segmentation_metrics(gt, gt), metrics.SegMetrics(1.0, 1.0, 1.0, 1.0, 1.0, 1.0))

    def test_can_ignore_label_permutation(self):
        random = np.random.default_rng(2)
        for seed in range(200):
            gt = synth.synth_scene(dev_test.small_scene_config(seed=seed)).instances
            pred = dev_test.shifted(gt, int(random.integers(-1, 2)), int(random.integers(-1, 2)))
            expected = metrics.segmentation_metrics(gt, pred)
            permuted_gt = dev_test.permuted_labels(gt, random)
            permuted_pred = dev_test.permuted_labels(pred, random)
            for actual in (
                    metrics.segmentation_metrics(permuted_gt, pred),
                    metrics.segmentation_metrics(gt, permuted_pred),
                    metrics.segmentation_metrics(permuted_gt, permuted_pred)):
                for actual_value, expected_value in zip(actual, expected):
                    self.assertAlmostEqual(actual_value, expected_value, places=12)

    def test_can_ignore_label_permutation_of_overlapping_maps(self):
        random = np.random.default_rng(4)
        for _ in range(300):
            gt = dev_test.random_instance_map(random, 10, 10, 6)
            pred = dev_test.random_instance_map(random, 10, 10, 6)
            expected = metrics.segmentation_metrics(gt, pred)
            actual = metrics.segmentation_metrics(dev_test.permuted_labels(gt, random), dev_test.permuted_labels(pred, random))
            for actual_value, expected_value in zip(actual, expected):
                self.assertAlmostEqual(actual_value, expected_value, places=12)

    def test_can_match_brute_force_oracles(self):
        random = np.random.default_rng(3)
        for _ in range(600):
            height = int(random.integers(1, 13))
            width = int(random.integers(1, 13))
            gt = dev_test.random_instance_map(random, height, width)
            pred = dev_test.random_instance_map(random, height, width)
            self.assertAlmostEqual(metrics.aji_score(gt, pred), dev_test.brute_force_aji(gt, pred), places=12)
            match = metrics.match_iou(gt, pred)
            expected_pairs = dev_test.brute_force_iou_pairs(gt, pred)
            self.assertEqual(
                [(pair.gt_label, pair.pred_label) for pair in match.pairs],
                [(gt_label, pred_label) for gt_label, pred_label, _ in expected_pairs])
            for pair, (_, _, expected_iou) in zip(match.pairs, expected_pairs):
                self.assertAlmostEqual(pair.iou, expected_iou, places=12)


class DatasetAverageTest(unittest.TestCase):
    def test_can_average_single_image(self):
        seg_metrics = metrics.SegMetrics(0.9, 0.8, 0.7, 0.6, 0.5, 0.3)
        self.assertEqual(metrics.dataset_average([seg_metrics]), seg_metrics)

    def test_can_average_pq(self):
        average = metrics.dataset_average([
            metrics.SegMetrics(1.0, 1.0, 1.0, 0.5, 0.8, 0.4),
            metrics.SegMetrics(1.0, 1.0, 1.0, 1.0, 0.6, 0.6),
        ])
        self.assertAlmostEqual(average.pq, 0.5)

    def test_can_average_pq_independent_of_dq_and_sq(self):
        average = metrics.dataset_average([
            metrics.SegMetrics(1.0, 1.0, 1.0, 1.0, 0.5, 0.5),
            metrics.SegMetrics(1.0, 1.0, 1.0, 0.5, 1.0, 0.5),
        ])
        self.assertEqual(average.pq, 0.5)
        self.assertEqual(average.dq * average.sq, 0.5625)

    def test_fails_on_empty_list(self):
        dev_test.assert_raises_and_fnmatches(
            self, errors.DataError, 'metrics of at least 1 image must be available*', metrics.dataset_average, [])


class MatchByRadiusTest(unittest.TestCase):
    def test_can_match_identical_centroids(self):
        centroids = [(10.0, 10.0), (30.0, 5.0)]
        det = metrics.match_by_radius(centroids, centroids)
        self.assertEqual(det.tp_pairs, [metrics.DetectedPair(0, 0, 0.0), metrics.DetectedPair(1, 1, 0.0)])
        self.assertEqual((det.fn_gt, det.fp_pred), ([], []))

    def test_can_reject_centroid_outside_radius(self):
        det = metrics.match_by_radius([(0.0, 0.0)], [(0.0, 12.001)], 12)
        self.assertEqual((det.tp_pairs, det.fn_gt, det.fp_pred), ([], [0], [0]))

    def test_can_match_nearest_first(self):
        det = metrics.match_by_radius([(0.0, 0.0), (0.0, 8.0)], [(0.0, 3.0)], 6)
        self.assertEqual(det.tp_pairs, [metrics.DetectedPair(0, 0, 3.0)])
        self.assertEqual(det.fn_gt, [1])

    def test_can_break_distance_tie_by_lower_index(self):
        det = metrics.match_by_radius([(0.0, 0.0), (0.0, 6.0)], [(0.0, 3.0)], 6)
        self.assertEqual(det.tp_pairs, [metrics.DetectedPair(0, 0, 3.0)])

    def test_can_handle_empty_centroids(self):
        det = metrics.match_by_radius([], [(1.0, 1.0)])
        self.assertEqual((det.tp_pairs, det.fn_gt, det.fp_pred), ([], [], [0]))

    def test_can_keep_one_to_one_pairs_within_radius(self):
        random = np.random.default_rng(4)
        for _ in range(50):
            gt_centroids = random.uniform(0, 64, size=(int(random.integers(0, 12)), 2))
            pred_centroids = random.uniform(0, 64, size=(int(random.integers(0, 12)), 2))
            det = metrics.match_by_radius(gt_centroids, pred_centroids, metrics.RADIUS_20X)
            self.assertEqual(len(set(pair.gt_index for pair in det.tp_pairs)), len(det.tp_pairs))
            self.assertEqual(len(set(pair.pred_index for pair in det.tp_pairs)), len(det.tp_pairs))
            self.assertEqual(len(det.tp_pairs) + len(det.fn_gt), len(gt_centroids))
            self.assertEqual(len(det.tp_pairs) + len(det.fp_pred), len(pred_centroids))
            for pair in det.tp_pairs:
                self.assertLessEqual(pair.distance, metrics.RADIUS_20X)

    def test_can_compute_instance_centroids(self):
        labels, centroids = metrics.instance_centroids([[0, 2, 2, 2], [5, 0, 0, 0]])
        self.assertEqual(labels, [2, 5])
        self.assertEqual(centroids, [(0.0, 2.0), (1.0, 0.0)])


class ClassificationScoresTest(unittest.TestCase):
    def test_can_score_perfect_classification(self):
        cm = metrics.classification_scores(_det(3), [1, 1, 1], [1, 1, 1], [1])
        self.assertEqual(cm.f_d, 1.0)
        self.assertEqual(cm.per_type[1], 1.0)
        self.assertEqual(metrics.decomposition_check(cm), (1.0, 1.0))

    def test_can_score_missing_detections(self):
        cm = metrics.classification_scores(_det(0, fp_count=1, fn_count=1), [1], [2], _TYPES)
        self.assertEqual(cm.f_d, 0.0)
        self.assertEqual(list(cm.per_type.values()), [0.0, 0.0, 0.0, 0.0])
        self.assertEqual(metrics.decomposition_check(cm), (0.0, 0.0))

    def test_can_score_wrong_type(self):
        gt_types = [_EPITHELIAL, _EPITHELIAL, _INFLAMMATORY, _INFLAMMATORY]
        pred_types = [_EPITHELIAL, _INFLAMMATORY, _INFLAMMATORY, _INFLAMMATORY]
        cm = metrics.classification_scores(_det(4), gt_types, pred_types, _TYPES)
        self.assertEqual(cm.type_counts[_EPITHELIAL], metrics.TypeCounts(1, 2, 0, 1))
        self.assertEqual(cm.per_type[_EPITHELIAL], 0.75)
        self.assertEqual(cm.type_counts[_INFLAMMATORY], metrics.TypeCounts(2, 1, 1, 0))
        self.assertEqual(cm.per_type[_INFLAMMATORY], 0.75)
        for counts in cm.type_counts.values():
            self.assertEqual(sum(counts), cm.tp_d)

    def test_can_decompose_combined_score(self):
        cm = metrics.classification_scores(_det(4, fp_count=1, fn_count=1), [1, 1, 2, 2, 3], [1, 1, 2, 1, 4], _TYPES)
        self.assertEqual((cm.correct, cm.incorrect), (3, 1))
        f_c_all, f_d_times_accuracy = metrics.decomposition_check(cm)
        self.assertAlmostEqual(f_c_all, 0.6, places=12)
        self.assertAlmostEqual(f_d_times_accuracy, 0.6, places=12)

    def test_can_decompose_random_outcomes(self):
        random = np.random.default_rng(5)
        for _ in range(100):
            pair_count = int(random.integers(0, 20))
            fp_count = int(random.integers(0, 5))
            fn_count = int(random.integers(0, 5))
            gt_types = random.integers(1, 5, size=pair_count + fn_count).tolist()
            pred_types = random.integers(1, 5, size=pair_count + fp_count).tolist()
            cm = metrics.classification_scores(_det(pair_count, fp_count, fn_count), gt_types, pred_types, _TYPES)
            f_c_all, f_d_times_accuracy = metrics.decomposition_check(cm)
            self.assertAlmostEqual(f_c_all, f_d_times_accuracy, places=12)
            for f_c in cm.per_type.values():
                self.assertTrue(0.0 <= f_c <= 1.0)

    def test_can_correct_for_unlabelled_ground_truth(self):
        gt_types = [3, metrics.UNLABELLED, 2, 2, 1]
        pred_types = [3, 3, 2, 4]
        cm = metrics.classification_scores(_det(4, fn_count=1), gt_types, pred_types, _TYPES)
        self.assertEqual((cm.correct, cm.incorrect, cm.unlabelled), (2, 1, 1))
        self.assertEqual(cm.type_counts[1], metrics.TypeCounts(0, 2, 0, 1))
        self.assertEqual(cm.type_counts[2], metrics.TypeCounts(1, 1, 0, 1))
        self.assertEqual(cm.type_counts[3], metrics.TypeCounts(1, 1, 0, 1))
        self.assertEqual(cm.type_counts[4], metrics.TypeCounts(0, 2, 1, 0))
        for type_id in _TYPES:
            self.assertAlmostEqual(cm.per_type[type_id], 4 / 7)
            self.assertEqual(sum(cm.type_counts[type_id]), cm.tp_d - cm.unlabelled)
        self.assertAlmostEqual(cm.f_d, 8 / 9)
        self.assertAlmostEqual(cm.f_c_all, 4 / 7)
        self.assertAlmostEqual(cm.accuracy, 2 / 3)

    def test_fails_on_decomposition_with_unlabelled_ground_truth(self):
        cm = metrics.classification_scores(_det(1), [metrics.UNLABELLED], [1], _TYPES)
        dev_test.assert_raises_and_fnmatches(
            self, errors.LabelError, 'ground truth types must be exhaustive but 1 detected instance(s) are unlabelled',
            metrics.decomposition_check, cm)

    def test_fails_on_unknown_predicted_type(self):
        dev_test.assert_raises_and_fnmatches(
            self, errors.LabelError, 'predicted type must be one of * but is: 7',
            metrics.classification_scores, _det(1), [1], [7], _TYPES)
        dev_test.assert_raises_and_fnmatches(
            self, errors.LabelError, 'predicted type must be one of * but is: 9',
            metrics.classification_scores, _det(0, fp_count=1), [], [9], _TYPES)

    def test_can_pool_counts(self):
        first = metrics.classification_scores(_det(2, fn_count=1), [1, 2, 1], [1, 1], _TYPES)
        second = metrics.classification_scores(_det(1, fp_count=2), [2], [2, 3, 3], _TYPES)
        pooled = metrics.pool_class_metrics([first, second])
        self.assertEqual(pooled.counts, (3, 2, 1))
        self.assertEqual((pooled.correct, pooled.incorrect), (2, 1))
        self.assertEqual(pooled.type_counts[1], metrics.TypeCounts(1, 1, 1, 0))
        self.assertAlmostEqual(pooled.f_d, 6 / 9)

    def test_fails_on_pooling_nothing(self):
        self.assertRaises(errors.DataError, metrics.pool_class_metrics, [])


if __name__ == '__main__':
    unittest.main()
