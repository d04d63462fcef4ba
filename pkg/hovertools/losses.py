"""
Reference values of the training loss terms so implementations in any
framework can be checked against exact numbers.

The total loss is a weighted sum of six terms:

* ``a`` - mean squared error between predicted and ground truth hover maps
* ``b`` - mean squared error between the Sobel gradients of the hover maps
  within nuclear pixels
* ``c``, ``d`` - cross entropy and dice loss of the nuclear pixel branch
* ``e``, ``f`` - cross entropy and dice loss of the classification branch,
  only computed when nuclear types are available
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

from hovertools import core
from hovertools import errors
from hovertools import postproc

_log = logging.getLogger("hovertools")

#: Predictions are floored to this before taking the logarithm.
LOG_FLOOR = 1e-7
#: Smoothing constant of the dice loss.
DEFAULT_EPSILON = 1.0e-3
#: Maximum deviation of a probability stack from summing to 1.
PROBABILITY_SUM_TOLERANCE = 1e-5

TERM_NAMES = ('a', 'b', 'c', 'd', 'e', 'f')


class LossWeights(object):
    """
    Non negative weights of the loss terms. ``lambda_b`` defaults to 2, all
    others to 1.
    """
    def __init__(self, lambda_a=1.0, lambda_b=2.0, lambda_c=1.0, lambda_d=1.0, lambda_e=1.0, lambda_f=1.0):
        weights = (lambda_a, lambda_b, lambda_c, lambda_d, lambda_e, lambda_f)
        for name, weight in zip(TERM_NAMES, weights):
            if weight < 0:
                raise errors.InterfaceError('lambda_%s is %r but must be at least 0' % (name, weight))
        self.lambda_a, self.lambda_b, self.lambda_c, self.lambda_d, self.lambda_e, self.lambda_f = \
            [float(weight) for weight in weights]

    def as_dict(self):
        return collections.OrderedDict((name, getattr(self, 'lambda_' + name)) for name in TERM_NAMES)


def _validated_probability_stack(name, stack):
    result = np.asarray(stack, dtype=np.float64)
    if result.ndim != 3 or result.shape[0] < 2:
        raise errors.DataError('%s must have shape (K, height, width) with K >= 2 but has shape %s' % (name, result.shape))
    deviation = np.abs(result.sum(axis=0) - 1.0).max()
    if deviation > PROBABILITY_SUM_TOLERANCE:
        raise errors.DataError('%s must sum to 1 for each pixel but deviate by up to %g' % (name, deviation))
    return result


class LossInputs(object):
    """
    Predictions and ground truth for :py:func:`total_loss`.

    :param pred_hover: predicted hover map of shape ``(2, height, width)``
    :param pred_np: predicted nuclear pixel probability; the background \
      probability is ``1 - pred_np``
    :param pred_nc: predicted class probabilities of shape \
      ``(K, height, width)`` or ``None``
    :param gt_hover: ground truth hover map
    :param gt_np: ground truth binary mask
    :param gt_nc: ground truth type map or ``None``
    """
    def __init__(self, pred_hover, pred_np, gt_hover, gt_np, pred_nc=None, gt_nc=None, epsilon=DEFAULT_EPSILON):
        self.pred_hover = core.validated_hover_map(pred_hover, 'predicted hover map')
        self.gt_hover = core.validated_hover_map(gt_hover, 'ground truth hover map')
        self.pred_np = core.validated_grid('predicted nuclear pixel probabilities', np.asarray(pred_np, dtype=np.float64))
        if self.pred_np.min() < 0.0 or self.pred_np.max() > 1.0:
            raise errors.DataError('predicted nuclear pixel probabilities must be between 0 and 1')
        self.gt_np = core.validated_binary_mask(gt_np, 'ground truth binary mask')
        core.validate_same_shape('predicted hover map', self.pred_hover, 'ground truth hover map', self.gt_hover)
        core.validate_same_shape(
            'predicted nuclear pixel probabilities', self.pred_np, 'ground truth hover map', self.gt_hover)
        core.validate_same_shape('ground truth binary mask', self.gt_np, 'ground truth hover map', self.gt_hover)
        if (pred_nc is None) != (gt_nc is None):
            raise errors.InterfaceError('predicted and ground truth types must either both be specified or both be omitted')
        if pred_nc is not None:
            self.pred_nc = _validated_probability_stack('predicted class probabilities', pred_nc)
            self.gt_nc = core.validated_type_map(gt_nc, self.pred_nc.shape[0], 'ground truth type map')
            core.validate_same_shape('predicted class probabilities', self.pred_nc, 'ground truth hover map', self.gt_hover)
            core.validate_same_shape('ground truth type map', self.gt_nc, 'ground truth hover map', self.gt_hover)
        else:
            self.pred_nc = None
            self.gt_nc = None
        if epsilon <= 0:
            raise errors.InterfaceError('epsilon is %r but must be greater than 0' % epsilon)
        self.epsilon = epsilon

    @property
    def has_types(self):
        return self.gt_nc is not None


def one_hot(type_map, class_count):
    """
    Float array of shape ``(class_count, height, width)`` with 1 in the
    channel of each pixel's class id.
    """
    tm = core.validated_type_map(type_map, class_count)
    return (np.arange(class_count).reshape(-1, 1, 1) == tm[np.newaxis]).astype(np.float64)


def loss_a(pred_hover, gt_hover):
    """
    Mean squared error over both channels and all pixels.
    """
    pred = core.validated_hover_map(pred_hover, 'predicted hover map')
    gt = core.validated_hover_map(gt_hover, 'ground truth hover map')
    core.validate_same_shape('predicted hover map', pred, 'ground truth hover map', gt)
    return float(np.mean((pred - gt) ** 2))


def loss_a_gradient(pred_hover, gt_hover):
    """
    Derivative of :py:func:`loss_a` with respect to each value of
    ``pred_hover``.
    """
    pred = core.validated_hover_map(pred_hover, 'predicted hover map')
    gt = core.validated_hover_map(gt_hover, 'ground truth hover map')
    return 2.0 * (pred - gt) / pred.size


def loss_b(pred_hover, gt_hover, nuclear_set):
    """
    Mean squared error of the horizontal Sobel gradient of the horizontal
    channels plus that of the vertical Sobel gradient of the vertical
    channels, both restricted to the pixels of ``nuclear_set``.

    :raises hovertools.errors.DataError: if ``nuclear_set`` is empty
    """
    pred = core.validated_hover_map(pred_hover, 'predicted hover map')
    gt = core.validated_hover_map(gt_hover, 'ground truth hover map')
    nuclear = core.validated_binary_mask(nuclear_set, 'nuclear set') > 0
    core.validate_same_shape('predicted hover map', pred, 'ground truth hover map', gt)
    core.validate_same_shape('nuclear set', nuclear, 'ground truth hover map', gt)
    if not nuclear.any():
        raise errors.DataError('gradient loss requires at least 1 nuclear pixel')
    horizontal_error = postproc.horizontal_gradient(pred[core.HORIZONTAL]) - postproc.horizontal_gradient(gt[core.HORIZONTAL])
    vertical_error = postproc.vertical_gradient(pred[core.VERTICAL]) - postproc.vertical_gradient(gt[core.VERTICAL])
    return float(np.mean(horizontal_error[nuclear] ** 2) + np.mean(vertical_error[nuclear] ** 2))


def cross_entropy(pred_stack, gt_onehot):
    """
    ``-1/n Σ_i Σ_k X_ik log Y_ik`` over all ``n`` pixels with predictions
    ``Y`` floored to :py:data:`LOG_FLOOR`.
    """
    pred = np.asarray(pred_stack, dtype=np.float64)
    gt = np.asarray(gt_onehot, dtype=np.float64)
    if pred.shape != gt.shape:
        raise errors.DimensionError(
            'predicted probabilities have shape %s but must match ground truth with shape %s' % (pred.shape, gt.shape))
    if pred.ndim != 3 or pred.shape[0] < 2:
        raise errors.DataError('probabilities must have shape (K, height, width) with K >= 2 but have shape %s' % (pred.shape,))
    pixel_count = pred.shape[1] * pred.shape[2]
    return float(-np.sum(gt * np.log(np.maximum(pred, LOG_FLOOR))) / pixel_count)


def _binary_dice_loss(pred, gt, epsilon):
    numerator = 2.0 * np.sum(pred * gt) + epsilon
    denominator = np.sum(pred) + np.sum(gt) + epsilon
    return 1.0 - numerator / denominator


def dice_loss(pred_map, gt_map, epsilon=DEFAULT_EPSILON):
    """
    Soft dice loss ``1 - (2 Σ Y X + ε) / (Σ Y + Σ X + ε)``. For stacks of
    shape ``(K, height, width)`` the loss is computed for each foreground
    class 1..K-1 against the rest and averaged.
    """
    assert epsilon > 0, 'epsilon=%r' % epsilon
    pred = np.asarray(pred_map, dtype=np.float64)
    gt = np.asarray(gt_map, dtype=np.float64)
    if pred.shape != gt.shape:
        raise errors.DimensionError(
            'predicted map has shape %s but must match ground truth with shape %s' % (pred.shape, gt.shape))
    if pred.ndim == 2:
        result = _binary_dice_loss(pred, gt, epsilon)
    elif pred.ndim == 3 and pred.shape[0] >= 2:
        result = np.mean([_binary_dice_loss(pred[class_id], gt[class_id], epsilon) for class_id in range(1, pred.shape[0])])
    else:
        raise errors.DataError('map must have shape (height, width) or (K, height, width) but has shape %s' % (pred.shape,))
    return float(result)


def dice_loss_gradient(pred_map, gt_map, epsilon=DEFAULT_EPSILON):
    """
    Derivative of the 2D :py:func:`dice_loss` with respect to each value of
    ``pred_map``.
    """
    pred = np.asarray(pred_map, dtype=np.float64)
    gt = np.asarray(gt_map, dtype=np.float64)
    assert pred.ndim == 2 and pred.shape == gt.shape, 'pred.shape=%s, gt.shape=%s' % (pred.shape, gt.shape)
    numerator = 2.0 * np.sum(pred * gt) + epsilon
    denominator = np.sum(pred) + np.sum(gt) + epsilon
    return -(2.0 * gt * denominator - numerator) / denominator ** 2


def finite_difference(loss_function, values, index, delta=1e-6):
    """
    Central difference approximation of the derivative of
    ``loss_function(values)`` with respect to ``values[index]``.
    """
    assert delta > 0
    plus_values = np.array(values, dtype=np.float64)
    minus_values = np.array(values, dtype=np.float64)
    plus_values[index] += delta
    minus_values[index] -= delta
    return (loss_function(plus_values) - loss_function(minus_values)) / (2.0 * delta)


def combine_terms(terms, weights):
    """
    Weighted sum of the loss ``terms``, a mapping of term name to value.
    Terms that are missing do not contribute.
    """
    assert terms is not None
    assert weights is not None
    weight_map = weights.as_dict()
    return float(sum(weight_map[name] * value for name, value in terms.items()))


def total_loss(inputs, weights=None):
    """
    Tuple ``(total, terms)`` where ``terms`` is a
    :py:class:`collections.OrderedDict` mapping each computed term name to
    its unweighted value. Terms ``e`` and ``f`` are only computed if
    ``inputs`` has types.
    """
    assert inputs is not None
    actual_weights = weights if weights is not None else LossWeights()

    q = inputs.pred_np
    terms = collections.OrderedDict()
    terms['a'] = loss_a(inputs.pred_hover, inputs.gt_hover)
    terms['b'] = loss_b(inputs.pred_hover, inputs.gt_hover, inputs.gt_np)
    terms['c'] = cross_entropy(np.stack([1.0 - q, q]), one_hot(inputs.gt_np, 2))
    terms['d'] = dice_loss(q, inputs.gt_np, inputs.epsilon)
    if inputs.has_types:
        gt_onehot = one_hot(inputs.gt_nc, inputs.pred_nc.shape[0])
        terms['e'] = cross_entropy(inputs.pred_nc, gt_onehot)
        terms['f'] = dice_loss(inputs.pred_nc, gt_onehot, inputs.epsilon)
    result = combine_terms(terms, actual_weights)
    _log.debug('loss terms: %s', ', '.join('%s=%r' % item for item in terms.items()))
    return result, terms
