"""
Flat key-value settings documents.

A settings document is a table where each row holds a key and a value.
Empty rows and rows whose first cell starts with ``#`` are ignored. Because
the rows are read using :py:func:`hovertools.rowio.auto_rows` the document
can be stored as CSV, ODS or Excel file:

.. code-block:: none

    # post processing settings
    h,0.5
    k,0.4
    energy_mode,sobel
    threshold_marker_range,0.0...0.4
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
import logging

import six

from hovertools import errors
from hovertools import rowio
from hovertools import _tools

_log = logging.getLogger("hovertools")

#: A single value read from a settings document together with its location.
Setting = collections.namedtuple('Setting', ['key', 'value', 'location'])


def read_settings(source, valid_keys):
    """
    :py:class:`collections.OrderedDict` mapping each key in the settings
    document ``source`` to a :py:class:`Setting`.

    :param source: path or text stream of the settings document
    :param valid_keys: keys the caller knows how to handle
    :raises hovertools.errors.InterfaceError: on unknown or duplicate keys \
      or on rows with other than 2 cells
    """
    assert source is not None
    assert valid_keys

    result = collections.OrderedDict()
    location = errors.Location(source, has_cell=True)
    for row in rowio.auto_rows(source):
        non_empty_row = list(row)
        while non_empty_row and (non_empty_row[-1].strip() == ''):
            non_empty_row.pop()
        if non_empty_row and not non_empty_row[0].strip().startswith('#'):
            if len(non_empty_row) != 2:
                raise errors.InterfaceError(
                    'setting must have exactly 2 items (key and value) but has %d: %s'
                    % (len(non_empty_row), non_empty_row), location)
            key = non_empty_row[0].strip()
            value = non_empty_row[1].strip()
            if key not in valid_keys:
                raise errors.InterfaceError(
                    'setting %s must be one of: %s' % (_tools.text_repr(key), _tools.human_readable_list(sorted(valid_keys))),
                    location)
            previous_setting = result.get(key)
            if previous_setting is not None:
                raise errors.InterfaceError(
                    'setting %s must be specified only once' % _tools.text_repr(key), location,
                    'first setting', previous_setting.location)
            result[key] = Setting(key, value, copy.copy(location))
        location.advance_line()
    _log.debug('read %d settings from %s', len(result), location.file_path)
    return result


def _raise_setting_error(setting, message):
    raise errors.InterfaceError('setting %s is %s but %s' % (
        _tools.text_repr(setting.key), _tools.text_repr(setting.value), message), setting.location)


def int_value(setting):
    assert setting is not None
    try:
        return int(setting.value)
    except ValueError:
        _raise_setting_error(setting, 'must be an integer number')


def float_value(setting):
    assert setting is not None
    try:
        return float(setting.value)
    except ValueError:
        _raise_setting_error(setting, 'must be a number')


def choice_value(setting, choices):
    assert setting is not None
    assert choices
    if setting.value not in choices:
        _raise_setting_error(setting, 'must be one of: %s' % _tools.human_readable_list(list(choices)))
    return setting.value


def range_value(setting, item_parser=float):
    """
    The pair ``(lower, upper)`` described by ``setting`` using the syntax
    ``lower...upper``.
    """
    assert setting is not None
    parts = setting.value.split(_tools.RANGE_SEPARATOR)
    if len(parts) != 2:
        _raise_setting_error(setting, 'must be a range of the form lower%supper' % _tools.RANGE_SEPARATOR)
    try:
        return item_parser(parts[0].strip()), item_parser(parts[1].strip())
    except ValueError:
        _raise_setting_error(setting, 'must contain numbers as limits')


def setting_text(value):
    """
    ``value`` as text that reads back to the exact same value.

    >>> setting_text(0.1)
    '0.1'
    >>> setting_text((0.0, 0.4))
    '0.0...0.4'
    >>> setting_text(10)
    '10'
    """
    if isinstance(value, tuple):
        assert len(value) == 2, 'value=%r' % (value,)
        result = _tools.range_text(*value)
    elif isinstance(value, six.string_types):
        result = value
    else:
        result = repr(value)
    return result


def write_settings(target_path, key_to_value_map):
    """
    Write ``key_to_value_map`` as settings document to ``target_path``.
    Values are written with :py:func:`setting_text` so reading the document
    reproduces them bit for bit.
    """
    assert target_path is not None
    assert key_to_value_map is not None

    with _tools.atomic_target(target_path, 'w', newline='') as target_stream:
        with rowio.DelimitedRowWriter(target_stream) as settings_writer:
            for key, value in key_to_value_map.items():
                settings_writer.write_row([key, setting_text(value)])
    _log.info('wrote settings to "%s"', target_path)
