"""
Various internal utility functions.
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

import contextlib
import io
import logging
import os
import tempfile

import six


#: Mapping for value of :option:`--log` to logging level.
LOG_LEVEL_NAME_TO_LEVEL_MAP = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL
}

#: Separator between the lower and upper limit of a range setting.
RANGE_SEPARATOR = '...'


def text_repr(value):
    """
    Same as :py:func:`repr` but without the ``u`` prefix for text values.

    >>> text_repr('spam')
    "'spam'"
    >>> text_repr(3)
    '3'
    """
    result = repr(value)
    if isinstance(value, six.text_type) and result.startswith('u'):
        result = result[1:]
    return result


def human_readable_list(items, final_separator='or'):
    """
    All values in ``items`` in a human readable form. This is meant to be
    used in error messages, where dumping ``"%r"`` to the user does not cut
    it.

    >>> human_readable_list(['sobel', 'sqsum'])
    "'sobel' or 'sqsum'"
    >>> human_readable_list([3, 5, 7], 'and')
    '3, 5 and 7'
    """
    assert items is not None
    assert final_separator is not None
    item_count = len(items)
    if item_count == 0:
        result = ''
    elif item_count == 1:
        result = text_repr(items[0])
    else:
        result = ''
        for item_index in range(item_count):
            if item_index == item_count - 1:
                result += ' ' + final_separator + ' '
            elif item_index > 0:
                result += ', '
            result += text_repr(items[item_index])
        assert result
    return result


def mkdirs(folder):
    """
    Like :py:func:`os.makedirs()` but does not raise an :py:exc:`OSError` if
    ``folder`` already exists.
    """
    assert folder is not None
    os.makedirs(folder, exist_ok=True)


def with_suffix(path, suffix=''):
    """
    Same as ``path`` but with suffix changed to ``suffix``.

    >>> with_suffix("scene.f32", ".json")
    'scene.json'
    >>> with_suffix("scene.f32", "")
    'scene'
    """
    assert path is not None
    assert suffix is not None
    result = os.path.splitext(path)[0]
    if suffix:
        result += suffix
    return result


def suffix_of(path):
    """
    Lower case suffix of ``path`` without the leading dot.

    >>> suffix_of('report.XLSX')
    'xlsx'
    >>> suffix_of('settings')
    ''
    """
    assert path is not None
    return os.path.splitext(path)[1].lstrip('.').lower()


def range_text(lower, upper):
    """
    Text representation of the range ``lower...upper`` as used in settings
    documents.

    >>> range_text(0.0, 0.4)
    '0.0...0.4'
    """
    return '%r%s%r' % (lower, RANGE_SEPARATOR, upper)


def _default_file_mode():
    """
    Permission bits a new file gets from :py:func:`io.open`, that is
    ``0o666`` without the bits of the current umask.
    """
    umask = os.umask(0)
    os.umask(umask)
    return 0o666 & ~umask


def _replace(temp_path, target_path):
    # mkstemp() creates files only the owner can read.
    os.chmod(temp_path, _default_file_mode())
    os.replace(temp_path, target_path)


@contextlib.contextmanager
def atomic_target(target_path, mode='wb', encoding=None, newline=None):
    """
    Context manager providing a stream to a temporary file in the same folder
    as ``target_path``. After the ``with`` block ends without an error the
    temporary file replaces ``target_path``; otherwise it is removed and
    ``target_path`` remains untouched.
    """
    assert target_path is not None
    assert mode in ('w', 'wb'), 'mode=%r' % mode

    target_folder = os.path.dirname(os.path.abspath(target_path))
    temp_handle, temp_path = tempfile.mkstemp(
        prefix='.' + os.path.basename(target_path) + '.', suffix='.tmp', dir=target_folder)
    os.close(temp_handle)
    try:
        if mode == 'wb':
            with io.open(temp_path, mode) as target_stream:
                yield target_stream
        else:
            with io.open(temp_path, mode, encoding=encoding or 'utf-8', newline=newline) as target_stream:
                yield target_stream
        _replace(temp_path, target_path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


@contextlib.contextmanager
def atomic_target_path(target_path):
    """
    Like :py:func:`atomic_target` but for writers that insist on a path
    instead of a stream (for example :py:mod:`xlsxwriter` or
    :py:mod:`PIL`). The yielded temporary path keeps the suffix of
    ``target_path`` so format detection by suffix keeps working.
    """
    assert target_path is not None

    target_folder = os.path.dirname(os.path.abspath(target_path))
    suffix = os.path.splitext(target_path)[1]
    temp_handle, temp_path = tempfile.mkstemp(
        prefix='.' + os.path.basename(target_path) + '.', suffix='.tmp' + suffix, dir=target_folder)
    os.close(temp_handle)
    try:
        yield temp_path
        _replace(temp_path, target_path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
