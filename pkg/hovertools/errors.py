"""
Errors that can be raised by hovertools.
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

import copy
import os

import six


class Location(object):
    """
    Position in an input file: a ``line`` and, for tabular input such as
    settings or annotations, a ``cell`` within it. A source without a path,
    for example a text stream, is shown by its ``name`` or as ``"<io>"``.

    >>> from hovertools.errors import Location
    >>> Location("scene.png")
    scene.png (1)
    >>> Location("annotations.csv", has_cell=True)
    annotations.csv (R1C1)
    """

    def __init__(self, file_path, has_cell=False):
        assert file_path
        if isinstance(file_path, six.string_types):
            self.file_path = file_path
        else:
            self.file_path = getattr(file_path, 'name', '<io>')
        self._line = 0
        self._cell = 0
        self._has_cell = has_cell

    def __copy__(self):
        result = type(self)(self.file_path)
        result.__dict__.update(self.__dict__)
        return result

    def advance_cell(self, amount=1):
        assert amount > 0, 'amount=%r' % amount
        assert self._has_cell
        self._cell += amount

    def advance_line(self, amount=1):
        assert amount > 0, 'amount=%r' % amount
        self._line += amount
        self._cell = 0

    @property
    def cell(self):
        """Zero based cell in the current line."""
        assert self._has_cell
        return self._cell

    @property
    def line(self):
        """Zero based line or row."""
        return self._line

    def __str__(self):
        if self._has_cell:
            position = 'R%dC%d' % (self.line + 1, self.cell + 1)
        else:
            position = '%d' % (self.line + 1)
        return '%s (%s)' % (os.path.basename(self.file_path), position)

    def __repr__(self):
        return self.__str__()

    def __eq__(self, other):
        return (self.file_path == other.file_path) \
            and (self.line == other.line) \
            and (not self._has_cell or (self.cell == other.cell))

    def __ne__(self, other):
        return not self.__eq__(other)

    # Mutable, so no __hash__.
    __hash__ = None


class HovertoolsError(Exception):
    """
    Error caused by issues in settings or data. Details are provided by the
    following properties:

    * :py:attr:`~hovertools.errors.HovertoolsError.message` - a description
      of the condition that caused the error and possibly suggestions on what
      needs to be fixed.
    * :py:attr:`~hovertools.errors.HovertoolsError.location` (can be
      ``None``) - :py:class:`~hovertools.errors.Location` pointing to the
      source of the error.
    * :py:attr:`~hovertools.errors.HovertoolsError.see_also_message`,
      :py:attr:`~hovertools.errors.HovertoolsError.see_also_location` (can be
      ``None``): a message and location describing additional information.
      For example, when the prediction map of an image has other dimensions
      than its ground truth, the error points to the prediction while the
      see also location points to the ground truth.
    """

    def __init__(self, message, location=None, see_also_message=None, see_also_location=None, cause=None):
        assert message
        assert (see_also_location and see_also_message) or not see_also_location
        super(HovertoolsError, self).__init__(message)
        self._location = copy.copy(location)
        self._see_also_message = see_also_message
        self._see_also_location = copy.copy(see_also_location)
        self._cause = cause
        self._message = message

    @property
    def location(self):
        """
        :py:class:`~hovertools.errors.Location` in the input that caused the
        error or ``None``.
        """
        return self._location

    @property
    def message(self):
        """
        Human readable description of the condition that caused the error and
        needs to be fixed.
        """
        return self._message

    @property
    def see_also_message(self):
        return self._see_also_message

    @property
    def see_also_location(self):
        return self._see_also_location

    @property
    def cause(self):
        """
        The :py:exc:`Exception` that caused this error or ``None``.
        """
        return self._cause

    def prepend_message(self, prefix, new_location):
        """
        Add ``prefix`` and ``': '`` at the beginning of :py:attr:`message`
        and change :py:attr:`location` to ``new_location``.
        """
        assert prefix is not None
        assert new_location is not None
        self._message = prefix + ': ' + self._message
        self._location = copy.copy(new_location)

    def as_record(self):
        """
        Machine-parseable summary of the error as :py:class:`dict` that can
        be dumped as JSON.
        """
        result = {
            'error': type(self).__name__,
            'message': self.message,
            'location': six.text_type(self.location) if self.location is not None else None,
        }
        if self.see_also_message is not None:
            result['see_also'] = {
                'message': self.see_also_message,
                'location': six.text_type(self.see_also_location) if self.see_also_location is not None else None,
            }
        return result

    def __str__(self):
        """
        Human readable summary of all details related to the error.
        """
        result = ''
        if self._location:
            result += six.text_type(self.location) + ': '
        result += self._message
        if self.see_also_message is not None:
            result += ' (see also: '
            if self.see_also_location:
                result += six.text_type(self.see_also_location) + ': '
            result += self.see_also_message + ')'
        return result


class DataError(HovertoolsError):
    """
    Error that can be fixed by providing proper data, for example label maps
    or annotations.
    """
    pass


class InterfaceError(HovertoolsError):
    """
    Error that can be fixed by providing proper settings or API calls.
    """
    pass


class DataFormatError(DataError):
    """
    Error indicating that a data file cannot be processed due to severe format
    violations, for example a float map whose size does not match its
    descriptor or a PNG that cannot be decoded.
    """
    pass


class DimensionError(DataError):
    """
    Error raised when grids that have to be processed together have different
    dimensions.
    """
    pass


class LabelError(DataError):
    """
    Error raised when instance labels and nuclear types do not fit together,
    for example an instance without a type or an unknown type id.
    """
    pass


class TilingError(DataError):
    """
    Error raised when tile outputs cannot be stitched according to their plan.
    """
    pass


class PlacementError(DataError):
    """
    Error raised when a synthetic scene cannot place all requested nuclei.
    """
    pass


class ArgumentError(InterfaceError):
    """
    Error raised when the command line arguments are broken, for example an
    unknown option or a worker count less than 1.
    """
    pass
