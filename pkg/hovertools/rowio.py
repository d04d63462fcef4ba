"""
Input and output of tabular rows in various formats. Settings documents,
annotation files and metric reports are all tables of text cells and share
the readers and writers in this module.
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

import csv
import datetime
import io
import zipfile
from xml.etree import ElementTree

import six
import xlrd
import xlsxwriter

from hovertools import errors
from hovertools import _tools

#: Encoding used for all delimited text files.
DEFAULT_ENCODING = 'utf-8'

#: Fixed creation time stored in Excel reports so reruns produce identical files.
XLSX_CREATED = datetime.datetime(2000, 1, 1)

_ODS_NAMESPACES = {
    'office': 'urn:oasis:names:tc:opendocument:xmlns:office:1.0',
    'table': 'urn:oasis:names:tc:opendocument:xmlns:table:1.0',
    'text': 'urn:oasis:names:tc:opendocument:xmlns:text:1.0',
}
_ODS_REPEATED_ATTRIBUTE = '{%s}number-columns-repeated' % _ODS_NAMESPACES['table']

_DELIMITED_KEYWORDS = {
    'delimiter': ',',
    'doublequote': True,
    'quotechar': '"',
    'skipinitialspace': False,
    'strict': True,
}


def _excel_text(cell):
    """
    Text of an Excel ``cell``. Whole numbers lose their ``".0"`` so a
    setting like ``min_marker_area`` reads as ``"10"``.
    """
    if cell.ctype == xlrd.XL_CELL_ERROR:
        result = six.text_type(xlrd.error_text_from_code.get(cell.value, '#N/A'))
    elif cell.ctype == xlrd.XL_CELL_NUMBER and float(cell.value).is_integer():
        result = six.text_type(int(cell.value))
    else:
        result = six.text_type(cell.value)
    return result


def excel_rows(source_path):
    """
    Rows of the first sheet of the Excel document ``source_path``.

    :raises hovertools.errors.DataFormatError: if the document cannot be read
    """
    assert source_path is not None

    location = errors.Location(source_path, has_cell=True)
    try:
        with xlrd.open_workbook(source_path) as book:
            excel_sheet = book.sheet_by_index(0)
            for row_index in range(excel_sheet.nrows):
                yield [_excel_text(cell) for cell in excel_sheet.row(row_index)]
                location.advance_line()
    except xlrd.XLRDError as error:
        raise errors.DataFormatError('cannot read Excel file: %s' % error, location)


def delimited_rows(delimited_source, encoding=DEFAULT_ENCODING):
    """
    Rows of comma separated text read from ``delimited_source``, which is
    either a path or a text stream. A path is opened and closed here, a
    stream is left to the caller.

    :raises hovertools.errors.DataFormatError: on malformed rows
    """
    assert delimited_source is not None

    if isinstance(delimited_source, six.string_types):
        delimited_stream = io.open(delimited_source, 'r', newline='', encoding=encoding)
    else:
        delimited_stream = delimited_source
    try:
        delimited_reader = csv.reader(delimited_stream, **_DELIMITED_KEYWORDS)
        try:
            for row in delimited_reader:
                yield row
        except (csv.Error, UnicodeDecodeError) as error:
            location = errors.Location(delimited_source)
            if delimited_reader.line_num > 0:
                location.advance_line(delimited_reader.line_num)
            raise errors.DataFormatError('cannot parse delimited file: %s' % error, location)
    finally:
        if delimited_stream is not delimited_source:
            delimited_stream.close()


def _ods_tables(source_ods_path):
    location = errors.Location(source_ods_path)
    try:
        with zipfile.ZipFile(source_ods_path, 'r') as ods_archive:
            if 'content.xml' not in ods_archive.namelist():
                raise errors.DataFormatError('cannot extract content.xml from ODS spreadsheet', location)
            content_xml = ods_archive.read('content.xml')
    except (zipfile.BadZipfile, EnvironmentError) as error:
        raise errors.DataFormatError('cannot uncompress ODS spreadsheet: %s' % error, location)
    try:
        content_root = ElementTree.fromstring(content_xml)
    except ElementTree.ParseError as error:
        raise errors.DataFormatError('cannot parse content.xml: %s' % error, location)
    return content_root.findall('office:body/office:spreadsheet/table:table', namespaces=_ODS_NAMESPACES)


def ods_rows(source_ods_path, sheet=1):
    """
    Rows of ``sheet`` in the ODS document ``source_ods_path``. Trailing
    empty cells are removed from each row.

    :raises hovertools.errors.DataFormatError: if ``source_ods_path`` is no \
      valid ODS document or has fewer sheets
    """
    assert sheet >= 1, 'sheet=%r' % sheet

    tables = _ods_tables(source_ods_path)
    if len(tables) < sheet:
        raise errors.DataFormatError(
            'ODS must contain at least %d sheet(s) instead of just %d' % (sheet, len(tables)),
            errors.Location(source_ods_path))
    location = errors.Location(source_ods_path, has_cell=True)
    for table_row in tables[sheet - 1].findall('table:table-row', namespaces=_ODS_NAMESPACES):
        row = []
        for table_cell in table_row.findall('table:table-cell', namespaces=_ODS_NAMESPACES):
            repeated_text = table_cell.get(_ODS_REPEATED_ATTRIBUTE, '1')
            if not repeated_text.isdigit() or int(repeated_text) < 1:
                raise errors.DataFormatError(
                    'table:number-columns-repeated is %s but must be a positive integer'
                    % _tools.text_repr(repeated_text), location)
            repeated_count = int(repeated_text)
            paragraph = table_cell.find('text:p', namespaces=_ODS_NAMESPACES)
            text = (paragraph.text or '') if paragraph is not None else ''
            row.extend([text] * repeated_count)
            location.advance_cell(repeated_count)
        while row and not row[-1]:
            row.pop()
        yield row
        location.advance_line()


def auto_rows(source):
    """
    Rows of ``source``. A path is read according to its suffix (ODS, Excel
    or comma separated text), anything else is read as a stream of comma
    separated text.
    """
    suffix = _tools.suffix_of(source) if isinstance(source, six.string_types) else None
    if suffix == 'ods':
        result = ods_rows(source)
    elif suffix in ('xls', 'xlsx'):
        result = excel_rows(source)
    else:
        result = delimited_rows(source)
    return result


class AbstractRowWriter(object):
    """
    Base class for writers of report, settings and annotation rows.

    :param target: path or text stream to write to; a path is opened by the \
      writer and closed by :py:meth:`close`, a stream remains open
    """
    def __init__(self, target):
        assert target is not None

        if isinstance(target, six.string_types):
            self._target_stream = io.open(target, 'w', encoding=DEFAULT_ENCODING, newline='')
            self._has_opened_target_stream = True
        else:
            self._target_stream = target
            self._has_opened_target_stream = False
        self._location = errors.Location(target, has_cell=True)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    @property
    def location(self):
        """
        :py:class:`hovertools.errors.Location` of the next row to write.
        """
        return self._location

    def write_row(self, row_to_write):
        raise NotImplementedError

    def write_rows(self, rows_to_write):
        for row_to_write in rows_to_write:
            self.write_row(row_to_write)

    def close(self):
        if self._has_opened_target_stream:
            self._target_stream.close()
            self._has_opened_target_stream = False
        self._target_stream = None


class DelimitedRowWriter(AbstractRowWriter):
    """
    Writer for comma separated rows with ``'\\n'`` as line delimiter.
    """
    def __init__(self, target):
        super(DelimitedRowWriter, self).__init__(target)
        self._delimited_writer = csv.writer(self._target_stream, lineterminator='\n', **_DELIMITED_KEYWORDS)

    def write_row(self, row_to_write):
        assert row_to_write is not None
        try:
            self._delimited_writer.writerow(row_to_write)
        except UnicodeEncodeError as error:
            raise errors.DataFormatError('cannot write row %s: %s' % (row_to_write, error), self.location)
        self._location.advance_line()


class XlsxRowWriter(AbstractRowWriter):
    """
    Writer for a single sheet Excel 2007+ (:file:`*.xlsx`) document. Text is
    stored as string cells and everything else as number cells. The document
    is written when the writer is closed.
    """
    def __init__(self, target_path):
        assert isinstance(target_path, six.string_types), 'target_path=%r' % target_path

        self._target_stream = None
        self._has_opened_target_stream = False
        self._location = errors.Location(target_path, has_cell=True)
        self._workbook = xlsxwriter.Workbook(target_path)
        self._workbook.set_properties({'created': XLSX_CREATED})
        self._worksheet = self._workbook.add_worksheet()

    def write_row(self, row_to_write):
        assert row_to_write is not None

        for item in row_to_write:
            assert item is not None
            row_index = self.location.line
            column_index = self.location.cell
            if isinstance(item, six.text_type):
                # Explicit strings keep texts starting with '=' from turning into formulas.
                self._worksheet.write_string(row_index, column_index, item)
            else:
                self._worksheet.write_number(row_index, column_index, item)
            self.location.advance_cell()
        self.location.advance_line()

    def close(self):
        if self._workbook is not None:
            self._workbook.close()
            self._workbook = None
            self._worksheet = None


def row_writer(target_path):
    """
    Writer suitable for ``target_path`` based on its suffix: Excel for
    :file:`*.xlsx` and comma separated text otherwise.
    """
    assert target_path is not None
    if _tools.suffix_of(target_path) == 'xlsx':
        result = XlsxRowWriter(target_path)
    else:
        result = DelimitedRowWriter(target_path)
    return result
