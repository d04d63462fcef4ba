"""
Hovertools prepares training targets for nuclear instance segmentation and
classification networks, turns their predicted maps into classified
nuclear instances and evaluates the result with segmentation, detection
and classification metrics.

Additionally to the command line tool the functionality of hovertools is
also accessible through a Python API.
"""
from importlib import metadata as _metadata

try:
    #: Package version information.
    __version__ = _metadata.version(__name__)
except _metadata.PackageNotFoundError:  # pragma: no cover
    __version__ = '0.1.0'

from hovertools.errors import Location, HovertoolsError  # noqa: E402
from hovertools.postproc import PostProcConfig, ProbMaps, run_pipeline  # noqa: E402
from hovertools.metrics import segmentation_metrics, classification_scores, match_by_radius  # noqa: E402
from hovertools.targetgen import hover_targets, binary_target, type_target  # noqa: E402
from hovertools.tiling import plan_tiles, extract_tile, stitch_maps  # noqa: E402

#: Public classes and functions.
__all__ = [
    'HovertoolsError',
    'Location',
    'PostProcConfig',
    'ProbMaps',
    'binary_target',
    'classification_scores',
    'extract_tile',
    'hover_targets',
    'match_by_radius',
    'plan_tiles',
    'run_pipeline',
    'segmentation_metrics',
    'stitch_maps',
    'type_target',
    '__version__'
]
