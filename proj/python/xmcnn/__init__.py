"""Common-space embedding of multi-modality sequence data."""

try:
    from ._xmcnn import *  # noqa: F401,F403  (installed wheel layout)
    from ._xmcnn import __doc__ as _core_doc
except ImportError:  # build-tree layout: extension on sys.path, not in package
    from _xmcnn import *  # noqa: F401,F403
    from _xmcnn import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
