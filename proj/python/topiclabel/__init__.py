"""Score the suitability of images for labeling probabilistic topics.

Thin wrapper over the compiled extension; see the project README for the
file formats and the command line interface.
"""

try:
    from ._topiclabel import *  # noqa: F401,F403  (installed package layout)
    from ._topiclabel import __version__  # noqa: F401
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _topiclabel import *  # noqa: F401,F403
    from _topiclabel import __version__  # noqa: F401
