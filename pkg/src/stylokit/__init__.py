"""Interpretable style representations for author-attributed text.

The pipeline: ingest a corpus, annotate documents with style attributes via
a two-stage completion protocol, select an attribute vocabulary, score
attribute agreement, build style vectors, train a metric embedding on top,
and explain pairwise style differences dimension by dimension.
"""

__version__ = "0.1.0"

from stylokit.errors import DataError, InsufficientDataError, StylokitError

__all__ = ["DataError", "InsufficientDataError", "StylokitError", "__version__"]
