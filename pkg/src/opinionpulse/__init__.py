"""Corpus-to-conclusions toolkit for social-media opinion analysis.

Pipeline stages: ingest and clean message corpora (corpus), select
on-topic messages and grow queries by collocation strength (filterkit),
score polarity against a lexicon (polarity), train and evaluate a stance
classifier (stance), and aggregate everything into time series
(timeseries). The cli module wires the stages together over files.
"""

__version__ = "1.0.0"

from .corpus import CorpusStats, Message, dedup, filter_lang, ingest, sample
from .exceptions import InputError, PipelineError
from .filterkit import TopicQuery, expand_query, load_builtin_query, load_query, tscore_rank
from .polarity import PolarityLexicon, PolarityScore, load_lexicon, score, score_stream

__all__ = [
    "__version__",
    "CorpusStats",
    "Message",
    "dedup",
    "filter_lang",
    "ingest",
    "sample",
    "InputError",
    "PipelineError",
    "TopicQuery",
    "expand_query",
    "load_builtin_query",
    "load_query",
    "tscore_rank",
    "PolarityLexicon",
    "PolarityScore",
    "load_lexicon",
    "score",
    "score_stream",
]
