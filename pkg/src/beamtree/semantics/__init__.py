"""Keyword extraction, 2D projection, colormap sampling, and sentiment."""

from .annotate import DEFAULT_EMBED_LAYER, annotate_tree, embed_keyword
from .colormap import Colormap2D, load_colormap, sample_color, save_colormap
from .keywords import extract_keywords, load_default_stopwords, parse_wordfile
from .projection import ProjectionAnchors, load_anchors, project, save_anchors
from .sentiment import LexiconSentimentProvider, SentimentLabel, SentimentProvider

__all__ = [
    "DEFAULT_EMBED_LAYER",
    "Colormap2D",
    "LexiconSentimentProvider",
    "ProjectionAnchors",
    "SentimentLabel",
    "SentimentProvider",
    "annotate_tree",
    "embed_keyword",
    "extract_keywords",
    "load_anchors",
    "load_colormap",
    "load_default_stopwords",
    "parse_wordfile",
    "project",
    "sample_color",
    "save_anchors",
    "save_colormap",
]
