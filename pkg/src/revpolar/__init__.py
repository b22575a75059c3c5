"""Review-level polarity classification with sentence-level polarity correction."""

from .corpus import DatasetSplit, Polarity, ReviewDocument, Sentence
from .correction import CorrectionConfig, Fallback, filter_consistent
from .naive import NaiveSentenceModel, fit_naive, score_sentence
from .textproc import FeatureScheme, Token, Vocabulary

__version__ = "0.1.0"

__all__ = [
    "CorrectionConfig", "DatasetSplit", "Fallback", "FeatureScheme", "NaiveSentenceModel",
    "Polarity", "ReviewDocument", "Sentence", "Token", "Vocabulary", "filter_consistent",
    "fit_naive", "score_sentence",
]
