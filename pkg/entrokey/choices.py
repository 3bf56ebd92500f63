"""
Enumerations shared by the library modules and the run registry.
"""

from django.db import models


class Label(models.TextChoices):
    """Gold polarity of a document. There is no gold neutral class."""
    POSITIVE = 'positive', 'Positive'
    NEGATIVE = 'negative', 'Negative'
    UNLABELED = 'unlabeled', 'Unlabeled'

    @classmethod
    def parse(cls, value):
        """Case-insensitive parse; anything but positive/negative is unlabeled."""
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered == cls.POSITIVE:
                return cls.POSITIVE
            if lowered == cls.NEGATIVE:
                return cls.NEGATIVE
        return cls.UNLABELED

    @property
    def opposite(self):
        if self == Label.POSITIVE:
            return Label.NEGATIVE
        if self == Label.NEGATIVE:
            return Label.POSITIVE
        return Label.UNLABELED


class Polarity(models.TextChoices):
    POSITIVE = 'positive', 'Positive'
    NEGATIVE = 'negative', 'Negative'
    COMBINED = 'combined', 'Combined'


class ConsensusLabel(models.TextChoices):
    POSITIVE = 'positive', 'Positive'
    NEUTRAL = 'neutral', 'Neutral'
    NEGATIVE = 'negative', 'Negative'


class SegmenterMode(models.TextChoices):
    PRETOKENIZED = 'pretokenized', 'Pre-tokenized'
    WHITESPACE = 'whitespace', 'Whitespace split'
    MAX_MATCH = 'max_match', 'Forward maximum matching'
    BACKWARD_MATCH = 'backward_match', 'Backward maximum matching'
    BIDIRECTIONAL = 'bidirectional', 'Bidirectional maximum matching'

    @property
    def needs_dictionary(self):
        return self in (
            SegmenterMode.MAX_MATCH,
            SegmenterMode.BACKWARD_MATCH,
            SegmenterMode.BIDIRECTIONAL,
        )


class Trainer(models.TextChoices):
    HINGE_SGD = 'hinge_sgd', 'Hinge loss subgradient descent'
    PERCEPTRON = 'perceptron', 'Perceptron'


class CorpusFormat(models.TextChoices):
    JSONL = 'jsonl', 'JSON lines'
    TSV = 'tsv', 'Tab separated'
