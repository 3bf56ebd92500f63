"""
Django REST Framework serializers used as validators.

Corpus records and run configuration files are plain mappings; these
serializers check them field by field, the same way an API payload would
be checked, before the library turns them into domain objects.
"""

import math
from functools import partial
from pathlib import Path

from rest_framework import serializers

from .choices import CorpusFormat, Label, SegmenterMode, Trainer
from .conf import get_setting


def _finite(value, name):
    if not math.isfinite(value):
        raise serializers.ValidationError(f'{name} must be finite.')
    return value


class DocumentRecordSerializer(serializers.Serializer):
    """One JSONL/TSV corpus record."""
    id = serializers.CharField(trim_whitespace=False)
    text = serializers.CharField(trim_whitespace=False)
    label = serializers.CharField(
        required=False, allow_null=True, allow_blank=True, trim_whitespace=False
    )
    tokens = serializers.ListField(
        child=serializers.CharField(trim_whitespace=False),
        required=False,
        allow_null=True,
    )

    def validate_id(self, value):
        if not value.strip():
            raise serializers.ValidationError('Document id must not be blank.')
        return value

    def validate_text(self, value):
        if not value.strip():
            raise serializers.ValidationError('Document text must not be blank.')
        return value

    def validate_label(self, value):
        return Label.parse(value)

    def validate_tokens(self, value):
        if value is None:
            return value
        for token in value:
            if '\t' in token or token.splitlines() != [token]:
                raise serializers.ValidationError(f'Token {token!r} contains a tab or line break.')
        return value


class CorpusSectionSerializer(serializers.Serializer):
    inputs = serializers.ListField(child=serializers.CharField(), default=list)
    format = serializers.ChoiceField(choices=CorpusFormat.choices, default=CorpusFormat.JSONL)
    unlabeled = serializers.ListField(child=serializers.CharField(), default=list)
    split_sentences = serializers.BooleanField(default=True)

    def _existing(self, paths):
        missing = [path for path in paths if not Path(path).is_file()]
        if missing:
            raise serializers.ValidationError(f"File not found: {', '.join(missing)}")
        return paths

    def validate_inputs(self, value):
        return self._existing(value)

    def validate_unlabeled(self, value):
        return self._existing(value)


class SegmenterConfigSerializer(serializers.Serializer):
    """
    The dictionary path is only checked for presence by the segmentation
    stage, so a bad dictionary fails that stage rather than config loading.
    """
    mode = serializers.ChoiceField(choices=SegmenterMode.choices, default=SegmenterMode.PRETOKENIZED)
    dictionary_path = serializers.CharField(required=False, allow_null=True, default=None)
    max_word_len = serializers.IntegerField(min_value=1, default=partial(get_setting, 'MAX_WORD_LEN'))


class KeywordsSectionSerializer(serializers.Serializer):
    alpha_min = serializers.FloatField(min_value=1.0, default=partial(get_setting, 'ALPHA_MIN'))
    alpha_max = serializers.FloatField(min_value=1.0, default=partial(get_setting, 'ALPHA_MAX'))
    alpha_step = serializers.FloatField(default=partial(get_setting, 'ALPHA_STEP'))
    top_n = serializers.IntegerField(min_value=1, default=partial(get_setting, 'TOP_N'))

    def validate_alpha_step(self, value):
        _finite(value, 'alpha_step')
        if value <= 0:
            raise serializers.ValidationError('alpha_step must be positive.')
        return value

    def validate(self, attrs):
        _finite(attrs['alpha_min'], 'alpha_min')
        _finite(attrs['alpha_max'], 'alpha_max')
        if attrs['alpha_min'] > attrs['alpha_max']:
            raise serializers.ValidationError({
                'alpha_max': 'alpha_max must not be below alpha_min.'
            })
        return attrs


class TrainConfigSerializer(serializers.Serializer):
    trainer = serializers.ChoiceField(choices=Trainer.choices, default=Trainer.HINGE_SGD)
    c = serializers.FloatField(default=partial(get_setting, 'C'))
    epochs = serializers.IntegerField(min_value=1, default=partial(get_setting, 'EPOCHS'))
    learning_rate = serializers.FloatField(default=partial(get_setting, 'LEARNING_RATE'))
    tolerance = serializers.FloatField(min_value=0.0, default=partial(get_setting, 'TOLERANCE'))
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False, allow_null=True, default=None)

    def validate_c(self, value):
        _finite(value, 'c')
        if value <= 0:
            raise serializers.ValidationError('C must be positive.')
        return value

    def validate_learning_rate(self, value):
        _finite(value, 'learning_rate')
        if value <= 0:
            raise serializers.ValidationError('learning_rate must be positive.')
        return value


class EvaluationSectionSerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=2, default=partial(get_setting, 'K_FOLDS'))
    positive_detector = serializers.ChoiceField(choices=['combined', 'positive'], default='combined')
    positive_alpha = serializers.FloatField(min_value=1.0, required=False, allow_null=True, default=None)
    negative_alpha = serializers.FloatField(min_value=1.0, required=False, allow_null=True, default=None)
    c_values = serializers.ListField(child=serializers.FloatField(), default=list)

    def validate_c_values(self, value):
        for c in value:
            _finite(c, 'c_values')
            if c <= 0:
                raise serializers.ValidationError('Every C value must be positive.')
        return value


class SyntheticSpecSerializer(serializers.Serializer):
    num_pos_docs = serializers.IntegerField(min_value=0, default=200)
    num_neg_docs = serializers.IntegerField(min_value=0, default=200)
    num_unlabeled = serializers.IntegerField(min_value=0, default=100)
    planted_pos_vocab = serializers.ListField(child=serializers.CharField(), required=False)
    planted_neg_vocab = serializers.ListField(child=serializers.CharField(), required=False)
    shared_vocab = serializers.ListField(child=serializers.CharField(), required=False)
    planted_size = serializers.IntegerField(min_value=1, default=30)
    shared_size = serializers.IntegerField(min_value=0, default=40)
    doc_length = serializers.IntegerField(min_value=1, default=12)
    noise_rate = serializers.FloatField(min_value=0.0, default=0.1)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False, allow_null=True, default=None)

    def validate_noise_rate(self, value):
        if not value < 1.0:
            raise serializers.ValidationError('noise_rate must be below 1.')
        return value

    def validate(self, attrs):
        """Vocabularies must be pairwise disjoint and the planted ones non-empty."""
        vocabularies = {
            name: attrs.get(name)
            for name in ('planted_pos_vocab', 'planted_neg_vocab', 'shared_vocab')
        }
        given = {name: set(words) for name, words in vocabularies.items() if words is not None}
        names = sorted(given)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                overlap = given[first] & given[second]
                if overlap:
                    raise serializers.ValidationError({
                        second: f"Shares words with {first}: {', '.join(sorted(overlap))}"
                    })
        for name in ('planted_pos_vocab', 'planted_neg_vocab'):
            if name in given and not given[name]:
                raise serializers.ValidationError({name: 'Planted vocabulary must not be empty.'})
        return attrs


class RunConfigSerializer(serializers.Serializer):
    """Whole run configuration; every section is validated by its own serializer."""
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=partial(get_setting, 'SEED'))
    out_dir = serializers.CharField(required=False, allow_null=True, default=None)
    corpus = CorpusSectionSerializer()
    segmenter = SegmenterConfigSerializer()
    keywords = KeywordsSectionSerializer()
    train = TrainConfigSerializer()
    evaluation = EvaluationSectionSerializer()
    synthetic = SyntheticSpecSerializer()

    SECTIONS = ('corpus', 'segmenter', 'keywords', 'train', 'evaluation', 'synthetic')
