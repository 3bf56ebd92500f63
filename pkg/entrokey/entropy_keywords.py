"""
Entropy based keyword extraction.

For every word the occurrence counts across the documents of one polarity
class form a distribution; its Shannon entropy (bits) tells how evenly the
word is spread over that class. A word whose positive entropy exceeds
alpha times its negative entropy is a positive keyword, and symmetrically
with alpha' for negative keywords.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

from .choices import Label, Polarity
from .exceptions import (
    EntropyInputError,
    InvalidGridError,
    KeywordError,
    UntokenizedDocumentError,
)

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-12
KEYWORD_FILE_HEADER = ('word', 'polarity', 'h_pos', 'h_neg', 'alpha')
STATS_FILE_HEADER = ('word', 'h_pos', 'h_neg', 'df_pos', 'df_neg')


@dataclass(frozen=True, eq=False)
class CountTable:
    """
    Raw term frequencies: n_pos[i, j] is how often vocabulary word j occurs
    in positive document i (likewise n_neg). Stored column-compressed.
    """
    vocabulary: tuple
    doc_ids_pos: tuple
    doc_ids_neg: tuple
    n_pos: sparse.csc_matrix
    n_neg: sparse.csc_matrix

    @cached_property
    def word_index(self):
        return {word: index for index, word in enumerate(self.vocabulary)}

    def index_of(self, word):
        if isinstance(word, (int, np.integer)):
            if 0 <= word < len(self.vocabulary):
                return int(word)
        elif word in self.word_index:
            return self.word_index[word]
        raise KeywordError(f'unknown word: {word!r}')


@dataclass(frozen=True)
class KeywordStats:
    word: str
    h_pos: float
    h_neg: float
    df_pos: int
    df_neg: int


@dataclass(frozen=True)
class ExtractionConfig:
    alpha: float = 1.0
    alpha_prime: float = 1.0

    def __post_init__(self):
        for name in ('alpha', 'alpha_prime'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidGridError(f'{name} must be a positive finite number, got {value}')


@dataclass(frozen=True)
class KeywordList:
    """
    Ordered keyword vocabulary. For a combined list, config is the
    (positive, negative) pair of extraction configs it was built from.
    """
    polarity: Polarity
    words: tuple
    config: object = field(default_factory=ExtractionConfig)

    def __post_init__(self):
        object.__setattr__(self, 'polarity', Polarity(self.polarity))
        object.__setattr__(self, 'words', tuple(self.words))
        if len(set(self.words)) != len(self.words):
            duplicates = sorted(word for word, count in Counter(self.words).items() if count > 1)
            raise KeywordError(f"duplicate keywords: {', '.join(duplicates)}")

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word):
        return word in self.word_index

    @cached_property
    def word_index(self):
        return {word: index for index, word in enumerate(self.words)}

    @property
    def coefficient(self):
        if self.polarity == Polarity.POSITIVE:
            return self.config.alpha
        if self.polarity == Polarity.NEGATIVE:
            return self.config.alpha_prime
        return None

    @property
    def alpha_label(self):
        if self.polarity == Polarity.COMBINED:
            positive, negative = self.config
            return f'{positive.alpha:g}/{negative.alpha_prime:g}'
        return f'{self.coefficient:g}'

    @property
    def name(self):
        if self.polarity == Polarity.POSITIVE:
            return f'Positive (alpha={self.coefficient:g})'
        if self.polarity == Polarity.NEGATIVE:
            return f"Negative (alpha'={self.coefficient:g})"
        return 'Combined'

    @property
    def target(self):
        """Gold class this list is used to detect."""
        return Label.NEGATIVE if self.polarity == Polarity.NEGATIVE else Label.POSITIVE


@dataclass(frozen=True)
class AlphaSweep:
    grid: tuple
    positive: dict
    negative: dict


def build_count_table(corpus):
    """Count every token occurrence of the labeled, segmented documents."""
    positive = [doc for doc in corpus.documents if doc.label == Label.POSITIVE]
    negative = [doc for doc in corpus.documents if doc.label == Label.NEGATIVE]
    if not positive or not negative:
        raise KeywordError(
            'entropy extraction needs at least one positive and one negative document '
            f'(got {len(positive)} positive, {len(negative)} negative)'
        )
    for doc in positive + negative:
        if doc.tokens is None:
            raise UntokenizedDocumentError(doc.id)

    vocabulary = tuple(sorted({token for doc in positive + negative for token in doc.tokens}))
    index = {word: j for j, word in enumerate(vocabulary)}

    def tally(documents):
        rows, cols, data = [], [], []
        for i, doc in enumerate(documents):
            for word, count in Counter(doc.tokens).items():
                rows.append(i)
                cols.append(index[word])
                data.append(count)
        matrix = sparse.coo_matrix(
            (np.asarray(data, dtype=np.int64), (rows, cols)),
            shape=(len(documents), len(vocabulary)),
        )
        return matrix.tocsc()

    table = CountTable(
        vocabulary=vocabulary,
        doc_ids_pos=tuple(doc.id for doc in positive),
        doc_ids_neg=tuple(doc.id for doc in negative),
        n_pos=tally(positive),
        n_neg=tally(negative),
    )
    logger.info(
        'Count table: %d words over %d positive and %d negative documents',
        len(vocabulary), len(positive), len(negative),
    )
    return table


def _distribution(counts):
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        return np.zeros_like(counts)
    return counts / total


def word_probabilities(table, word):
    """Per-document probabilities of a word in each class; all zeros when absent."""
    j = table.index_of(word)
    p_pos = _distribution(table.n_pos[:, j].toarray().ravel())
    p_neg = _distribution(table.n_neg[:, j].toarray().ravel())
    return p_pos, p_neg


def word_entropy(p):
    """Shannon entropy in bits, with 0 * log2(0) taken as 0."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size and (np.any(p < 0) or not np.all(np.isfinite(p))):
        raise EntropyInputError('probabilities must be finite and non-negative')
    total = float(p.sum())
    if abs(total) > PROBABILITY_TOLERANCE and abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise EntropyInputError(f'probabilities must sum to 0 or 1, got {total!r}')
    support = p[p > 0]
    if support.size == 0:
        return 0.0
    entropy = -float(np.sum(support * np.log2(support)))
    # Rounding can push a uniform spread a hair past log2 of its support.
    return min(max(entropy, 0.0) + 0.0, math.log2(support.size))


def _column_counts(matrix, j):
    start, end = matrix.indptr[j], matrix.indptr[j + 1]
    counts = matrix.data[start:end]
    return counts[counts > 0]


def compute_stats(table):
    """One KeywordStats per vocabulary word, in vocabulary order."""
    stats = []
    for j, word in enumerate(table.vocabulary):
        pos_counts = _column_counts(table.n_pos, j)
        neg_counts = _column_counts(table.n_neg, j)
        stats.append(KeywordStats(
            word=word,
            h_pos=word_entropy(_distribution(pos_counts)),
            h_neg=word_entropy(_distribution(neg_counts)),
            df_pos=int(pos_counts.size),
            df_neg=int(neg_counts.size),
        ))
    return stats


def select_keywords(stats, config, polarity):
    """Strict ratio test: h_pos > alpha * h_neg, or h_neg > alpha' * h_pos."""
    polarity = Polarity(polarity)
    if polarity == Polarity.POSITIVE:
        words = [s.word for s in stats if s.h_pos > config.alpha * s.h_neg]
    elif polarity == Polarity.NEGATIVE:
        words = [s.word for s in stats if s.h_neg > config.alpha_prime * s.h_pos]
    else:
        raise KeywordError('combined lists come from combine_lists, not from selection')
    return KeywordList(polarity=polarity, words=tuple(words), config=config)


def alpha_grid(alpha_min, alpha_max, step):
    """Inclusive grid alpha_min, alpha_min + step, ... up to alpha_max."""
    values = (alpha_min, alpha_max, step)
    if not all(math.isfinite(value) for value in values):
        raise InvalidGridError('alpha grid bounds must be finite')
    if step <= 0:
        raise InvalidGridError(f'alpha step must be positive, got {step}')
    if alpha_min > alpha_max:
        raise InvalidGridError(f'alpha_min {alpha_min} exceeds alpha_max {alpha_max}')
    if alpha_min < 1.0:
        raise InvalidGridError(f'alpha grid must start at 1.0 or above, got {alpha_min}')
    count = int(math.floor((alpha_max - alpha_min) / step + 1e-9)) + 1
    grid = tuple(round(alpha_min + i * step, 10) for i in range(count))
    if len(set(grid)) != len(grid):
        raise InvalidGridError(f'alpha step {step} is too small to give distinct grid values')
    return grid


def sweep_alphas(stats, alpha_min=1.0, alpha_max=3.75, step=0.25):
    """Positive and negative keyword lists for every grid value."""
    grid = alpha_grid(alpha_min, alpha_max, step)
    positive, negative = {}, {}
    for alpha in grid:
        config = ExtractionConfig(alpha=alpha, alpha_prime=alpha)
        positive[alpha] = select_keywords(stats, config, Polarity.POSITIVE)
        negative[alpha] = select_keywords(stats, config, Polarity.NEGATIVE)
        logger.debug(
            'alpha=%g: %d positive, %d negative keywords',
            alpha, len(positive[alpha]), len(negative[alpha]),
        )
    return AlphaSweep(grid=grid, positive=positive, negative=negative)


def combine_lists(pos, neg):
    """Union keeping positive words first, then unseen negative words."""
    if pos.polarity != Polarity.POSITIVE or neg.polarity != Polarity.NEGATIVE:
        raise KeywordError(
            f'combine_lists expects (positive, negative), got ({pos.polarity}, {neg.polarity})'
        )
    seen = set(pos.words)
    words = pos.words + tuple(word for word in neg.words if word not in seen)
    return KeywordList(polarity=Polarity.COMBINED, words=words, config=(pos.config, neg.config))


def _write_tsv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        handle.write('\t'.join(header) + '\n')
        for row in rows:
            handle.write('\t'.join(row) + '\n')


def save_keyword_list(keywords, stats, path):
    by_word = {s.word: s for s in stats}
    rows = []
    for word in keywords.words:
        entry = by_word.get(word)
        if entry is None:
            raise KeywordError(f'no entropy statistics for keyword {word!r}')
        rows.append((
            word,
            keywords.polarity.value,
            f'{entry.h_pos:.6f}',
            f'{entry.h_neg:.6f}',
            keywords.alpha_label,
        ))
    _write_tsv(path, KEYWORD_FILE_HEADER, rows)


def save_stats(stats, path):
    # Full precision so load_stats gives back the exact entropies.
    _write_tsv(path, STATS_FILE_HEADER, (
        (s.word, repr(s.h_pos), repr(s.h_neg), str(s.df_pos), str(s.df_neg))
        for s in stats
    ))


def _config_from_label(polarity, alpha_label):
    try:
        if polarity == Polarity.COMBINED:
            positive, negative = alpha_label.split('/')
            return (
                ExtractionConfig(alpha=float(positive), alpha_prime=float(positive)),
                ExtractionConfig(alpha=float(negative), alpha_prime=float(negative)),
            )
        value = float(alpha_label)
        return ExtractionConfig(alpha=value, alpha_prime=value)
    except ValueError as exc:
        raise KeywordError(f'bad alpha column {alpha_label!r}') from exc


def load_keyword_list(path):
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise KeywordError(f'cannot read keyword list {path}: {exc}') from exc
    if not lines or tuple(lines[0].split('\t')) != KEYWORD_FILE_HEADER:
        raise KeywordError(f'{path} is not a keyword list file')

    words, polarity, alpha_label = [], None, None
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        columns = line.split('\t')
        if len(columns) != len(KEYWORD_FILE_HEADER):
            raise KeywordError(f'{path}:{line_number}: expected {len(KEYWORD_FILE_HEADER)} columns')
        word, row_polarity, _, _, row_alpha = columns
        if polarity is None:
            polarity, alpha_label = row_polarity, row_alpha
        elif (row_polarity, row_alpha) != (polarity, alpha_label):
            raise KeywordError(f'{path}:{line_number}: mixed polarity or alpha values')
        words.append(word)
    if not words:
        raise KeywordError(f'{path} holds no keywords')
    try:
        polarity = Polarity(polarity)
    except ValueError as exc:
        raise KeywordError(f'{path}: unknown polarity {polarity!r}') from exc
    return KeywordList(polarity=polarity, words=tuple(words), config=_config_from_label(polarity, alpha_label))


def load_stats(path):
    """Read a file written by save_stats back into KeywordStats rows."""
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise KeywordError(f'cannot read entropy statistics {path}: {exc}') from exc
    if not lines or tuple(lines[0].split('\t')) != STATS_FILE_HEADER:
        raise KeywordError(f'{path} is not an entropy statistics file')
    stats = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        columns = line.split('\t')
        if len(columns) != len(STATS_FILE_HEADER):
            raise KeywordError(f'{path}:{line_number}: expected {len(STATS_FILE_HEADER)} columns')
        try:
            stats.append(KeywordStats(
                word=columns[0],
                h_pos=float(columns[1]),
                h_neg=float(columns[2]),
                df_pos=int(columns[3]),
                df_neg=int(columns[4]),
            ))
        except ValueError as exc:
            raise KeywordError(f'{path}:{line_number}: {exc}') from exc
    return stats
