"""
Tests for entropy keyword extraction.
"""

import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from entrokey.choices import Label, Polarity
from entrokey.corpus_io import Corpus, Document
from entrokey.entropy_keywords import (
    ExtractionConfig,
    KeywordList,
    KeywordStats,
    alpha_grid,
    build_count_table,
    combine_lists,
    compute_stats,
    load_keyword_list,
    load_stats,
    save_keyword_list,
    save_stats,
    select_keywords,
    sweep_alphas,
    word_entropy,
    word_probabilities,
)
from entrokey.exceptions import EntropyInputError, InvalidGridError, KeywordError

GRID = tuple(1.0 + 0.25 * i for i in range(12))


def naive_entropy(counts):
    """Independent reference: -sum p log2 p over documents that contain the word."""
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for count in counts:
        if count:
            p = count / total
            h -= p * math.log2(p)
    return h


def random_corpus(rng):
    """Up to 10 documents per class over up to 20 words, each word at most 5 times."""
    vocabulary = [f'w{i}' for i in range(int(rng.integers(1, 21)))]
    documents = []
    for label in (Label.POSITIVE, Label.NEGATIVE):
        for i in range(int(rng.integers(1, 11))):
            tokens = []
            for word in vocabulary:
                tokens.extend([word] * int(rng.integers(0, 6)))
            if not tokens:
                tokens = [vocabulary[0]]
            documents.append(Document(f'{label.value}-{i}', ' '.join(tokens), label, tuple(tokens)))
    return Corpus(tuple(documents))


def class_counts(corpus, label, word):
    return [doc.tokens.count(word) for doc in corpus.documents if doc.label == label]


class WordEntropyTest(SimpleTestCase):
    """Tests for word_entropy."""

    def test_uniform(self):
        self.assertAlmostEqual(word_entropy([0.25] * 4), 2.0, delta=1e-12)

    def test_uneven(self):
        self.assertAlmostEqual(word_entropy([0.5, 0.25, 0.25]), 1.5, delta=1e-12)

    def test_concentrated_is_zero(self):
        self.assertEqual(word_entropy([1.0, 0.0, 0.0]), 0.0)

    def test_all_zero_is_zero(self):
        self.assertEqual(word_entropy([0.0, 0.0]), 0.0)
        self.assertEqual(word_entropy([]), 0.0)

    def test_rejects_bad_distributions(self):
        for p in ([0.5, 0.6], [-0.5, 1.5], [float('nan'), 1.0]):
            with self.subTest(p=p):
                with self.assertRaises(EntropyInputError):
                    word_entropy(p)

    def test_probabilities(self):
        documents = [
            Document('p1', '', Label.POSITIVE, ('好', '好')),
            Document('p2', '', Label.POSITIVE, ('好',)),
            Document('p3', '', Label.POSITIVE, ('好',)),
            Document('n1', '', Label.NEGATIVE, ('差',) * 5),
        ]
        p_pos, p_neg = word_probabilities(build_count_table(Corpus(tuple(documents))), '好')
        self.assertEqual(list(p_pos), [0.5, 0.25, 0.25])
        self.assertEqual(list(p_neg), [0.0])
        _, p_neg = word_probabilities(build_count_table(Corpus(tuple(documents))), '差')
        self.assertEqual(list(p_neg), [1.0])

    def test_probabilities_of_absent_word(self):
        corpus = Corpus((
            Document('p', 'a', Label.POSITIVE, ('a',)),
            Document('n', 'b', Label.NEGATIVE, ('b',)),
        ))
        p_pos, p_neg = word_probabilities(build_count_table(corpus), 'b')
        self.assertEqual(list(p_pos), [0.0])
        self.assertEqual(list(p_neg), [1.0])


class ComputeStatsTest(SimpleTestCase):
    """Tests for compute_stats against a naive reference over random corpora."""

    def test_matches_reference_and_bounds(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            corpus = random_corpus(rng)
            m_pos, m_neg = corpus.num_positive, corpus.num_negative
            for entry in compute_stats(build_count_table(corpus)):
                pos = class_counts(corpus, Label.POSITIVE, entry.word)
                neg = class_counts(corpus, Label.NEGATIVE, entry.word)
                self.assertLessEqual(abs(entry.h_pos - naive_entropy(pos)), 1e-12)
                self.assertLessEqual(abs(entry.h_neg - naive_entropy(neg)), 1e-12)
                self.assertTrue(0.0 <= entry.h_pos <= math.log2(m_pos) + 0.0)
                self.assertTrue(0.0 <= entry.h_neg <= math.log2(m_neg) + 0.0)
                if entry.df_pos <= 1:
                    self.assertEqual(entry.h_pos, 0.0)
                if entry.df_neg <= 1:
                    self.assertEqual(entry.h_neg, 0.0)

    def test_uniform_spread(self):
        """Test a word spread evenly over all M documents has entropy log2(M)."""
        for m in (2, 3, 5, 7, 10):
            documents = [Document(f'p{i}', 'x', Label.POSITIVE, ('x', 'x')) for i in range(m)]
            documents.append(Document('n', 'y', Label.NEGATIVE, ('y',)))
            (entry,) = [s for s in compute_stats(build_count_table(Corpus(tuple(documents)))) if s.word == 'x']
            self.assertAlmostEqual(entry.h_pos, math.log2(m), delta=1e-12)
            self.assertEqual(entry.h_neg, 0.0)

    def assert_same_stats(self, first, second):
        self.assertEqual([s.word for s in first], [s.word for s in second])
        for a, b in zip(first, second):
            self.assertAlmostEqual(a.h_pos, b.h_pos, delta=1e-12)
            self.assertAlmostEqual(a.h_neg, b.h_neg, delta=1e-12)
            self.assertEqual((a.df_pos, a.df_neg), (b.df_pos, b.df_neg))

    def test_document_order_does_not_matter(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            corpus = random_corpus(rng)
            shuffled = Corpus(tuple(corpus.documents[i] for i in rng.permutation(len(corpus.documents))))
            self.assert_same_stats(compute_stats(build_count_table(corpus)), compute_stats(build_count_table(shuffled)))

    def test_scaling_counts_does_not_matter(self):
        """Test repeating every token k times in every document leaves the entropies unchanged."""
        rng = np.random.default_rng(78)
        for _ in range(200):
            corpus = random_corpus(rng)
            k = int(rng.integers(2, 6))
            scaled = Corpus(tuple(
                Document(doc.id, doc.text, doc.label, tuple(token for token in doc.tokens for _ in range(k)))
                for doc in corpus.documents
            ))
            self.assert_same_stats(compute_stats(build_count_table(corpus)), compute_stats(build_count_table(scaled)))

    def test_count_table(self):
        """Test raw counts; words only in unlabeled documents stay out of the vocabulary."""
        corpus = Corpus((
            Document('P1', '好好', Label.POSITIVE, ('好', '好')),
            Document('N1', '差', Label.NEGATIVE, ('差',)),
            Document('U1', '贵', Label.UNLABELED, ('贵',)),
        ))
        table = build_count_table(corpus)
        self.assertEqual(table.vocabulary, ('好', '差'))
        self.assertEqual(table.n_pos[0, table.index_of('好')], 2)
        self.assertEqual(table.n_neg[0, table.index_of('差')], 1)

    def test_single_document_word(self):
        corpus = Corpus((
            Document('p1', '', Label.POSITIVE, ('稀有', '好')),
            Document('p2', '', Label.POSITIVE, ('好',)),
            Document('n1', '', Label.NEGATIVE, ('差',)),
        ))
        (entry,) = [s for s in compute_stats(build_count_table(corpus)) if s.word == '稀有']
        self.assertEqual((entry.h_pos, entry.h_neg, entry.df_pos, entry.df_neg), (0.0, 0.0, 1, 0))

    def test_needs_both_classes(self):
        corpus = Corpus((Document('p', 'a', Label.POSITIVE, ('a',)),))
        with self.assertRaises(KeywordError):
            build_count_table(corpus)


class SelectKeywordsTest(SimpleTestCase):
    """Tests for the alpha ratio test and the alpha grid."""

    def test_ratio_example(self):
        """Test h_pos=2.0, h_neg=0.5 is a positive keyword at alpha 2.75 but not at 4.25."""
        stats = [KeywordStats('好', 2.0, 0.5, 6, 2)]
        self.assertEqual(select_keywords(stats, ExtractionConfig(2.75, 2.75), 'positive').words, ('好',))
        self.assertEqual(select_keywords(stats, ExtractionConfig(4.25, 4.25), 'positive').words, ())
        self.assertEqual(select_keywords(stats, ExtractionConfig(1.0, 1.0), 'negative').words, ())

    def test_empty_stats(self):
        sweep = sweep_alphas([], 1.0, 1.0, 0.25)
        self.assertEqual(sweep.grid, (1.0,))
        self.assertEqual(len(sweep.positive[1.0]), 0)
        self.assertEqual(len(sweep.negative[1.0]), 0)

    def test_strict_inequality(self):
        stats = [KeywordStats('a', 2.0, 1.0, 4, 2), KeywordStats('z', 0.0, 0.0, 1, 1)]
        self.assertEqual(select_keywords(stats, ExtractionConfig(2.0, 2.0), 'positive').words, ())
        self.assertEqual(select_keywords(stats, ExtractionConfig(1.0, 1.0), 'negative').words, ())

    def test_nesting_over_grid(self):
        """Test larger alphas give subsets of the keyword lists of smaller ones."""
        rng = np.random.default_rng(99)
        for _ in range(200):
            stats = compute_stats(build_count_table(random_corpus(rng)))
            sweep = sweep_alphas(stats, 1.0, 3.75, 0.25)
            for low, high in zip(sweep.grid, sweep.grid[1:]):
                self.assertLessEqual(set(sweep.positive[high].words), set(sweep.positive[low].words))
                self.assertLessEqual(set(sweep.negative[high].words), set(sweep.negative[low].words))

    def test_grid(self):
        self.assertEqual(alpha_grid(1.0, 3.75, 0.25), GRID)
        self.assertEqual(alpha_grid(2.0, 2.0, 0.25), (2.0,))

    def test_invalid_grid(self):
        for args in ((1.0, 3.0, 0.0), (3.0, 1.0, 0.25), (0.5, 2.0, 0.25), (1.0, float('inf'), 0.25)):
            with self.subTest(args=args):
                with self.assertRaises(InvalidGridError):
                    alpha_grid(*args)

    def test_invalid_alpha(self):
        with self.assertRaises(InvalidGridError):
            ExtractionConfig(alpha=0.0)


class KeywordListTest(SimpleTestCase):
    """Tests for KeywordList, combine_lists and keyword files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_combine_keeps_order_and_deduplicates(self):
        pos = KeywordList(Polarity.POSITIVE, ('好', '棒'), ExtractionConfig(2.0, 2.0))
        neg = KeywordList(Polarity.NEGATIVE, ('差', '棒'), ExtractionConfig(2.5, 2.5))
        combined = combine_lists(pos, neg)
        self.assertEqual(combined.words, ('好', '棒', '差'))
        self.assertEqual(combined.polarity, Polarity.COMBINED)
        self.assertEqual(combined.alpha_label, '2/2.5')

    def test_combine_with_empty_positive(self):
        combined = combine_lists(KeywordList(Polarity.POSITIVE, ()), KeywordList(Polarity.NEGATIVE, ('c',)))
        self.assertEqual(combined.words, ('c',))

    def test_combine_wrong_polarity(self):
        pos = KeywordList(Polarity.POSITIVE, ('好',))
        with self.assertRaises(KeywordError):
            combine_lists(pos, pos)

    def test_duplicates_rejected(self):
        with self.assertRaises(KeywordError):
            KeywordList(Polarity.POSITIVE, ('好', '好'))

    def test_names(self):
        self.assertEqual(KeywordList(Polarity.POSITIVE, ('a',), ExtractionConfig(2.75, 2.75)).name, 'Positive (alpha=2.75)')
        self.assertEqual(KeywordList(Polarity.NEGATIVE, ('a',), ExtractionConfig(3.75, 3.75)).name, "Negative (alpha'=3.75)")

    def test_keyword_file(self):
        stats = [KeywordStats('好', 3.1, 1.4, 9, 3), KeywordStats('差', 0.5, 2.0, 2, 6)]
        keywords = KeywordList(Polarity.POSITIVE, ('好',), ExtractionConfig(2.0, 2.0))
        path = self.dir / 'pos.tsv'
        save_keyword_list(keywords, stats, path)
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'word\tpolarity\th_pos\th_neg\talpha')
        self.assertEqual(lines[1], '好\tpositive\t3.100000\t1.400000\t2')
        self.assertEqual(load_keyword_list(path), keywords)

    def test_empty_keyword_file(self):
        path = self.dir / 'empty.tsv'
        save_keyword_list(KeywordList(Polarity.NEGATIVE, ()), [], path)
        with self.assertRaises(KeywordError):
            load_keyword_list(path)

    def test_stats_file_is_exact(self):
        rng = np.random.default_rng(5)
        stats = compute_stats(build_count_table(random_corpus(rng)))
        path = self.dir / 'stats.tsv'
        save_stats(stats, path)
        self.assertEqual(load_stats(path), stats)
