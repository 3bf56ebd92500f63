"""
Tests for corpus loading, sentence splitting and noise filtering.
"""

import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from entrokey.choices import Label
from entrokey.corpus_io import (
    Corpus,
    Document,
    describe_corpus,
    filter_noise,
    is_noise,
    load_corpus,
    save_corpus,
    split_corpus,
    split_sentences,
)
from entrokey.exceptions import CorpusFormatError, CorpusReadError, DuplicateDocumentError, DataError


class CorpusFileTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding='utf-8')
        return path


class LoadCorpusTest(CorpusFileTestCase):
    """Tests for load_corpus."""

    def test_jsonl_labels(self):
        """Labels parse case-insensitively; anything else is unlabeled."""
        path = self.write('c.jsonl', '\n'.join(json.dumps(r, ensure_ascii=False) for r in [
            {'id': 'a', 'text': '房间很干净', 'label': 'positive'},
            {'id': 'b', 'text': '服务太差', 'label': 'NEGATIVE'},
            {'id': 'c', 'text': '还可以', 'label': None},
            {'id': 'd', 'text': '一般', 'label': 'neutral'},
        ]) + '\n')
        corpus = load_corpus(path)
        self.assertEqual([doc.label for doc in corpus], [Label.POSITIVE, Label.NEGATIVE, Label.UNLABELED, Label.UNLABELED])
        self.assertEqual(corpus.counts[Label.UNLABELED], 2)

    def test_tokens_are_kept(self):
        path = self.write('c.jsonl', json.dumps({'id': 'a', 'text': '很 好', 'label': 'positive', 'tokens': ['很', '好']}) + '\n')
        self.assertEqual(load_corpus(path).documents[0].tokens, ('很', '好'))

    def test_missing_text_reports_line(self):
        """Test a record without text fails with its line number."""
        path = self.write('c.jsonl', '{"id": "a", "text": "ok", "label": "positive"}\n{"id": "b", "label": "positive"}\n')
        with self.assertRaises(CorpusFormatError) as ctx:
            load_corpus(path)
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn('line 2', str(ctx.exception))
        self.assertIn('text', str(ctx.exception))

    def test_invalid_json(self):
        path = self.write('c.jsonl', '{"id": "a", "text": \n')
        with self.assertRaises(CorpusFormatError):
            load_corpus(path)

    def test_duplicate_id(self):
        """Test a repeated id names the id."""
        path = self.write('c.jsonl', '{"id": "x", "text": "a"}\n{"id": "x", "text": "b"}\n')
        with self.assertRaisesMessage(DuplicateDocumentError, 'duplicate document id "x"'):
            load_corpus(path)

    def test_missing_file(self):
        with self.assertRaises(CorpusReadError):
            load_corpus(self.dir / 'nope.jsonl')

    def test_tsv_with_header(self):
        path = self.write('c.tsv', 'id\tlabel\ttext\n1\tpositive\t很好\n2\t\t一般\n')
        corpus = load_corpus(path, 'tsv')
        self.assertEqual(len(corpus), 2)
        self.assertEqual(corpus.documents[1].label, Label.UNLABELED)

    def test_tsv_wrong_columns(self):
        path = self.write('c.tsv', '1\tpositive\n')
        with self.assertRaises(CorpusFormatError):
            load_corpus(path, 'tsv')

    def test_errors_are_data_errors(self):
        self.assertEqual(DataError.exit_code, 3)
        self.assertTrue(issubclass(CorpusFormatError, DataError))

    def test_save_and_load(self):
        """Test save_corpus writes records load_corpus reads back unchanged."""
        corpus = Corpus((
            Document('a', '好', Label.POSITIVE, ('好',)),
            Document('b', '差', Label.NEGATIVE),
            Document('c', '嗯', Label.UNLABELED),
        ))
        path = self.dir / 'out' / 'c.jsonl'
        save_corpus(corpus, path)
        self.assertEqual(load_corpus(path), corpus)
        first = json.loads(path.read_text(encoding='utf-8').splitlines()[0])
        self.assertEqual(first['text'], '好')
        self.assertIsNone(json.loads(path.read_text(encoding='utf-8').splitlines()[2])['label'])

    def test_empty_corpus_round_trip(self):
        path = self.dir / 'empty.jsonl'
        save_corpus(Corpus(()), path)
        self.assertEqual(path.read_text(encoding='utf-8'), '')
        self.assertEqual(load_corpus(path), Corpus(()))

    def test_tokens_with_line_breaks_rejected(self):
        for token in ('好\n差', '好\r', '好\t差', '好\u2028'):
            with self.subTest(token=token):
                path = self.write('c.jsonl', json.dumps({'id': 'a', 'text': '好', 'tokens': [token]}) + '\n')
                with self.assertRaisesMessage(CorpusFormatError, 'line 1'):
                    load_corpus(path)


class SplitSentencesTest(SimpleTestCase):
    """Tests for split_sentences."""

    def test_chinese_terminators(self):
        """Test the example review splits in two with ordinal ids."""
        doc = Document('r1', '房间很干净。服务也好！', Label.POSITIVE)
        children = split_sentences(doc)
        self.assertEqual([c.text for c in children], ['房间很干净。', '服务也好！'])
        self.assertEqual([c.id for c in children], ['r1#1', 'r1#2'])
        self.assertTrue(all(c.label == Label.POSITIVE for c in children))

    def test_no_terminator(self):
        children = split_sentences(Document('r', '没有标点'))
        self.assertEqual([c.text for c in children], ['没有标点'])

    def test_closing_quote_stays_with_sentence(self):
        children = split_sentences(Document('r', '他说“很好。”然后走了。'))
        self.assertEqual([c.text for c in children], ['他说“很好。”', '然后走了。'])

    def test_concatenation_is_lossless(self):
        """Test children always concatenate back to the parent text."""
        texts = ['。。好', '好。。。差！？', '  好。 ', '!!!', 'a. b? c', '很好；但是贵']
        for text in texts:
            with self.subTest(text=text):
                children = split_sentences(Document('r', text))
                self.assertEqual(''.join(c.text for c in children), text)

    def test_split_corpus_keeps_tokenized_documents(self):
        corpus = Corpus((
            Document('a', '好。差。', Label.POSITIVE),
            Document('b', '好 。 差', Label.NEGATIVE, ('好', '差')),
        ))
        split = split_corpus(corpus)
        self.assertEqual([doc.id for doc in split], ['a#1', 'a#2', 'b'])


class NoiseTest(SimpleTestCase):
    """Tests for noise token detection."""

    def test_noise_tokens(self):
        for token in ['，', '2014', '!!', '★', '  ', '３']:
            with self.subTest(token=token):
                self.assertTrue(is_noise(token))

    def test_words_are_kept(self):
        self.assertEqual(filter_noise(['很', '，', '好', '123', 'ok', '5星']), ['很', '好', 'ok', '5星'])

    def test_describe_corpus(self):
        corpus = Corpus((
            Document('a', 'x', Label.POSITIVE, ('好', '，')),
            Document('b', 'y', Label.NEGATIVE, ('差', '好')),
            Document('c', 'z'),
        ))
        summary = describe_corpus(corpus)
        self.assertEqual(summary.num_documents, 3)
        self.assertEqual(summary.num_unlabeled, 1)
        self.assertEqual(summary.num_distinct_tokens, 3)
        self.assertEqual(summary.num_noise_tokens, 1)

    def test_filter_noise_is_idempotent(self):
        tokens = ['很', '，', '好', '123', 'ok', '5星', '★', '  ', '差！', '３']
        once = filter_noise(tokens)
        self.assertEqual(filter_noise(once), once)
        self.assertFalse(any(is_noise(token) for token in once))
