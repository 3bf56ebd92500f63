"""
Corpus loading, sentence splitting, noise filtering and persistence.

A corpus is an ordered, immutable collection of documents. Downstream
modules treat every document as one sentence: ingestion splits reviews
with split_corpus before anything is counted.
"""

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path

from rest_framework import serializers

from .choices import CorpusFormat, Label
from .exceptions import (
    CorpusFormatError,
    CorpusReadError,
    DuplicateDocumentError,
    flatten_validation_detail,
)
from .serializers import DocumentRecordSerializer

logger = logging.getLogger(__name__)

TERMINATORS = '。！？!?.；;'
CLOSERS = '」』”’"\'）)】]》〉'
TSV_HEADER = ('id', 'label', 'text')

_SENTENCE_RE = re.compile(
    rf'[^{re.escape(TERMINATORS)}]*(?:[{re.escape(TERMINATORS)}]+[{re.escape(CLOSERS)}]*|\Z)'
)
_NOISE_CATEGORIES = ('P', 'N', 'Z', 'S')


@dataclass(frozen=True)
class Document:
    """One review sentence with its gold label and, once segmented, its tokens."""
    id: str
    text: str
    label: Label = Label.UNLABELED
    tokens: tuple | None = None

    def __post_init__(self):
        if self.tokens is not None and not isinstance(self.tokens, tuple):
            object.__setattr__(self, 'tokens', tuple(self.tokens))

    @property
    def is_labeled(self):
        return self.label != Label.UNLABELED

    def with_tokens(self, tokens):
        return replace(self, tokens=tuple(tokens))

    def to_record(self):
        return {
            'id': self.id,
            'text': self.text,
            'label': self.label.value if self.is_labeled else None,
            'tokens': list(self.tokens) if self.tokens is not None else None,
        }


@dataclass(frozen=True)
class Corpus:
    documents: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.documents, tuple):
            object.__setattr__(self, 'documents', tuple(self.documents))

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def num_positive(self):
        return sum(1 for doc in self.documents if doc.label == Label.POSITIVE)

    @property
    def num_negative(self):
        return sum(1 for doc in self.documents if doc.label == Label.NEGATIVE)

    @property
    def num_unlabeled(self):
        return sum(1 for doc in self.documents if doc.label == Label.UNLABELED)

    @property
    def counts(self):
        return {
            Label.POSITIVE: self.num_positive,
            Label.NEGATIVE: self.num_negative,
            Label.UNLABELED: self.num_unlabeled,
        }

    def labeled(self):
        return Corpus(tuple(doc for doc in self.documents if doc.is_labeled))

    def unlabeled(self):
        return Corpus(tuple(doc for doc in self.documents if not doc.is_labeled))

    def with_documents(self, documents):
        return Corpus(tuple(documents))


@dataclass(frozen=True)
class CorpusSummary:
    num_documents: int
    num_positive: int
    num_negative: int
    num_unlabeled: int
    num_distinct_tokens: int
    num_noise_tokens: int


def _parse_record(raw, line_number):
    serializer = DocumentRecordSerializer(data=raw)
    try:
        serializer.is_valid(raise_exception=True)
    except serializers.ValidationError as exc:
        raise CorpusFormatError('; '.join(flatten_validation_detail(exc.detail)), line_number) from exc
    data = serializer.validated_data
    tokens = data.get('tokens')
    return Document(
        id=data['id'],
        text=data['text'],
        label=data.get('label', Label.UNLABELED),
        tokens=tuple(tokens) if tokens is not None else None,
    )


def _iter_jsonl(lines):
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f'invalid JSON ({exc.msg})', line_number) from exc
        if not isinstance(raw, dict):
            raise CorpusFormatError('record must be a JSON object', line_number)
        yield line_number, raw


def _iter_tsv(lines):
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip('\r\n')
        if not line.strip():
            continue
        columns = line.split('\t', 2)
        if line_number == 1 and tuple(column.strip().lower() for column in columns) == TSV_HEADER:
            continue
        if len(columns) != 3:
            raise CorpusFormatError('expected id<TAB>label<TAB>text', line_number)
        doc_id, label, text = columns
        yield line_number, {'id': doc_id, 'label': label or None, 'text': text}


def load_corpus(path, format=CorpusFormat.JSONL):
    """
    Read a corpus file. Labels other than positive/negative load as unlabeled.
    """
    path = Path(path)
    fmt = CorpusFormat(format)
    try:
        with path.open(encoding='utf-8') as handle:
            lines = handle.read().split('\n')
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusReadError(f'cannot read corpus {path}: {exc}') from exc

    records = _iter_jsonl(lines) if fmt == CorpusFormat.JSONL else _iter_tsv(lines)
    documents = []
    seen = set()
    for line_number, raw in records:
        document = _parse_record(raw, line_number)
        if document.id in seen:
            raise DuplicateDocumentError(document.id, line_number)
        seen.add(document.id)
        documents.append(document)

    corpus = Corpus(tuple(documents))
    logger.info(
        'Loaded %d documents from %s (positive=%d, negative=%d, unlabeled=%d)',
        len(corpus), path, corpus.num_positive, corpus.num_negative, corpus.num_unlabeled,
    )
    return corpus


def save_corpus(corpus, path):
    """Write canonical JSONL, one record per line."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='\n') as handle:
            for document in corpus.documents:
                handle.write(json.dumps(document.to_record(), ensure_ascii=False))
                handle.write('\n')
    except OSError as exc:
        raise CorpusReadError(f'cannot write corpus {path}: {exc}') from exc
    logger.debug('Wrote %d documents to %s', len(corpus), path)


def _is_filler(fragment):
    # Whitespace, terminators and closers only.
    return all(ch.isspace() or ch in TERMINATORS or ch in CLOSERS for ch in fragment)


def split_sentences(doc):
    """
    Split on terminal punctuation runs followed by optional closing quotes.

    Fragments without content are glued to a neighbour, so the children
    concatenate back to the parent text.
    """
    fragments = [match.group() for match in _SENTENCE_RE.finditer(doc.text) if match.group()]
    pieces = []
    pending = ''
    for fragment in fragments:
        if _is_filler(fragment):
            if pieces:
                pieces[-1] += fragment
            else:
                pending += fragment
            continue
        pieces.append(pending + fragment)
        pending = ''
    if pending:
        pieces.append(pending)

    return [
        Document(id=f'{doc.id}#{ordinal}', text=piece, label=doc.label)
        for ordinal, piece in enumerate(pieces, start=1)
    ]


def split_corpus(corpus):
    """Split every untokenized document; tokenized records are already sentences."""
    documents = []
    for doc in corpus.documents:
        if doc.tokens is not None:
            documents.append(doc)
        else:
            documents.extend(split_sentences(doc))
    logger.info('Split %d documents into %d sentences', len(corpus), len(documents))
    return Corpus(tuple(documents))


def is_noise(token):
    return all(unicodedata.category(ch)[0] in _NOISE_CATEGORIES or ch.isspace() for ch in token)


def filter_noise(tokens):
    """Drop tokens made only of punctuation, digits, separators or symbols."""
    return [token for token in tokens if not is_noise(token)]


def describe_corpus(corpus):
    distinct = set()
    for doc in corpus.documents:
        if doc.tokens is not None:
            distinct.update(doc.tokens)
    return CorpusSummary(
        num_documents=len(corpus),
        num_positive=corpus.num_positive,
        num_negative=corpus.num_negative,
        num_unlabeled=corpus.num_unlabeled,
        num_distinct_tokens=len(distinct),
        num_noise_tokens=sum(1 for token in distinct if is_noise(token)),
    )
