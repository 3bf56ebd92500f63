"""
Word segmentation strategies for unspaced Chinese text.

Pre-segmented input (tokens already on the record, or whitespace-delimited
text) is first class. The dictionary modes implement greedy maximum
matching; out-of-vocabulary runs fall back to single code points so no
character is ever lost.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .choices import SegmenterMode
from .corpus_io import filter_noise
from .exceptions import DictionaryError, SegmentationError, SegmenterConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmenterConfig:
    mode: SegmenterMode = SegmenterMode.PRETOKENIZED
    dictionary_path: Path | None = None
    max_word_len: int = 6
    dictionary: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, 'mode', SegmenterMode(self.mode))
        if self.dictionary_path is not None:
            object.__setattr__(self, 'dictionary_path', Path(self.dictionary_path))
        if self.dictionary is not None:
            object.__setattr__(self, 'dictionary', frozenset(self.dictionary))

    def validate(self):
        if self.max_word_len < 1:
            raise SegmenterConfigError('max_word_len must be at least 1')
        if not self.mode.needs_dictionary:
            return
        if self.dictionary is None and self.dictionary_path is None:
            raise SegmenterConfigError(f'{self.mode.value} mode requires a dictionary')
        if self.dictionary is not None and not self.dictionary:
            raise DictionaryError('empty dictionary')

    def resolved(self):
        """Return a copy with the dictionary file loaded, validating on the way."""
        self.validate()
        if self.mode.needs_dictionary and self.dictionary is None:
            return replace(self, dictionary=load_dictionary(self.dictionary_path))
        return self


def load_dictionary(path):
    """One word per line; blank lines and '#' comments are skipped."""
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise DictionaryError(f'cannot read dictionary {path}: {exc}') from exc
    words = set()
    for line in lines:
        word = line.strip()
        if word and not word.startswith('#'):
            words.add(word)
    if not words:
        raise DictionaryError(f'empty dictionary: {path}')
    logger.debug('Loaded %d dictionary words from %s', len(words), path)
    return frozenset(words)


def forward_match(chunk, dictionary, max_word_len):
    tokens = []
    position = 0
    while position < len(chunk):
        for length in range(min(max_word_len, len(chunk) - position), 1, -1):
            candidate = chunk[position:position + length]
            if candidate in dictionary:
                break
        else:
            candidate = chunk[position]
        tokens.append(candidate)
        position += len(candidate)
    return tokens


def backward_match(chunk, dictionary, max_word_len):
    tokens = []
    end = len(chunk)
    while end > 0:
        for length in range(min(max_word_len, end), 1, -1):
            candidate = chunk[end - length:end]
            if candidate in dictionary:
                break
        else:
            candidate = chunk[end - 1]
        tokens.append(candidate)
        end -= len(candidate)
    tokens.reverse()
    return tokens


def bidirectional_match(chunk, dictionary, max_word_len):
    """Fewer tokens wins, then fewer single characters, then forward."""
    forward = forward_match(chunk, dictionary, max_word_len)
    backward = backward_match(chunk, dictionary, max_word_len)
    if len(forward) != len(backward):
        return forward if len(forward) < len(backward) else backward
    singles_forward = sum(1 for token in forward if len(token) == 1)
    singles_backward = sum(1 for token in backward if len(token) == 1)
    return backward if singles_backward < singles_forward else forward


_MATCHERS = {
    SegmenterMode.MAX_MATCH: forward_match,
    SegmenterMode.BACKWARD_MATCH: backward_match,
    SegmenterMode.BIDIRECTIONAL: bidirectional_match,
}


def segment(text, config):
    """
    Tokenize text. Whitespace always separates tokens and never appears in
    them, so ''.join(tokens) equals the text with whitespace removed.
    """
    if not text or not text.strip():
        raise SegmentationError('cannot segment empty text')
    config = config.resolved()
    chunks = text.split()
    matcher = _MATCHERS.get(config.mode)
    if matcher is None:
        return chunks
    tokens = []
    for chunk in chunks:
        tokens.extend(matcher(chunk, config.dictionary, config.max_word_len))
    return tokens


def segment_corpus(corpus, config):
    """Segment and noise-filter every document of a corpus."""
    config = config.resolved()
    documents = []
    for doc in corpus.documents:
        if config.mode == SegmenterMode.PRETOKENIZED and doc.tokens is not None:
            tokens = doc.tokens
        else:
            tokens = segment(doc.text, config)
        documents.append(doc.with_tokens(filter_noise(tokens)))
    logger.info('Segmented %d documents (mode=%s)', len(documents), config.mode.value)
    return corpus.with_documents(documents)
