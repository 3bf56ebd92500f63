from entrokey.choices import SegmenterMode
from entrokey.corpus_io import describe_corpus, load_corpus, save_corpus
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import CORPUS_FILE, SEGMENTED_FILE
from entrokey.segmentation import segment_corpus


class Command(EntrokeyCommand):
    help = 'Segment every document of a corpus and drop noise tokens'
    config_flags = {
        'mode': 'segmenter.mode',
        'dict': 'segmenter.dictionary_path',
        'max_word_len': 'segmenter.max_word_len',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--input', help=f'Corpus JSONL (default <out-dir>/{CORPUS_FILE})')
        parser.add_argument('--out', help=f'Output JSONL (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--mode', choices=SegmenterMode.values)
        parser.add_argument('--dict', help='Dictionary file, one word per line')
        parser.add_argument('--max-word-len', dest='max_word_len', type=int)

    def run(self, config, options):
        corpus = load_corpus(self.out_path(config, options.get('input'), CORPUS_FILE))
        segmented = segment_corpus(corpus, config.segmenter)
        out = self.out_path(config, options.get('out'), SEGMENTED_FILE)
        save_corpus(segmented, out)
        summary = describe_corpus(segmented)
        self.success(f'Segmented {summary.num_documents} documents ({summary.num_distinct_tokens} distinct tokens) into {out}')
