from entrokey.corpus_io import describe_corpus, save_corpus
from entrokey.choices import CorpusFormat
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import CORPUS_FILE, ingest_corpus


class Command(EntrokeyCommand):
    help = 'Load labeled (and unlabeled) corpus files, split them into sentences and write canonical JSONL'
    config_flags = {
        'input': 'corpus.inputs',
        'unlabeled': 'corpus.unlabeled',
        'format': 'corpus.format',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--input', nargs='+', help='Labeled corpus file(s)')
        parser.add_argument('--unlabeled', nargs='+', help='Corpus file(s) loaded without labels')
        parser.add_argument('--format', choices=CorpusFormat.values)
        parser.add_argument('--no-split', action='store_true', help='Keep documents whole')
        parser.add_argument('--out', help=f'Output JSONL (default <out-dir>/{CORPUS_FILE})')

    def config_overrides(self, options):
        overrides = super().config_overrides(options)
        if options.get('no_split'):
            overrides['corpus.split_sentences'] = False
        return overrides

    def run(self, config, options):
        corpus = ingest_corpus(config)
        out = self.out_path(config, options.get('out'), CORPUS_FILE)
        save_corpus(corpus, out)
        summary = describe_corpus(corpus)
        self.success(
            f'Wrote {summary.num_documents} documents to {out} '
            f'(positive={summary.num_positive}, negative={summary.num_negative}, '
            f'unlabeled={summary.num_unlabeled})'
        )
