from entrokey.choices import Label, Trainer
from entrokey.corpus_io import load_corpus
from entrokey.entropy_keywords import load_keyword_list
from entrokey.evaluation import cross_validate, render_report_table, save_reports
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import SEGMENTED_FILE


class Command(EntrokeyCommand):
    help = 'k-fold cross validation of one keyword list'
    config_flags = {
        'k': 'evaluation.k',
        'trainer': 'train.trainer',
        'c': 'train.c',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--keywords', required=True, help='Keyword list TSV')
        parser.add_argument('--corpus', help=f'Segmented corpus (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--k', type=int)
        parser.add_argument('--target', choices=[Label.POSITIVE, Label.NEGATIVE])
        parser.add_argument('--trainer', choices=Trainer.values)
        parser.add_argument('--c', type=float)
        parser.add_argument('--out', help='Report TSV (default <out-dir>/reports/eval.tsv)')

    def run(self, config, options):
        keywords = load_keyword_list(options['keywords'])
        corpus = load_corpus(self.out_path(config, options.get('corpus'), SEGMENTED_FILE))
        report = cross_validate(
            corpus.labeled(), keywords, config.train,
            k=config.k, seed=config.fold_seed, target=options.get('target'),
        )
        tsv, _ = save_reports([report], self.out_path(config, options.get('out'), 'reports/eval.tsv'))
        self.info(render_report_table([report]))
        self.success(f'Report written to {tsv}')
