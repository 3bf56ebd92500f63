from entrokey.corpus_io import load_corpus
from entrokey.entropy_keywords import build_count_table, compute_stats
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import SEGMENTED_FILE, write_keyword_sweep


class Command(EntrokeyCommand):
    help = 'Compute word entropies and write positive/negative keyword lists for every alpha of the grid'
    config_flags = {
        'alpha_min': 'keywords.alpha_min',
        'alpha_max': 'keywords.alpha_max',
        'alpha_step': 'keywords.alpha_step',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--corpus', help=f'Segmented corpus (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--alpha-min', dest='alpha_min', type=float)
        parser.add_argument('--alpha-max', dest='alpha_max', type=float)
        parser.add_argument('--alpha-step', dest='alpha_step', type=float)

    def run(self, config, options):
        corpus = load_corpus(self.out_path(config, options.get('corpus'), SEGMENTED_FILE))
        stats = compute_stats(build_count_table(corpus.labeled()))
        written = write_keyword_sweep(stats, config, config.out_dir)
        for relative in written:
            self.info(f'  {relative}')
        self.success(f'Wrote {len(written)} files under {config.out_dir}')
