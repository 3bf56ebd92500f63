from entrokey.corpus_io import load_corpus
from entrokey.entropy_keywords import build_count_table, compute_stats
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import GRID_REPORT_FILE, SEGMENTED_FILE, write_grid


class Command(EntrokeyCommand):
    help = 'Cross validate every keyword list of the alpha grid and the best combined list'
    config_flags = {
        'alpha_min': 'keywords.alpha_min',
        'alpha_max': 'keywords.alpha_max',
        'alpha_step': 'keywords.alpha_step',
        'k': 'evaluation.k',
        'c_values': 'evaluation.c_values',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--corpus', help=f'Segmented corpus (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--alpha-min', dest='alpha_min', type=float)
        parser.add_argument('--alpha-max', dest='alpha_max', type=float)
        parser.add_argument('--alpha-step', dest='alpha_step', type=float)
        parser.add_argument('--k', type=int)
        parser.add_argument('--c-values', dest='c_values', type=float, nargs='+',
                            help='Also cross validate the combined list under these penalties')

    def run(self, config, options):
        labeled = load_corpus(self.out_path(config, options.get('corpus'), SEGMENTED_FILE)).labeled()
        stats = compute_stats(build_count_table(labeled))
        written = write_grid(labeled, stats, config, config.out_dir)
        self.info((config.out_dir / GRID_REPORT_FILE).with_suffix('.txt').read_text(encoding='utf-8'))
        self.success(f'Wrote {len(written)} files under {config.out_dir}')
