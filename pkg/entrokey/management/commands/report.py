from entrokey.entropy_keywords import load_keyword_list, load_stats
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import BEST_NEGATIVE_FILE, BEST_POSITIVE_FILE, KEYWORD_REPORT_FILE, STATS_FILE, report_keywords


class Command(EntrokeyCommand):
    help = 'Ranked table of the top keywords of each list'
    config_flags = {
        'top_n': 'keywords.top_n',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--stats', help=f'Entropy statistics (default <out-dir>/{STATS_FILE})')
        parser.add_argument('--keywords', nargs='+',
                            help='Keyword list files (default the best lists of the grid)')
        parser.add_argument('--top-n', dest='top_n', type=int)
        parser.add_argument('--out', help=f'Report TSV (default <out-dir>/{KEYWORD_REPORT_FILE})')

    def run(self, config, options):
        stats = load_stats(self.out_path(config, options.get('stats'), STATS_FILE))
        paths = options.get('keywords') or [config.out_dir / BEST_POSITIVE_FILE, config.out_dir / BEST_NEGATIVE_FILE]
        lists = [load_keyword_list(path) for path in paths]
        tsv, text = report_keywords(stats, lists, self.out_path(config, options.get('out'), KEYWORD_REPORT_FILE), config.top_n)
        self.info(text.read_text(encoding='utf-8'))
        self.success(f'Keyword report written to {tsv}')
