from entrokey.corpus_io import save_corpus
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import CORPUS_FILE, TRUTH_FILE, generate_synthetic, save_truth


class Command(EntrokeyCommand):
    help = 'Generate a synthetic corpus with planted keywords and a truth file for its unlabeled part'
    config_flags = {
        'num_pos': 'synthetic.num_pos_docs',
        'num_neg': 'synthetic.num_neg_docs',
        'num_unlabeled': 'synthetic.num_unlabeled',
        'planted_size': 'synthetic.planted_size',
        'shared_size': 'synthetic.shared_size',
        'doc_length': 'synthetic.doc_length',
        'noise_rate': 'synthetic.noise_rate',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--num-pos', dest='num_pos', type=int)
        parser.add_argument('--num-neg', dest='num_neg', type=int)
        parser.add_argument('--num-unlabeled', dest='num_unlabeled', type=int)
        parser.add_argument('--planted-size', dest='planted_size', type=int)
        parser.add_argument('--shared-size', dest='shared_size', type=int)
        parser.add_argument('--doc-length', dest='doc_length', type=int)
        parser.add_argument('--noise-rate', dest='noise_rate', type=float)
        parser.add_argument('--out', help=f'Corpus JSONL (default <out-dir>/{CORPUS_FILE})')
        parser.add_argument('--truth', help=f'Truth JSON (default <out-dir>/{TRUTH_FILE})')

    def run(self, config, options):
        generated = generate_synthetic(config.synthetic)
        out = self.out_path(config, options.get('out'), CORPUS_FILE)
        truth = self.out_path(config, options.get('truth'), TRUTH_FILE)
        save_corpus(generated.corpus, out)
        save_truth(generated.truth, truth)
        self.success(f'Wrote {len(generated.corpus)} synthetic documents to {out} and truth to {truth}')
