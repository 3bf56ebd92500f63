from entrokey.choices import ConsensusLabel
from entrokey.corpus_io import load_corpus
from entrokey.evaluation import label_corpus, save_labeled
from entrokey.linear_svm import load_model
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import LABELED_FILE, NEGATIVE_MODEL_FILE, POSITIVE_MODEL_FILE, SEGMENTED_FILE


class Command(EntrokeyCommand):
    help = 'Label unlabeled documents positive, neutral or negative with the two detectors'

    def add_command_arguments(self, parser):
        parser.add_argument('--pos-model', dest='pos_model', help=f'default <out-dir>/{POSITIVE_MODEL_FILE}')
        parser.add_argument('--neg-model', dest='neg_model', help=f'default <out-dir>/{NEGATIVE_MODEL_FILE}')
        parser.add_argument('--corpus', help=f'Segmented corpus (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--out', help=f'Labeled JSONL (default <out-dir>/{LABELED_FILE})')

    def run(self, config, options):
        pos_model = load_model(self.out_path(config, options.get('pos_model'), POSITIVE_MODEL_FILE))
        neg_model = load_model(self.out_path(config, options.get('neg_model'), NEGATIVE_MODEL_FILE))
        corpus = load_corpus(self.out_path(config, options.get('corpus'), SEGMENTED_FILE))
        labeled = label_corpus(corpus.unlabeled(), pos_model, neg_model)
        out = self.out_path(config, options.get('out'), LABELED_FILE)
        save_labeled(labeled, out)
        counts = labeled.counts
        self.success(
            f'Labeled {len(labeled.predictions)} documents -> {out} '
            f'(positive={counts[ConsensusLabel.POSITIVE]}, neutral={counts[ConsensusLabel.NEUTRAL]}, '
            f'negative={counts[ConsensusLabel.NEGATIVE]})'
        )
