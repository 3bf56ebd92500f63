from entrokey.choices import Label, Trainer
from entrokey.corpus_io import load_corpus
from entrokey.entropy_keywords import load_keyword_list
from entrokey.linear_svm import build_training_set, save_model, train
from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import SEGMENTED_FILE


class Command(EntrokeyCommand):
    help = 'Train one binary detector on a keyword list and write the model file'
    config_flags = {
        'trainer': 'train.trainer',
        'c': 'train.c',
        'epochs': 'train.epochs',
        'learning_rate': 'train.learning_rate',
    }

    def add_command_arguments(self, parser):
        parser.add_argument('--keywords', required=True, help='Keyword list TSV used as the vocabulary')
        parser.add_argument('--corpus', help=f'Segmented corpus (default <out-dir>/{SEGMENTED_FILE})')
        parser.add_argument('--target', choices=[Label.POSITIVE, Label.NEGATIVE],
                            help='Class detected as +1 (default: the polarity of the list)')
        parser.add_argument('--trainer', choices=Trainer.values)
        parser.add_argument('--c', type=float)
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--learning-rate', dest='learning_rate', type=float)
        parser.add_argument('--out', help='Model file (default <out-dir>/models/<target>.model)')

    def config_overrides(self, options):
        overrides = super().config_overrides(options)
        # --seed seeds the trainer directly here
        overrides['train.seed'] = options.get('seed')
        return overrides

    def run(self, config, options):
        keywords = load_keyword_list(options['keywords'])
        target = Label(options['target']) if options.get('target') else keywords.target
        corpus = load_corpus(self.out_path(config, options.get('corpus'), SEGMENTED_FILE))
        data = build_training_set(corpus.labeled(), keywords, target=target)
        model = train(data, config.train)
        out = self.out_path(config, options.get('out'), f'models/{target.value}.model')
        save_model(model, out)
        self.success(
            f'Trained {config.train.trainer.value} detector for {target.value} '
            f'on {len(data)} documents x {model.dimension} keywords -> {out}'
        )
