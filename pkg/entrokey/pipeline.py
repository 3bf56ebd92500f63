"""
Run orchestration: configuration loading, the synthetic corpus generator,
the keyword report and the staged pipeline with its manifest.

Stages run in a fixed order and talk to each other only through the files
recorded in the output directory's manifest.json.
"""

import hashlib
import json
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.db import DatabaseError, transaction
from django.utils import timezone
from rest_framework import serializers

from .choices import ConsensusLabel, CorpusFormat, Label, Polarity
from .conf import get_setting, output_dir
from .corpus_io import Corpus, Document, describe_corpus, load_corpus, save_corpus, split_corpus
from .entropy_keywords import (
    ExtractionConfig,
    build_count_table,
    compute_stats,
    load_keyword_list,
    load_stats,
    save_keyword_list,
    save_stats,
    select_keywords,
    sweep_alphas,
)
from .evaluation import grid_report, label_corpus, save_labeled, save_reports, sweep_penalty
from .exceptions import (
    ConfigError,
    DuplicateDocumentError,
    EntrokeyError,
    KeywordError,
    OutputLockedError,
    StageError,
    flatten_validation_detail,
)
from .linear_svm import TrainConfig, build_training_set, load_model, save_model, train
from .segmentation import SegmenterConfig, segment_corpus
from .serializers import RunConfigSerializer, SyntheticSpecSerializer

logger = logging.getLogger(__name__)

STAGES = ('ingest', 'segment', 'keywords', 'grid', 'train', 'predict', 'report')
MANIFEST_NAME = 'manifest.json'
LOCK_NAME = '.entrokey.lock'

# Output layout, relative to the run directory.
CORPUS_FILE = 'corpus.jsonl'
TRUTH_FILE = 'truth.json'
SEGMENTED_FILE = 'segmented.jsonl'
STATS_FILE = 'keywords/stats.tsv'
BEST_POSITIVE_FILE = 'keywords/best_positive.tsv'
BEST_NEGATIVE_FILE = 'keywords/best_negative.tsv'
COMBINED_FILE = 'keywords/combined.tsv'
GRID_REPORT_FILE = 'reports/grid.tsv'
PENALTY_REPORT_FILE = 'reports/penalty.tsv'
POSITIVE_MODEL_FILE = 'models/positive.model'
NEGATIVE_MODEL_FILE = 'models/negative.model'
LABELED_FILE = 'labeled.jsonl'
KEYWORD_REPORT_FILE = 'reports/keywords.tsv'
SUMMARY_FILE = 'reports/summary.json'

REPORT_KEYWORD_COLUMNS = ('polarity', 'rank', 'word', 'h_pos', 'h_neg', 'ratio')


def derive_seed(seed, stage):
    """Stage seed: the first 8 bytes of sha256('<seed>:<stage>')."""
    digest = hashlib.sha256(f'{int(seed)}:{stage}'.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def keyword_list_file(polarity, alpha):
    """keywords/positive-1.5.tsv; the alpha is written losslessly."""
    return f'keywords/{Polarity(polarity).value}-{float(alpha)!r}.tsv'


@dataclass(frozen=True)
class SyntheticSpec:
    planted_pos_vocab: tuple
    planted_neg_vocab: tuple
    shared_vocab: tuple
    num_pos_docs: int = 200
    num_neg_docs: int = 200
    num_unlabeled: int = 100
    doc_length: int = 12
    noise_rate: float = 0.1
    seed: int = 42

    @classmethod
    def from_data(cls, data, seed=None):
        """
        Build a spec from a (possibly partial) mapping; vocabularies that are
        not given are named p000.., n000.. and s000.. up to the requested sizes.
        """
        serializer = SyntheticSpecSerializer(data=data)
        try:
            serializer.is_valid(raise_exception=True)
        except serializers.ValidationError as exc:
            raise ConfigError('; '.join(flatten_validation_detail(exc.detail, 'synthetic'))) from exc
        values = dict(serializer.validated_data)
        planted_size = values.pop('planted_size')
        shared_size = values.pop('shared_size')
        defaults = {
            'planted_pos_vocab': [f'p{i:03d}' for i in range(planted_size)],
            'planted_neg_vocab': [f'n{i:03d}' for i in range(planted_size)],
            'shared_vocab': [f's{i:03d}' for i in range(shared_size)],
        }
        for name, words in defaults.items():
            if values.get(name) is None:
                values[name] = words
            values[name] = tuple(values[name])
        if values.get('seed') is None:
            values['seed'] = seed if seed is not None else get_setting('SEED')
        return cls(**values)


@dataclass(frozen=True)
class SyntheticCorpus:
    """Generated corpus plus the generator polarity of every unlabeled document."""
    corpus: Corpus
    truth: dict


def generate_synthetic(spec):
    """
    Positive documents draw from planted_pos_vocab + shared_vocab, negative
    ones from planted_neg_vocab + shared_vocab. Each token is replaced with
    probability noise_rate by a word drawn uniformly from all vocabularies.
    """
    rng = np.random.default_rng(spec.seed)
    everything = spec.planted_pos_vocab + spec.planted_neg_vocab + spec.shared_vocab
    pools = {
        Label.POSITIVE: spec.planted_pos_vocab + spec.shared_vocab,
        Label.NEGATIVE: spec.planted_neg_vocab + spec.shared_vocab,
    }

    def draw(polarity):
        pool = pools[polarity]
        tokens = []
        for _ in range(spec.doc_length):
            if rng.random() < spec.noise_rate:
                tokens.append(everything[int(rng.integers(len(everything)))])
            else:
                tokens.append(pool[int(rng.integers(len(pool)))])
        return tokens

    documents = []
    for prefix, polarity, count in (
        ('pos', Label.POSITIVE, spec.num_pos_docs),
        ('neg', Label.NEGATIVE, spec.num_neg_docs),
    ):
        for i in range(1, count + 1):
            tokens = draw(polarity)
            documents.append(Document(id=f'{prefix}-{i:04d}', text=' '.join(tokens), label=polarity, tokens=tokens))

    truth = {}
    for i in range(1, spec.num_unlabeled + 1):
        polarity = Label.POSITIVE if rng.random() < 0.5 else Label.NEGATIVE
        tokens = draw(polarity)
        doc_id = f'unl-{i:04d}'
        documents.append(Document(id=doc_id, text=' '.join(tokens), tokens=tokens))
        truth[doc_id] = polarity.value

    logger.info(
        'Generated synthetic corpus: %d positive, %d negative, %d unlabeled (seed=%d)',
        spec.num_pos_docs, spec.num_neg_docs, spec.num_unlabeled, spec.seed,
    )
    return SyntheticCorpus(corpus=Corpus(tuple(documents)), truth=truth)


def save_truth(truth, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(truth, indent=2, sort_keys=True) + '\n', encoding='utf-8', newline='\n')


def _ratio(numerator, denominator):
    if denominator > 0:
        return numerator / denominator
    return math.inf if numerator > 0 else 0.0


def _ranked(keywords, by_word):
    rows = []
    for word in keywords.words:
        entry = by_word.get(word)
        if entry is None:
            raise KeywordError(f'no entropy statistics for keyword {word!r}')
        if keywords.polarity == Polarity.POSITIVE:
            h_own, h_other = entry.h_pos, entry.h_neg
        elif keywords.polarity == Polarity.NEGATIVE:
            h_own, h_other = entry.h_neg, entry.h_pos
        else:
            h_own, h_other = max(entry.h_pos, entry.h_neg), min(entry.h_pos, entry.h_neg)
        rows.append((entry, _ratio(h_own, h_other), h_own))
    rows.sort(key=lambda row: (-row[1], -row[2], row[0].word))
    return rows


def report_keywords(stats, lists, path, top_n=20):
    """
    Top-n words of every list ranked by own-class over other-class entropy,
    then by own-class entropy. Writes a TSV and an aligned .txt rendering.
    """
    by_word = {s.word: s for s in stats}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    tsv = ['\t'.join(REPORT_KEYWORD_COLUMNS)]
    blocks = []
    for keywords in lists:
        rows = _ranked(keywords, by_word)[:top_n]
        table = []
        for rank, (entry, ratio, _) in enumerate(rows, start=1):
            cells = (
                keywords.polarity.value,
                str(rank),
                entry.word,
                f'{entry.h_pos:.6f}',
                f'{entry.h_neg:.6f}',
                'inf' if math.isinf(ratio) else f'{ratio:.6f}',
            )
            tsv.append('\t'.join(cells))
            table.append(cells[1:])
        blocks.append(_render_block(keywords.name, REPORT_KEYWORD_COLUMNS[1:], table))

    path.write_text('\n'.join(tsv) + '\n', encoding='utf-8', newline='\n')
    text_path = path.with_suffix('.txt')
    text_path.write_text('\n'.join(blocks), encoding='utf-8', newline='\n')
    return path, text_path


def _render_block(title, header, rows):
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    rule = '+'.join('-' * (width + 2) for width in widths)
    lines = [title, rule, ' | '.join(cell.ljust(width) for cell, width in zip(header, widths)), rule]
    lines.extend(' | '.join(cell.ljust(width) for cell, width in zip(row, widths)) for row in rows)
    lines.append(rule)
    return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class RunConfig:
    seed: int
    out_dir: Path
    inputs: tuple = ()
    input_format: CorpusFormat = CorpusFormat.JSONL
    unlabeled_inputs: tuple = ()
    split_sentences: bool = True
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    alpha_min: float = 1.0
    alpha_max: float = 3.75
    alpha_step: float = 0.25
    top_n: int = 20
    train: TrainConfig = field(default_factory=TrainConfig)
    k: int = 10
    positive_detector: str = 'combined'
    positive_alpha: float | None = None
    negative_alpha: float | None = None
    c_values: tuple = ()
    synthetic: SyntheticSpec | None = None
    config_hash: str = ''

    @property
    def uses_synthetic(self):
        """Without input files the run generates its corpus from the synthetic spec."""
        return not self.inputs

    @property
    def fold_seed(self):
        return derive_seed(self.seed, 'folds')


def _apply_override(data, dotted, value):
    *parents, leaf = dotted.split('.')
    node = data
    for name in parents:
        child = node.setdefault(name, {})
        if not isinstance(child, dict):
            raise ConfigError(f'{dotted}: {name} is not a table')
        node = child
    node[leaf] = value


def _read_toml(path):
    try:
        with open(path, 'rb') as handle:
            return tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f'cannot read config {path}: {exc}') from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f'invalid TOML in {path}: {exc}') from exc


def load_run_config(path=None, overrides=None):
    """
    Read a TOML run configuration and apply dotted-key overrides
    (e.g. {'train.c': 2.0}); None values are ignored, so flags win only
    when given.
    """
    data = _read_toml(path) if path else {}
    for dotted, value in (overrides or {}).items():
        if value is not None:
            _apply_override(data, dotted, value)
    for section in RunConfigSerializer.SECTIONS:
        data.setdefault(section, {})

    serializer = RunConfigSerializer(data=data)
    try:
        serializer.is_valid(raise_exception=True)
    except serializers.ValidationError as exc:
        raise ConfigError('invalid configuration: ' + '; '.join(flatten_validation_detail(exc.detail))) from exc
    validated = serializer.validated_data
    seed = validated['seed']

    corpus = validated['corpus']
    segmenter = validated['segmenter']
    keywords = validated['keywords']
    training = validated['train']
    evaluation = validated['evaluation']

    synthetic = SyntheticSpec.from_data(data['synthetic'], seed=derive_seed(seed, 'synthetic'))

    canonical = json.dumps(
        {name: validated[name] for name in ('seed', *RunConfigSerializer.SECTIONS)},
        sort_keys=True, default=str,
    )
    return RunConfig(
        seed=seed,
        out_dir=Path(output_dir(validated['out_dir'])),
        inputs=tuple(Path(p) for p in corpus['inputs']),
        input_format=CorpusFormat(corpus['format']),
        unlabeled_inputs=tuple(Path(p) for p in corpus['unlabeled']),
        split_sentences=corpus['split_sentences'],
        segmenter=SegmenterConfig(
            mode=segmenter['mode'],
            dictionary_path=segmenter['dictionary_path'],
            max_word_len=segmenter['max_word_len'],
        ),
        alpha_min=keywords['alpha_min'],
        alpha_max=keywords['alpha_max'],
        alpha_step=keywords['alpha_step'],
        top_n=keywords['top_n'],
        train=TrainConfig(
            trainer=training['trainer'],
            c=training['c'],
            epochs=training['epochs'],
            learning_rate=training['learning_rate'],
            tolerance=training['tolerance'],
            seed=training['seed'] if training['seed'] is not None else derive_seed(seed, 'train'),
        ),
        k=evaluation['k'],
        positive_detector=evaluation['positive_detector'],
        positive_alpha=evaluation['positive_alpha'],
        negative_alpha=evaluation['negative_alpha'],
        c_values=tuple(evaluation['c_values']),
        synthetic=synthetic,
        config_hash=hashlib.sha256(canonical.encode('utf-8')).hexdigest(),
    )


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for block in iter(lambda: handle.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


class Manifest:
    """
    manifest.json of a run directory. No timestamps are stored, so identical
    runs produce identical manifests.

    Stages register each output with track() before writing it, so a stage
    that fails halfway still lists the files it left behind.
    """

    def __init__(self, out_dir, seed, config_hash):
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.config_hash = config_hash
        self.status = 'RUNNING'
        self.failed_stage = None
        self.message = ''
        self.stages = []
        self.pending = []

    @property
    def path(self):
        return self.out_dir / MANIFEST_NAME

    def artifacts(self, stage=None):
        for entry in self.stages:
            if stage is None or entry['name'] == stage:
                yield from entry['artifacts']

    def track(self, relative):
        """Full path of a file the running stage is about to write."""
        if str(relative) not in self.pending:
            self.pending.append(str(relative))
        return self.out_dir / relative

    def record(self, stage, relative_paths=None, status='OK'):
        if relative_paths is None:
            relative_paths = self.pending
        artifacts = []
        for relative in dict.fromkeys(str(p) for p in relative_paths):
            full = self.out_dir / relative
            artifacts.append({
                'path': relative,
                'sha256': file_sha256(full),
                'size': full.stat().st_size,
            })
        self.stages.append({'name': stage, 'status': status, 'artifacts': artifacts})
        self.pending = []
        self.write()

    def fail(self, stage, message, relative_paths=None):
        if relative_paths is None:
            relative_paths = self.pending
        existing = [p for p in relative_paths if (self.out_dir / p).is_file()]
        self.status = 'FAILED'
        self.failed_stage = stage
        self.message = message
        self.record(stage, existing, status='FAILED')

    def finish(self):
        self.status = 'OK'
        self.write()

    def as_dict(self):
        return {
            'status': self.status,
            'failed_stage': self.failed_stage,
            'message': self.message,
            'seed': str(self.seed),
            'config_hash': self.config_hash,
            'stages': self.stages,
        }

    def write(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8', newline='\n')

    def resolve(self, relative):
        """Full path of an artifact recorded by an earlier stage."""
        for artifact in self.artifacts():
            if artifact['path'] == str(relative):
                return self.out_dir / relative
        raise EntrokeyError(f'{relative} was not produced by an earlier stage')

    def has(self, relative):
        return any(artifact['path'] == str(relative) for artifact in self.artifacts())


@contextmanager
def output_lock(out_dir):
    """One process per output directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lock_path = out_dir / LOCK_NAME
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as exc:
        raise OutputLockedError(f'{out_dir} is in use by another run (remove {lock_path} if stale)') from exc
    try:
        os.write(fd, str(os.getpid()).encode('ascii'))
        os.close(fd)
        yield lock_path
    finally:
        lock_path.unlink(missing_ok=True)


def _labeled_and_unlabeled(manifest):
    corpus = load_corpus(manifest.resolve(SEGMENTED_FILE))
    return corpus.labeled(), corpus.unlabeled()


def ingest_corpus(config):
    """Load the labeled and unlabeled input files into one sentence-level corpus."""
    if not config.inputs:
        raise ConfigError('no input corpus given ([corpus] inputs or --input)')
    documents = []
    for path in config.inputs:
        documents.extend(load_corpus(path, config.input_format).documents)
    for path in config.unlabeled_inputs:
        documents.extend(
            Document(id=doc.id, text=doc.text, tokens=doc.tokens)
            for doc in load_corpus(path, config.input_format).documents
        )
    corpus = Corpus(tuple(documents))
    if config.split_sentences:
        corpus = split_corpus(corpus)
    seen = set()
    for doc in corpus.documents:
        if doc.id in seen:
            raise DuplicateDocumentError(doc.id)
        seen.add(doc.id)
    return corpus


def stage_ingest(config, manifest):
    if config.uses_synthetic:
        generated = generate_synthetic(config.synthetic)
        save_corpus(generated.corpus, manifest.track(CORPUS_FILE))
        save_truth(generated.truth, manifest.track(TRUTH_FILE))
    else:
        save_corpus(ingest_corpus(config), manifest.track(CORPUS_FILE))


def stage_segment(config, manifest):
    corpus = load_corpus(manifest.resolve(CORPUS_FILE))
    segmented = segment_corpus(corpus, config.segmenter)
    save_corpus(segmented, manifest.track(SEGMENTED_FILE))


def write_keyword_sweep(stats, config, out_dir, written=None):
    """
    Entropy statistics plus one list file per non-empty grid list. Each
    relative path is appended to written before its file is written.
    """
    out_dir = Path(out_dir)
    written = [] if written is None else written
    written.append(STATS_FILE)
    save_stats(stats, out_dir / STATS_FILE)
    sweep = sweep_alphas(stats, config.alpha_min, config.alpha_max, config.alpha_step)
    for lists in (sweep.positive, sweep.negative):
        for alpha, keywords in lists.items():
            if not keywords.words:
                continue
            relative = keyword_list_file(keywords.polarity, alpha)
            written.append(relative)
            save_keyword_list(keywords, stats, out_dir / relative)
    return written


def stage_keywords(config, manifest):
    labeled, _ = _labeled_and_unlabeled(manifest)
    write_keyword_sweep(compute_stats(build_count_table(labeled)), config, config.out_dir, written=manifest.pending)


def write_grid(labeled, stats, config, out_dir, written=None):
    """
    Grid report, the best list of each polarity and their combination;
    with c_values set, also the penalty sweep of the combined list.
    """
    grid = sweep_alphas(stats, config.alpha_min, config.alpha_max, config.alpha_step).grid
    result = grid_report(labeled, stats, grid, config.train, config.k, config.fold_seed)
    out = Path(out_dir)
    written = [] if written is None else written
    written.extend([GRID_REPORT_FILE, str(Path(GRID_REPORT_FILE).with_suffix('.txt'))])
    save_reports(result.reports, out / GRID_REPORT_FILE)
    for relative, keywords in (
        (BEST_POSITIVE_FILE, result.best_positive),
        (BEST_NEGATIVE_FILE, result.best_negative),
        (COMBINED_FILE, result.combined),
    ):
        written.append(relative)
        save_keyword_list(keywords, stats, out / relative)
    if config.c_values:
        reports = sweep_penalty(labeled, result.combined, config.c_values, config.train, config.k, config.fold_seed)
        written.extend([PENALTY_REPORT_FILE, str(Path(PENALTY_REPORT_FILE).with_suffix('.txt'))])
        save_reports(reports, out / PENALTY_REPORT_FILE)
    return written


def stage_grid(config, manifest):
    labeled, _ = _labeled_and_unlabeled(manifest)
    write_grid(labeled, load_stats(manifest.resolve(STATS_FILE)), config, config.out_dir, written=manifest.pending)


def _detector_lists(config, manifest):
    stats = None
    if config.positive_alpha is not None or config.negative_alpha is not None:
        stats = load_stats(manifest.resolve(STATS_FILE))

    if config.positive_detector == 'combined':
        positive = load_keyword_list(manifest.resolve(COMBINED_FILE))
    elif config.positive_alpha is not None:
        alpha = config.positive_alpha
        positive = select_keywords(stats, ExtractionConfig(alpha=alpha, alpha_prime=alpha), Polarity.POSITIVE)
    else:
        positive = load_keyword_list(manifest.resolve(BEST_POSITIVE_FILE))

    if config.negative_alpha is not None:
        alpha = config.negative_alpha
        negative = select_keywords(stats, ExtractionConfig(alpha=alpha, alpha_prime=alpha), Polarity.NEGATIVE)
    else:
        negative = load_keyword_list(manifest.resolve(BEST_NEGATIVE_FILE))

    for keywords in (positive, negative):
        if not keywords.words:
            raise KeywordError(f'{keywords.name} is empty; no detector can be trained on it')
    return positive, negative


def stage_train(config, manifest):
    labeled, _ = _labeled_and_unlabeled(manifest)
    positive, negative = _detector_lists(config, manifest)
    pos_model = train(build_training_set(labeled, positive, target=Label.POSITIVE), config.train)
    neg_model = train(build_training_set(labeled, negative, target=Label.NEGATIVE), config.train)
    save_model(pos_model, manifest.track(POSITIVE_MODEL_FILE))
    save_model(neg_model, manifest.track(NEGATIVE_MODEL_FILE))


def stage_predict(config, manifest):
    _, unlabeled = _labeled_and_unlabeled(manifest)
    if not len(unlabeled):
        logger.warning('No unlabeled documents; %s will be empty', LABELED_FILE)
    pos_model = load_model(manifest.resolve(POSITIVE_MODEL_FILE))
    neg_model = load_model(manifest.resolve(NEGATIVE_MODEL_FILE))
    labeled = label_corpus(unlabeled, pos_model, neg_model)
    save_labeled(labeled, manifest.track(LABELED_FILE))


def truth_agreement(labeled_path, truth):
    """Share of non-neutral consensus labels that match the generator polarity."""
    matched = decided = neutral = 0
    with open(labeled_path, encoding='utf-8') as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            if record['consensus'] == ConsensusLabel.NEUTRAL:
                neutral += 1
                continue
            decided += 1
            matched += record['consensus'] == truth.get(record['id'])
    return {
        'decided': decided,
        'neutral': neutral,
        'matched': matched,
        'agreement': matched / decided if decided else 0.0,
    }


def stage_report(config, manifest):
    stats = load_stats(manifest.resolve(STATS_FILE))
    lists = [
        load_keyword_list(manifest.resolve(BEST_POSITIVE_FILE)),
        load_keyword_list(manifest.resolve(BEST_NEGATIVE_FILE)),
    ]
    path = manifest.track(KEYWORD_REPORT_FILE)
    manifest.track(Path(KEYWORD_REPORT_FILE).with_suffix('.txt'))
    report_keywords(stats, lists, path, config.top_n)

    summary_corpus = describe_corpus(load_corpus(manifest.resolve(SEGMENTED_FILE)))
    consensus = {label.value: 0 for label in ConsensusLabel}
    with open(manifest.resolve(LABELED_FILE), encoding='utf-8') as handle:
        for line in handle:
            if line.strip():
                consensus[json.loads(line)['consensus']] += 1
    summary = {
        'corpus': {
            'documents': summary_corpus.num_documents,
            'positive': summary_corpus.num_positive,
            'negative': summary_corpus.num_negative,
            'unlabeled': summary_corpus.num_unlabeled,
            'distinct_tokens': summary_corpus.num_distinct_tokens,
        },
        'keywords': {keywords.polarity.value: {'alpha': keywords.alpha_label, 'size': len(keywords)} for keywords in lists},
        'consensus': consensus,
    }
    if manifest.has(TRUTH_FILE):
        truth = json.loads(manifest.resolve(TRUTH_FILE).read_text(encoding='utf-8'))
        summary['synthetic_check'] = truth_agreement(manifest.resolve(LABELED_FILE), truth)
    manifest.track(SUMMARY_FILE).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + '\n', encoding='utf-8', newline='\n'
    )


STAGE_FUNCTIONS = {
    'ingest': stage_ingest,
    'segment': stage_segment,
    'keywords': stage_keywords,
    'grid': stage_grid,
    'train': stage_train,
    'predict': stage_predict,
    'report': stage_report,
}


def _record_run(manifest):
    """Mirror a finished manifest into the run registry."""
    from .models import PipelineRun, RunArtifact

    if not get_setting('RECORD_RUNS'):
        return None
    try:
        with transaction.atomic():
            run = PipelineRun.objects.create(
                output_dir=str(manifest.out_dir),
                config_hash=manifest.config_hash,
                seed=manifest.seed,
                status=manifest.status,
                failed_stage=manifest.failed_stage or '',
                message=manifest.message,
                finished_at=timezone.now(),
            )
            RunArtifact.objects.bulk_create([
                RunArtifact(run=run, stage=entry['name'], path=artifact['path'], sha256=artifact['sha256'], size=artifact['size'])
                for entry in manifest.stages
                for artifact in entry['artifacts']
            ])
    except DatabaseError as exc:
        logger.warning('Run registry unavailable, run not recorded: %s', exc)
        return None
    return run


def run_pipeline(config, lock=True):
    """
    Execute every stage in order under the output-directory lock. A failing
    stage marks the manifest FAILED, keeps what was written and raises
    StageError naming the stage.

    Pass lock=False when the caller already holds the lock.
    """
    with output_lock(config.out_dir) if lock else nullcontext():
        manifest = Manifest(config.out_dir, config.seed, config.config_hash)
        manifest.write()
        for stage in STAGES:
            logger.info('Stage %s', stage)
            try:
                STAGE_FUNCTIONS[stage](config, manifest)
            except (EntrokeyError, OSError) as exc:
                manifest.fail(stage, str(exc))
                _record_run(manifest)
                logger.error('Stage %s failed: %s', stage, exc)
                raise StageError(stage, exc) from exc
            manifest.record(stage)
        manifest.finish()
        _record_run(manifest)
    logger.info('Run complete: %d artifacts in %s', len(list(manifest.artifacts())), config.out_dir)
    return manifest
