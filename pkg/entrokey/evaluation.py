"""
Stratified k-fold cross validation, metrics, alpha-grid reports and the
three-way consensus labeler.
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .choices import ConsensusLabel, Label, Polarity
from .corpus_io import Corpus
from .entropy_keywords import ExtractionConfig, KeywordList, combine_lists, select_keywords
from .exceptions import (
    FoldError,
    InvalidGridError,
    KeywordError,
    MetricsError,
    UntokenizedDocumentError,
)
from .linear_svm import build_training_set, classify, decision, train, vectorize_all

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ('list_name', 'alpha', 'polarity', 'acc_mean', 'acc_std', 'f1_mean', 'f1_std', 'folds')


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: tuple

    def test_indices(self, fold):
        return [i for i, assigned in enumerate(self.assignments) if assigned == fold]

    def train_indices(self, fold):
        return [i for i, assigned in enumerate(self.assignments) if assigned != fold]

    def fold_sizes(self):
        sizes = [0] * self.k
        for assigned in self.assignments:
            sizes[assigned] += 1
        return sizes


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    accuracy: float

    def as_dict(self):
        return {
            'tp': self.tp, 'fp': self.fp, 'tn': self.tn, 'fn': self.fn,
            'precision': self.precision, 'recall': self.recall,
            'f1': self.f1, 'accuracy': self.accuracy,
        }


@dataclass(frozen=True)
class EvalReport:
    keyword_list_name: str
    polarity: Polarity
    alpha: str
    per_fold: tuple
    accuracy_mean: float
    accuracy_std: float
    f1_mean: float
    f1_std: float
    c: float | None = None


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    consensus: ConsensusLabel
    pos_score: float
    neg_score: float


@dataclass(frozen=True)
class LabeledCorpus:
    corpus: Corpus
    predictions: tuple

    @property
    def counts(self):
        tally = {label: 0 for label in ConsensusLabel}
        for prediction in self.predictions:
            tally[prediction.consensus] += 1
        return tally

    def records(self):
        by_id = {prediction.doc_id: prediction for prediction in self.predictions}
        for doc in self.corpus.documents:
            prediction = by_id[doc.id]
            record = doc.to_record()
            record['consensus'] = prediction.consensus.value
            record['pos_score'] = prediction.pos_score
            record['neg_score'] = prediction.neg_score
            yield record


def make_folds(labels, k=10, seed=42):
    """
    Shuffle each class with the seed and deal it round-robin over the folds,
    continuing where the previous class stopped.
    """
    if k < 2:
        raise FoldError(f'k must be at least 2, got {k}')
    labels = list(labels)
    rng = np.random.default_rng(seed)
    assignments = [None] * len(labels)
    offset = 0
    for cls in sorted(set(labels)):
        members = [i for i, label in enumerate(labels) if label == cls]
        if len(members) < k:
            raise FoldError(f'class {cls} has {len(members)} members, fewer than k={k}')
        for position, index in enumerate(rng.permutation(members)):
            assignments[int(index)] = (offset + position) % k
        offset = (offset + len(members)) % k
    return FoldPlan(k=k, seed=seed, assignments=tuple(assignments))


def _ratio(numerator, denominator):
    return numerator / denominator if denominator > 0 else 0.0


def compute_metrics(predicted, gold):
    """Confusion matrix with +1 as the positive class; empty ratios are 0."""
    predicted, gold = list(predicted), list(gold)
    if len(predicted) != len(gold):
        raise MetricsError(f'{len(predicted)} predictions for {len(gold)} gold labels')
    if not gold:
        raise MetricsError('cannot score an empty prediction list')
    tp = fp = tn = fn = 0
    for p, g in zip(predicted, gold):
        if p not in (1, -1) or g not in (1, -1):
            raise MetricsError('labels must be +1 or -1')
        if p == 1 and g == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif g == -1:
            tn += 1
        else:
            fn += 1
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return Metrics(
        tp=tp, fp=fp, tn=tn, fn=fn,
        precision=precision,
        recall=recall,
        f1=_ratio(2 * precision * recall, precision + recall),
        accuracy=(tp + tn) / len(gold),
    )


def _mean_std(values):
    values = np.asarray(values, dtype=float)
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(np.mean(values)), std


def cross_validate(corpus, vocabulary, train_config, k=10, seed=42, target=None):
    """
    Train on k-1 folds and score the held-out fold, k times. The detector
    target defaults to the class the keyword list describes.
    """
    if len(vocabulary) == 0:
        raise KeywordError(f'cannot cross validate {vocabulary.name}: keyword list is empty')
    target = Label(target) if target is not None else vocabulary.target
    data = build_training_set(corpus, vocabulary, target=target)
    plan = make_folds(data.labels, k=k, seed=seed)

    per_fold = {}
    for fold in range(plan.k):
        test = plan.test_indices(fold)
        training = plan.train_indices(fold)
        if set(test) & set(training):
            raise FoldError(f'fold {fold}: held-out documents found in the training folds')
        model = train(data.subset(training), train_config)
        predicted = [classify(model, data.vectors[i]) for i in test]
        per_fold[fold] = compute_metrics(predicted, [data.labels[i] for i in test])

    folds = tuple(per_fold[fold] for fold in sorted(per_fold))
    accuracy_mean, accuracy_std = _mean_std([m.accuracy for m in folds])
    f1_mean, f1_std = _mean_std([m.f1 for m in folds])
    report = EvalReport(
        keyword_list_name=vocabulary.name,
        polarity=vocabulary.polarity,
        alpha=vocabulary.alpha_label,
        per_fold=folds,
        accuracy_mean=accuracy_mean,
        accuracy_std=accuracy_std,
        f1_mean=f1_mean,
        f1_std=f1_std,
        c=train_config.c,
    )
    logger.info(
        '%s: accuracy %.4f +/- %.4f, F1 %.4f +/- %.4f',
        report.keyword_list_name, accuracy_mean, accuracy_std, f1_mean, f1_std,
    )
    return report


def _best(reports_by_alpha):
    # Highest mean F1; ties go to the lower alpha.
    return max(sorted(reports_by_alpha.items()), key=lambda item: (item[1][1].f1_mean, -item[0]))


@dataclass(frozen=True)
class GridResult:
    reports: tuple
    best_positive: KeywordList
    best_negative: KeywordList
    combined: KeywordList


def grid_report(corpus, stats, alpha_grid, train_config, k=10, seed=42):
    """
    Cross validate every positive and negative list of the alpha grid, then
    the combination of the best of each. Empty lists are skipped.
    """
    if not alpha_grid:
        raise InvalidGridError('alpha grid is empty')

    evaluated = {Polarity.POSITIVE: {}, Polarity.NEGATIVE: {}}
    for polarity in evaluated:
        for alpha in sorted(alpha_grid):
            keywords = select_keywords(stats, ExtractionConfig(alpha=alpha, alpha_prime=alpha), polarity)
            if not keywords.words:
                logger.warning('Skipping %s: no keywords selected', keywords.name)
                continue
            evaluated[polarity][alpha] = (keywords, cross_validate(corpus, keywords, train_config, k, seed))
    if not evaluated[Polarity.POSITIVE] or not evaluated[Polarity.NEGATIVE]:
        raise KeywordError('alpha grid produced no non-empty positive or negative keyword list')

    _, (best_positive, _) = _best(evaluated[Polarity.POSITIVE])
    _, (best_negative, _) = _best(evaluated[Polarity.NEGATIVE])
    combined = combine_lists(best_positive, best_negative)
    reports = [report for by_alpha in evaluated.values() for _, report in by_alpha.values()]
    reports.append(cross_validate(corpus, combined, train_config, k, seed))
    reports.sort(key=lambda report: -report.f1_mean)
    return GridResult(
        reports=tuple(reports),
        best_positive=best_positive,
        best_negative=best_negative,
        combined=combined,
    )


def sweep_penalty(corpus, vocabulary, c_values, train_config, k=10, seed=42):
    """Cross validate one keyword list under several soft-margin penalties."""
    reports = [
        cross_validate(corpus, vocabulary, replace(train_config, c=c), k, seed)
        for c in c_values
    ]
    return sorted(reports, key=lambda report: -report.f1_mean)


def consensus_label(pos_pred, neg_pred):
    """
    pos_pred is the is-positive detector, neg_pred the is-negative detector.
    Agreement on one side picks it; neither or both firing is neutral.
    """
    if pos_pred == 1 and neg_pred != 1:
        return ConsensusLabel.POSITIVE
    if neg_pred == 1 and pos_pred != 1:
        return ConsensusLabel.NEGATIVE
    return ConsensusLabel.NEUTRAL


def label_corpus(unlabeled, pos_model, neg_model):
    """Annotate every unlabeled document with a consensus label."""
    documents = [doc for doc in unlabeled.documents if not doc.is_labeled]
    for doc in documents:
        if doc.tokens is None:
            raise UntokenizedDocumentError(doc.id)
    pos_vectors = vectorize_all(documents, pos_model.vocabulary)
    neg_vectors = vectorize_all(documents, neg_model.vocabulary)

    predictions = []
    for doc, x_pos, x_neg in zip(documents, pos_vectors, neg_vectors):
        pos_score = decision(pos_model, x_pos)
        neg_score = decision(neg_model, x_neg)
        predictions.append(Prediction(
            doc_id=doc.id,
            consensus=consensus_label(1 if pos_score >= 0 else -1, 1 if neg_score >= 0 else -1),
            pos_score=pos_score,
            neg_score=neg_score,
        ))
    result = LabeledCorpus(corpus=Corpus(tuple(documents)), predictions=tuple(predictions))
    counts = result.counts
    logger.info(
        'Consensus labels: %d positive, %d neutral, %d negative',
        counts[ConsensusLabel.POSITIVE], counts[ConsensusLabel.NEUTRAL], counts[ConsensusLabel.NEGATIVE],
    )
    return result


def save_labeled(labeled, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for record in labeled.records():
            handle.write(json.dumps(record, ensure_ascii=False) + '\n')


def _fmt(value):
    return f'{value:.6f}'


def save_reports(reports, path):
    """Report TSV plus an aligned text table next to it (same stem, .txt)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ['\t'.join(REPORT_COLUMNS)]
    for report in reports:
        folds = json.dumps([m.as_dict() for m in report.per_fold], sort_keys=True)
        lines.append('\t'.join((
            report.keyword_list_name,
            report.alpha,
            report.polarity.value,
            _fmt(report.accuracy_mean),
            _fmt(report.accuracy_std),
            _fmt(report.f1_mean),
            _fmt(report.f1_std),
            folds,
        )))
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8', newline='\n')
    text_path = path.with_suffix('.txt')
    text_path.write_text(render_report_table(reports), encoding='utf-8', newline='\n')
    return path, text_path


def render_report_table(reports):
    header = ('Keyword List', 'Accuracy Average', 'Accuracy Std. Dev.', 'F1 Average', 'F1 Std. Dev.')
    rows = [
        (
            report.keyword_list_name,
            f'{report.accuracy_mean:.2f}',
            f'{report.accuracy_std:.2f}',
            f'{report.f1_mean:.2f}',
            f'{report.f1_std:.2f}',
        )
        for report in reports
    ]
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    rule = '+'.join('-' * (width + 2) for width in widths)
    rendered = [rule, ' | '.join(cell.ljust(width) for cell, width in zip(header, widths)), rule]
    rendered.extend(' | '.join(cell.ljust(width) for cell, width in zip(row, widths)) for row in rows)
    rendered.append(rule)
    return '\n'.join(rendered) + '\n'
