"""
Keyword-count features and linear classifiers.

f(x) = w.x + b, and a document is classified +1 when f(x) >= 0. Two
trainers are provided: a soft-margin SVM fitted by stochastic subgradient
descent on the hinge loss and finished by a pairwise dual solve, and the
mistake-driven perceptron.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .choices import Label, Trainer
from .exceptions import (
    DimensionMismatchError,
    ModelFileError,
    TrainingError,
    UntokenizedDocumentError,
)

logger = logging.getLogger(__name__)

MODEL_MAGIC = 'ENTROKEY-MODEL'
MODEL_VERSION = 'v1'
SOLVER_ITERATIONS_PER_POINT = 200


@dataclass(frozen=True)
class FeatureVector:
    """Sparse count vector over a keyword vocabulary."""
    indices: tuple
    values: tuple
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, 'indices', tuple(int(i) for i in self.indices))
        object.__setattr__(self, 'values', tuple(self.values))
        if len(self.indices) != len(self.values):
            raise DimensionMismatchError('indices and values differ in length')
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise DimensionMismatchError('feature indices must be strictly increasing')
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.dimension):
            raise DimensionMismatchError(f'feature index out of range for dimension {self.dimension}')

    @classmethod
    def from_dense(cls, values):
        values = np.asarray(values, dtype=float)
        nonzero = np.flatnonzero(values)
        return cls(
            indices=tuple(int(i) for i in nonzero),
            values=tuple(float(values[i]) for i in nonzero),
            dimension=int(values.size),
        )

    def to_dense(self):
        dense = np.zeros(self.dimension, dtype=float)
        if self.indices:
            dense[list(self.indices)] = self.values
        return dense

    def dot(self, other):
        if self.dimension != other.dimension:
            raise DimensionMismatchError(f'dimensions differ: {self.dimension} vs {other.dimension}')
        mine = dict(zip(self.indices, self.values))
        return math.fsum(mine[i] * value for i, value in zip(other.indices, other.values) if i in mine)


@dataclass(frozen=True)
class TrainConfig:
    """
    tolerance is the relative objective improvement below which hinge epochs
    stop early, and the KKT gap at which the dual solve stops.
    """
    trainer: Trainer = Trainer.HINGE_SGD
    c: float = 3.0
    epochs: int = 50
    learning_rate: float = 1.0
    seed: int = 42
    tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, 'trainer', Trainer(self.trainer))
        if not math.isfinite(self.c) or self.c <= 0:
            raise TrainingError(f'C must be positive, got {self.c}')
        if self.epochs < 1:
            raise TrainingError(f'epochs must be at least 1, got {self.epochs}')
        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise TrainingError(f'learning_rate must be positive, got {self.learning_rate}')
        if self.tolerance < 0:
            raise TrainingError(f'tolerance must not be negative, got {self.tolerance}')


@dataclass(frozen=True)
class TrainingSet:
    vectors: tuple
    labels: tuple
    vocabulary: tuple

    def __post_init__(self):
        object.__setattr__(self, 'vectors', tuple(self.vectors))
        object.__setattr__(self, 'labels', tuple(int(y) for y in self.labels))
        object.__setattr__(self, 'vocabulary', tuple(self.vocabulary))
        if len(self.vectors) != len(self.labels):
            raise DimensionMismatchError('vectors and labels differ in length')
        if any(y not in (1, -1) for y in self.labels):
            raise TrainingError('labels must be +1 or -1')
        for vector in self.vectors:
            if vector.dimension != len(self.vocabulary):
                raise DimensionMismatchError(
                    f'vector dimension {vector.dimension} != vocabulary size {len(self.vocabulary)}'
                )

    def __len__(self):
        return len(self.labels)

    def matrix(self):
        X = np.zeros((len(self.vectors), len(self.vocabulary)), dtype=float)
        for row, vector in enumerate(self.vectors):
            if vector.indices:
                X[row, list(vector.indices)] = vector.values
        return X

    def subset(self, indices):
        return TrainingSet(
            vectors=tuple(self.vectors[i] for i in indices),
            labels=tuple(self.labels[i] for i in indices),
            vocabulary=self.vocabulary,
        )


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    weights, bias and the vocabulary that indexes them. dual_coefficients,
    when present, satisfy weights == sum(alpha_i * y_i * x_i) over the
    training set the model was fitted on.
    """
    weights: np.ndarray
    bias: float
    vocabulary: tuple
    config: TrainConfig = field(default_factory=TrainConfig)
    trace: tuple = ()
    dual_coefficients: tuple | None = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'bias', float(self.bias))
        object.__setattr__(self, 'vocabulary', tuple(self.vocabulary))
        if weights.ndim != 1 or weights.size != len(self.vocabulary):
            raise DimensionMismatchError(
                f'{weights.size} weights for a vocabulary of {len(self.vocabulary)} words'
            )
        if not np.all(np.isfinite(weights)) or not math.isfinite(self.bias):
            raise TrainingError('model parameters must be finite')

    @property
    def dimension(self):
        return len(self.vocabulary)


def _words(vocabulary):
    return tuple(vocabulary.words) if hasattr(vocabulary, 'words') else tuple(vocabulary)


def _count_features(doc, index):
    if doc.tokens is None:
        raise UntokenizedDocumentError(doc.id)
    counts = Counter(index[token] for token in doc.tokens if token in index)
    indices = sorted(counts)
    return FeatureVector(indices=indices, values=tuple(counts[i] for i in indices), dimension=len(index))


def vectorize(doc, vocabulary):
    """Count vocabulary words among the document tokens; other tokens are ignored."""
    words = _words(vocabulary)
    return _count_features(doc, {word: j for j, word in enumerate(words)})


def vectorize_all(documents, vocabulary):
    words = _words(vocabulary)
    index = {word: j for j, word in enumerate(words)}
    return [_count_features(doc, index) for doc in documents]


def build_training_set(corpus, vocabulary, target=Label.POSITIVE):
    """+1 for documents labeled target, -1 for the other gold class."""
    target = Label(target)
    if target == Label.UNLABELED:
        raise TrainingError('training target must be positive or negative')
    words = _words(vocabulary)
    labeled = [doc for doc in corpus.documents if doc.is_labeled]
    return TrainingSet(
        vectors=tuple(vectorize_all(labeled, words)),
        labels=tuple(1 if doc.label == target else -1 for doc in labeled),
        vocabulary=words,
    )


def _check_dimension(model, x):
    if x.dimension != model.dimension:
        raise DimensionMismatchError(
            f'feature dimension {x.dimension} does not match model dimension {model.dimension}'
        )


def decision(model, x):
    _check_dimension(model, x)
    if not x.indices:
        return model.bias
    score = float(np.dot(model.weights[list(x.indices)], np.asarray(x.values, dtype=float)))
    return score + model.bias


def classify(model, x):
    return 1 if decision(model, x) >= 0 else -1


def dual_decision(alphas, labels, support_vectors, b, x):
    """f(x) = sum(alpha_i * y_i * (x_i . x)) + b."""
    if not (len(alphas) == len(labels) == len(support_vectors)):
        raise DimensionMismatchError('alphas, labels and support vectors differ in length')
    terms = [
        alpha * y * vector.dot(x)
        for alpha, y, vector in zip(alphas, labels, support_vectors)
        if alpha != 0
    ]
    return math.fsum(terms) + b


def support_expansion(model, data):
    """(alphas, labels, vectors) with nonzero dual coefficient."""
    if model.dual_coefficients is None or len(model.dual_coefficients) != len(data):
        raise TrainingError('model carries no dual coefficients for this training set')
    kept = [i for i, alpha in enumerate(model.dual_coefficients) if alpha != 0]
    return (
        [model.dual_coefficients[i] for i in kept],
        [data.labels[i] for i in kept],
        [data.vectors[i] for i in kept],
    )


def _training_arrays(data):
    if len(data) == 0:
        raise TrainingError('training set is empty')
    if len(data.vocabulary) == 0:
        raise TrainingError('keyword vocabulary is empty')
    y = np.asarray(data.labels, dtype=float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError('training set must contain both classes')
    X = data.matrix()
    if not np.all(np.isfinite(X)):
        raise TrainingError('feature values must be finite')
    return X, y


def hinge_objective(weights, bias, X, y, c):
    """(1/2)||w||^2 + C * sum(max(0, 1 - y_i (w.x_i + b)))."""
    margins = y * (X @ weights + bias)
    return 0.5 * float(weights @ weights) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def best_intercept(scores, y):
    """
    Bias minimizing sum(max(0, 1 - y_i (s_i + b))) for fixed scores s = X w.

    The sum is convex and piecewise linear in b with breakpoints y_i - s_i;
    the midpoint of the minimizing interval is returned.
    """
    breaks = y - scores
    positive = np.sort(breaks[y > 0])
    negative = np.sort(breaks[y < 0])
    candidates = np.sort(breaks)
    left = np.searchsorted(negative, candidates, side='left') - (
        positive.size - np.searchsorted(positive, candidates, side='left')
    )
    right = np.searchsorted(negative, candidates, side='right') - (
        positive.size - np.searchsorted(positive, candidates, side='right')
    )
    minimizers = candidates[(left <= 0) & (right >= 0)]
    return float(minimizers[0] + minimizers[-1]) / 2.0


def _feasible_alphas(margins, y, c):
    """C on margin violators, 0 elsewhere, one class rescaled so sum(alpha_i y_i) = 0."""
    alphas = np.where(margins < 1.0, c, 0.0)
    positive, negative = alphas[y > 0].sum(), alphas[y < 0].sum()
    if positive > negative:
        alphas[y > 0] *= negative / positive
    elif negative > positive:
        alphas[y < 0] *= positive / negative
    return alphas


def solve_dual(X, y, c, alphas, tolerance):
    """
    Pairwise coordinate descent on the dual
    min (1/2) a'Qa - sum(a), 0 <= a <= C, sum(a_i y_i) = 0, Q_ij = y_i y_j x_i.x_j,
    moving the maximal violating pair each step until the KKT gap is at most
    tolerance. alphas must be feasible. Returns the solved alphas and the
    final gap.
    """
    n = len(y)
    alphas = np.array(alphas, dtype=float)
    squared = np.einsum('ij,ij->i', X, X)
    gap = math.inf
    for iteration in range(SOLVER_ITERATIONS_PER_POINT * n):
        if iteration % n == 0:
            grad = y * (X @ (X.T @ (alphas * y))) - 1.0
        score = -y * grad
        up = ((y > 0) & (alphas < c)) | ((y < 0) & (alphas > 0))
        low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < c))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = float(score[i] - score[j])
        if gap <= tolerance:
            break
        curvature = max(squared[i] + squared[j] - 2.0 * float(X[i] @ X[j]), 1e-12)
        step = min(
            gap / curvature,
            c - alphas[i] if y[i] > 0 else alphas[i],
            alphas[j] if y[j] > 0 else c - alphas[j],
        )
        alphas[i] = min(max(alphas[i] + y[i] * step, 0.0), c)
        alphas[j] = min(max(alphas[j] - y[j] * step, 0.0), c)
        grad += step * y * (X @ (X[i] - X[j]))
    else:
        logger.warning('Dual solve stopped at the iteration cap with KKT gap %.3g', gap)
    return alphas, gap


def _stalled(weights, bias, X, y):
    """w = 0 although the hinge subgradient in w at w = 0 is nonzero."""
    if np.any(weights):
        return False
    active = y * bias < 1.0
    return bool(np.any(np.abs(X[active].T @ y[active]) > 1e-12))


def train_perceptron(data, config, initial=None):
    """
    Mistake-driven updates w += lr * y_i * x_i, b += lr * y_i in a seeded
    shuffle order, until an epoch makes no mistake or epochs run out.
    """
    X, y = _training_arrays(data)
    n, d = X.shape
    if initial is not None:
        if initial.dimension != d:
            raise DimensionMismatchError('initial model dimension does not match training data')
        weights, bias = initial.weights.copy(), initial.bias
        alphas = None
    else:
        weights, bias = np.zeros(d), 0.0
        alphas = np.zeros(n)
    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    mistakes_per_epoch = []

    for epoch in range(1, config.epochs + 1):
        mistakes = 0
        for i in rng.permutation(n):
            predicted = 1.0 if float(X[i] @ weights) + bias >= 0 else -1.0
            if predicted != y[i]:
                weights += lr * y[i] * X[i]
                bias += lr * y[i]
                if alphas is not None:
                    alphas[i] += lr
                mistakes += 1
        mistakes_per_epoch.append(float(mistakes))
        if mistakes == 0:
            break
    logger.debug('Perceptron stopped after %d epochs, last epoch mistakes=%d', epoch, mistakes)

    return LinearModel(
        weights=weights,
        bias=bias,
        vocabulary=data.vocabulary,
        config=config,
        trace=tuple(mistakes_per_epoch),
        dual_coefficients=tuple(float(a) for a in alphas) if alphas is not None else None,
    )


def train_hinge(data, config):
    """
    Soft-margin linear SVM, lambda = 1 / (C * n).

    Each epoch runs stochastic subgradient steps on w with step 1 / (lambda * t)
    in a seeded shuffle order, projects w onto the ball of radius
    1 / sqrt(lambda), then sets the unregularized bias to its exact minimizer
    for the new w. An epoch that raises the objective is rolled back, so the
    trace holds the objective of the state actually kept and never increases.
    Epochs stop early once an accepted epoch improves the objective by at most
    tolerance * (1 + |objective|).

    The epoch result then warm-starts a pairwise dual solve that runs until
    its KKT gap is at most tolerance. Its solution replaces the epoch result
    unless its objective is worse by more than 1e-9 * (1 + |objective|), and
    that objective closes the trace.
    """
    X, y = _training_arrays(data)
    n, d = X.shape
    c = config.c
    lam = 1.0 / (c * n)
    radius = 1.0 / math.sqrt(lam)
    rng = np.random.default_rng(config.seed)

    weights, alphas = np.zeros(d), np.zeros(n)
    bias = best_intercept(np.zeros(n), y)
    objective = hinge_objective(weights, bias, X, y, c)
    trace = []
    t = 0
    for epoch in range(1, config.epochs + 1):
        w, a = weights.copy(), alphas.copy()
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            violated = y[i] * (float(X[i] @ w) + bias) < 1.0
            shrink = 1.0 - 1.0 / t
            w *= shrink
            a *= shrink
            if violated:
                w += eta * y[i] * X[i]
                a[i] += eta
            norm = math.sqrt(float(w @ w))
            if norm > radius:
                w *= radius / norm
                a *= radius / norm
        b = best_intercept(X @ w, y)
        candidate = hinge_objective(w, b, X, y, c)
        improvement = objective - candidate
        if improvement >= 0:
            weights, alphas, bias, objective = w, a, b, candidate
        trace.append(objective)
        if 0 <= improvement <= config.tolerance * (1.0 + abs(objective)):
            break
    logger.debug('Hinge epochs stopped after %d epochs, objective=%.6g', epoch, objective)

    start = _feasible_alphas(y * (X @ weights + bias), y, c)
    solved, gap = solve_dual(X, y, c, start, config.tolerance)
    dual_weights = X.T @ (solved * y)
    dual_bias = best_intercept(X @ dual_weights, y)
    dual_objective = hinge_objective(dual_weights, dual_bias, X, y, c)
    if dual_objective <= objective + 1e-9 * (1.0 + abs(objective)):
        weights, alphas, bias, objective = dual_weights, solved, dual_bias, dual_objective
        trace.append(objective)
    logger.debug('Dual solve finished with KKT gap %.3g, objective=%.6g', gap, objective)

    if gap > config.tolerance and _stalled(weights, bias, X, y):
        raise TrainingError('hinge trainer made no progress from the zero model')

    return LinearModel(
        weights=weights,
        bias=bias,
        vocabulary=data.vocabulary,
        config=config,
        trace=tuple(trace),
        dual_coefficients=tuple(float(a) for a in alphas),
    )


_TRAINERS = {
    Trainer.HINGE_SGD: train_hinge,
    Trainer.PERCEPTRON: train_perceptron,
}


def train(data, config):
    return _TRAINERS[config.trainer](data, config)


def _format_float(value):
    return format(float(value), '.17g')


def save_model(model, path):
    """
    Versioned text format: magic line, hyperparameters as key=value pairs,
    bias, then one word<TAB>weight line per feature.
    """
    broken = [word for word in model.vocabulary if '\n' in word]
    if broken:
        raise ModelFileError(f'cannot save a model whose vocabulary has line breaks: {broken[0]!r}')
    config = model.config
    header = ' '.join(f'{key}={value}' for key, value in (
        ('trainer', config.trainer.value),
        ('c', _format_float(config.c)),
        ('epochs', config.epochs),
        ('seed', config.seed),
        ('learning_rate', _format_float(config.learning_rate)),
        ('tolerance', _format_float(config.tolerance)),
        ('dimension', model.dimension),
    ))
    lines = [f'{MODEL_MAGIC} {MODEL_VERSION}', header, _format_float(model.bias)]
    lines.extend(f'{word}\t{_format_float(weight)}' for word, weight in zip(model.vocabulary, model.weights))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8', newline='\n')


def load_model(path):
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').split('\n')
    except (OSError, UnicodeDecodeError) as exc:
        raise ModelFileError(f'cannot read model {path}: {exc}') from exc
    if lines and lines[-1] == '':
        lines.pop()

    magic = lines[0].split(' ') if lines else []
    if len(magic) != 2 or magic[0] != MODEL_MAGIC:
        raise ModelFileError(f'unrecognized model file: {path}')
    if magic[1] != MODEL_VERSION:
        raise ModelFileError(f'unsupported model version {magic[1]} (expected {MODEL_VERSION})')
    if len(lines) < 3:
        raise ModelFileError(f'corrupt model file {path}: missing header lines')

    try:
        params = dict(pair.split('=', 1) for pair in lines[1].split())
        config = TrainConfig(
            trainer=Trainer(params['trainer']),
            c=float(params['c']),
            epochs=int(params['epochs']),
            seed=int(params['seed']),
            learning_rate=float(params.get('learning_rate', 1.0)),
            tolerance=float(params.get('tolerance', 1e-6)),
        )
        dimension = int(params['dimension'])
        bias = float(lines[2])
    except (KeyError, ValueError, TrainingError) as exc:
        raise ModelFileError(f'corrupt model file {path}: {exc}') from exc

    vocabulary, weights = [], []
    for line_number, line in enumerate(lines[3:], start=4):
        word, sep, weight = line.rpartition('\t')
        if not sep or not word:
            raise ModelFileError(f'corrupt model file {path}: line {line_number} is not word<TAB>weight')
        try:
            weights.append(float(weight))
        except ValueError as exc:
            raise ModelFileError(f'corrupt model file {path}: line {line_number}: {exc}') from exc
        vocabulary.append(word)
    if len(weights) != dimension:
        raise ModelFileError(
            f'model integrity error in {path}: {len(weights)} weights for declared dimension {dimension}'
        )
    if len(set(vocabulary)) != len(vocabulary):
        raise ModelFileError(f'model integrity error in {path}: duplicate vocabulary words')
    try:
        return LinearModel(weights=np.asarray(weights), bias=bias, vocabulary=tuple(vocabulary), config=config)
    except (DimensionMismatchError, TrainingError) as exc:
        raise ModelFileError(f'model integrity error in {path}: {exc}') from exc


def with_vocabulary(model, vocabulary):
    """Reorder a model onto a permuted vocabulary of the same words."""
    if sorted(vocabulary) != sorted(model.vocabulary):
        raise DimensionMismatchError('vocabulary permutation must contain the same words')
    position = {word: j for j, word in enumerate(model.vocabulary)}
    order = [position[word] for word in vocabulary]
    return replace(model, weights=model.weights[order], vocabulary=tuple(vocabulary), dual_coefficients=None)
