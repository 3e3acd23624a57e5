"""Lexicon-based psycholinguistic features and elastic-net correlation.

A lexicon maps category names to word patterns (literal tokens or prefixes
written with a trailing *). Feature extraction reports each category's
matched-token proportion plus the first-person pronoun proportion. To
compare two groups' emotional language, each group's per-document category
proportion is regressed on token counts with an elastic net and the top
coefficient vectors are correlated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConstantVector,
    DegenerateCorpus,
    DimensionMismatch,
    LengthMismatch,
    MalformedPattern,
    MalformedRecord,
)

FIRST_PERSON_PRONOUNS = frozenset(
    ["i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"]
)
FIRST_PERSON_KEY = "first_person_pronoun"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

FeatureVector = dict[str, float]

# stop when the largest per-sweep coefficient change falls below this;
# 1e-8 rather than 1e-6 because correlated designs contract slowly and the
# solution must agree with closed-form least squares to 1e-6
ENET_TOL = 1e-8
ENET_MAX_SWEEPS = 1000


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Lexicon:
    """categories: category name -> set of lowercase patterns."""

    categories: Mapping[str, frozenset[str]]

    def compiled(self) -> dict[str, tuple[frozenset[str], tuple[str, ...]]]:
        """Per category: (literal tokens, prefix stems)."""
        out = {}
        for name, patterns in self.categories.items():
            literals = frozenset(p for p in patterns if not p.endswith("*"))
            prefixes = tuple(sorted(p[:-1] for p in patterns if p.endswith("*")))
            out[name] = (literals, prefixes)
        return out


def _check_pattern(pattern: str, lineno: int) -> str:
    if not pattern or pattern == "*":
        raise MalformedPattern(f"line {lineno}: empty pattern")
    if "*" in pattern[:-1]:
        raise MalformedPattern(f"line {lineno}: interior wildcard in {pattern!r}")
    return pattern.lower()


def load_lexicon(stream) -> Lexicon:
    """Parse category<TAB>pattern lines; duplicates collapse."""
    categories: dict[str, set[str]] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise MalformedRecord(
                f"expected category<TAB>pattern, got {line!r}", line=lineno
            )
        category = parts[0].strip().lower()
        pattern = _check_pattern(parts[1].strip(), lineno)
        categories.setdefault(category, set()).add(pattern)
    return Lexicon({name: frozenset(p) for name, p in sorted(categories.items())})


def extract_features(text: str, lex: Lexicon) -> FeatureVector:
    """Per-category matched-token proportions plus first-person proportion.

    Empty text yields an all-zero vector. Categories may overlap, so the
    proportions need not sum to 1.
    """
    tokens = tokenize(text)
    compiled = lex.compiled()
    values = {name: 0.0 for name in compiled}
    values[FIRST_PERSON_KEY] = 0.0
    if not tokens:
        return values
    for token in tokens:
        for name, (literals, prefixes) in compiled.items():
            if token in literals or any(token.startswith(p) for p in prefixes):
                values[name] += 1.0
        if token in FIRST_PERSON_PRONOUNS:
            values[FIRST_PERSON_KEY] += 1.0
    n = float(len(tokens))
    return {name: count / n for name, count in values.items()}


@dataclass(frozen=True)
class EnetFit:
    """Numeric elastic-net solution (original-scale coefficients)."""

    coef: np.ndarray
    intercept: float
    sweeps: int
    converged: bool
    objective_trace: tuple[float, ...]


@dataclass(frozen=True)
class ElasticNetModel:
    coefficients: FeatureVector
    intercept: float
    lam: float
    mix: float
    converged: bool


def _soft_threshold(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def fit_elastic_net(
    X: np.ndarray,
    y: np.ndarray,
    lam: float = 0.01,
    mix: float = 0.5,
    tol: float = ENET_TOL,
    max_sweeps: int = ENET_MAX_SWEEPS,
) -> EnetFit:
    """Cyclic coordinate descent on standardized columns.

    Minimizes (1/2n)||y - Xb - b0||^2 + lam (mix ||b||_1 + (1-mix)/2 ||b||^2)
    with the penalty applied to standardized coefficients; the returned
    coefficients are mapped back to the original column scale. Stops when
    the largest coefficient change in a sweep falls below tol.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-d, got shape {X.shape}")
    n, p = X.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"y length {y.shape} does not match {n} rows")
    if n < 2:
        raise DimensionMismatch(f"need at least 2 rows, got {n}")
    if lam < 0 or not 0.0 <= mix <= 1.0:
        raise ValueError(f"bad penalty: lam={lam}, mix={mix}")

    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd_safe = np.where(sd == 0.0, 1.0, sd)
    Xs = (X - mu) / sd_safe
    y_mean = y.mean()
    yc = y - y_mean

    col_sq = (Xs * Xs).sum(axis=0) / n
    gamma = lam * mix
    denom = col_sq + lam * (1.0 - mix)
    beta = np.zeros(p)
    resid = yc.copy()
    trace: list[float] = []
    converged = False
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            rho = (Xs[:, j] @ resid) / n + col_sq[j] * old
            new = _soft_threshold(rho, gamma) / denom[j]
            if new != old:
                resid += Xs[:, j] * (old - new)
                beta[j] = new
                max_delta = max(max_delta, abs(new - old))
        trace.append(
            float(
                (resid @ resid) / (2 * n)
                + lam * (mix * np.abs(beta).sum() + (1 - mix) / 2 * (beta @ beta))
            )
        )
        if max_delta < tol:
            converged = True
            break
    coef = beta / sd_safe
    intercept = float(y_mean - mu @ coef)
    return EnetFit(coef, intercept, sweeps, converged, tuple(trace))


def elastic_net(
    rows: Sequence[Mapping[str, float]],
    y: Sequence[float],
    lam: float = 0.01,
    mix: float = 0.5,
) -> ElasticNetModel:
    """Elastic net over feature-dict rows; keys are unioned and sorted."""
    keys = sorted({k for row in rows for k in row})
    X = np.array([[row.get(k, 0.0) for k in keys] for row in rows], dtype=float)
    fit = fit_elastic_net(X, np.asarray(y, dtype=float), lam, mix)
    return ElasticNetModel(
        coefficients={k: float(c) for k, c in zip(keys, fit.coef)},
        intercept=fit.intercept,
        lam=lam,
        mix=mix,
        converged=fit.converged,
    )


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided t-test p-value for the null of zero correlation.

    Informational only; t = r sqrt((n-2)/(1-r^2)) with n-2 degrees of
    freedom. |r| = 1 gives 0.0.
    """
    from scipy import stats

    if not -1.0 <= r <= 1.0:
        raise ValueError(f"correlation outside [-1, 1]: {r}")
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def pearson_r(x, y) -> float:
    """Pearson correlation; identical inputs give exactly 1.0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantVector("correlation undefined for constant input")
    return float(dx @ dy) / math.sqrt(sxx * syy)


def _token_count_rows(
    documents: Sequence[str],
) -> tuple[list[str], np.ndarray]:
    vocab = sorted({t for doc in documents for t in tokenize(doc)})
    index = {t: j for j, t in enumerate(vocab)}
    X = np.zeros((len(documents), len(vocab)))
    for i, doc in enumerate(documents):
        for t in tokenize(doc):
            X[i, index[t]] += 1.0
    return vocab, X


def _category_weights(
    documents: Sequence[str],
    lex: Lexicon,
    target: str,
    lam: float,
    mix: float,
) -> dict[str, float]:
    """Elastic-net coefficients of target-category proportion on token counts."""
    if len(documents) < 2:
        raise DegenerateCorpus(f"need at least 2 documents, got {len(documents)}")
    if target not in lex.categories:
        raise ValueError(f"unknown lexicon category: {target!r}")
    y = np.array([extract_features(doc, lex)[target] for doc in documents])
    vocab, X = _token_count_rows(documents)
    fit = fit_elastic_net(X, y, lam, mix)
    return {t: float(c) for t, c in zip(vocab, fit.coef)}


def _top_n_keys(weights: dict[str, float], n: int) -> list[str]:
    return [
        k for k, _ in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    ]


def type_emotion_correlation(
    corpus_a: Sequence[str],
    corpus_b: Sequence[str],
    lex: Lexicon,
    target: str,
    n: int = 1000,
    lam: float = 0.01,
    mix: float = 0.5,
) -> float:
    """Correlation of two groups' elastic-net emotion weights.

    Each corpus's target-category proportion is regressed on its token
    counts; the top-n coefficients of each fit (by descending value) are
    aligned on the union of selected keys, missing keys as 0, and the
    aligned vectors are Pearson-correlated.
    """
    wa = _category_weights(corpus_a, lex, target, lam, mix)
    wb = _category_weights(corpus_b, lex, target, lam, mix)
    keys = sorted(set(_top_n_keys(wa, n)) | set(_top_n_keys(wb, n)))
    va = np.array([wa.get(k, 0.0) for k in keys])
    vb = np.array([wb.get(k, 0.0) for k in keys])
    return pearson_r(va, vb)


def emotion_correlation_table(
    documents_by_group: Mapping[str, Sequence[str]],
    lex: Lexicon,
    target: str,
    n: int = 1000,
    lam: float = 0.01,
    mix: float = 0.5,
) -> dict[tuple[str, str], float]:
    """All cross-group correlations, fitting each group's weights once."""
    weights = {
        name: _category_weights(docs, lex, target, lam, mix)
        for name, docs in sorted(documents_by_group.items())
    }
    names = sorted(weights)
    table: dict[tuple[str, str], float] = {}
    for i, a in enumerate(names):
        for b in names[:i]:
            keys = sorted(
                set(_top_n_keys(weights[a], n)) | set(_top_n_keys(weights[b], n))
            )
            va = np.array([weights[a].get(k, 0.0) for k in keys])
            vb = np.array([weights[b].get(k, 0.0) for k in keys])
            table[(a, b)] = pearson_r(va, vb)
    return table
