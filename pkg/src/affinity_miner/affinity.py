"""Markov-chain affinity scoring of per-pair sentiment sequences.

Each directed user pair's time-ordered sentiment states are fitted with a
Laplace-smoothed first-order chain; the affinity score is the chain's
stationary mass on POS, discounted by a saturating evidence factor
n / (n + kappa) so that thin interaction histories score low.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import NonErgodic, NonPositiveSmoothing
from .ingest import InteractionEvent, Sentiment

N_STATES = 3

POWER_ITER_TOL = 1e-12
POWER_ITER_MAX = 100_000


@dataclass(frozen=True)
class SentimentSequence:
    """Time-ordered sentiment states for one directed user pair."""

    pair: tuple[str, str]
    states: tuple[Sentiment, ...]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix over (NEG, NEU, POS)."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (N_STATES, N_STATES):
            raise ValueError(f"expected {N_STATES}x{N_STATES}, got {entries.shape}")
        if np.max(np.abs(entries.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1 within 1e-12")


@dataclass(frozen=True)
class AffinityScore:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value < 1.0:
            raise ValueError(f"affinity score outside [0, 1): {self.value}")


def build_pair_sequences(
    events: Sequence[InteractionEvent],
) -> dict[tuple[str, str], SentimentSequence]:
    """Group events into one sentiment sequence per directed pair.

    Events are expected in ingest order (timestamp, input position), which
    the sequences preserve.
    """
    grouped: dict[tuple[str, str], list[Sentiment]] = {}
    for event in events:
        grouped.setdefault((event.source, event.target), []).append(event.sentiment)
    return {
        pair: SentimentSequence(pair, tuple(states))
        for pair, states in grouped.items()
    }


def _states_of(seq) -> Sequence[Sentiment]:
    return seq.states if isinstance(seq, SentimentSequence) else seq


def estimate_chain(seq, alpha: float = 1.0) -> TransitionMatrix:
    """Laplace-smoothed transition matrix from consecutive state pairs.

    entry(i, j) = (count(i->j) + alpha) / (count(i->.) + 3 alpha). With
    alpha > 0 every entry is strictly positive, so the chain is ergodic.
    """
    if alpha <= 0:
        raise NonPositiveSmoothing(f"smoothing must be > 0, got {alpha}")
    states = _states_of(seq)
    counts = np.zeros((N_STATES, N_STATES))
    for a, b in zip(states, states[1:]):
        counts[int(a), int(b)] += 1.0
    entries = (counts + alpha) / (counts.sum(axis=1, keepdims=True) + N_STATES * alpha)
    return TransitionMatrix(entries)


def _as_matrix(T) -> np.ndarray:
    return np.asarray(T.entries if isinstance(T, TransitionMatrix) else T, dtype=float)


def stationary_distribution(T) -> np.ndarray:
    """Fixed point pi with pi P = pi and sum(pi) = 1.

    Accepts a TransitionMatrix or any k x k row-stochastic ndarray. Solves
    the linear system directly, falling back to power iteration; verifies
    the residual below 1e-12 either way.
    """
    P = _as_matrix(T)
    n = P.shape[0]
    pi = None
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        candidate = np.linalg.solve(A, b)
        if np.max(np.abs(candidate @ P - candidate)) < POWER_ITER_TOL:
            pi = candidate
    except np.linalg.LinAlgError:
        pi = None
    if pi is None:
        pi = np.full(n, 1.0 / n)
        for _ in range(POWER_ITER_MAX):
            nxt = pi @ P
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - pi)) < POWER_ITER_TOL:
                pi = nxt
                break
            pi = nxt
        if np.max(np.abs(pi @ P - pi)) >= POWER_ITER_TOL:
            raise NonErgodic("no stationary distribution within tolerance")
    return pi


def affinity_score(seq, alpha: float = 1.0, kappa: float = 5.0) -> AffinityScore:
    """Stationary POS mass times the evidence factor n / (n + kappa).

    Empty sequences score exactly 0.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    states = _states_of(seq)
    n = len(states)
    if n == 0:
        return AffinityScore(0.0)
    chain = estimate_chain(states, alpha)
    pi = stationary_distribution(chain)
    return AffinityScore(float(pi[int(Sentiment.POS)]) * (n / (n + kappa)))


def score_sequences(
    sequences: Mapping[tuple[str, str], SentimentSequence],
    alpha: float = 1.0,
    kappa: float = 5.0,
) -> dict[tuple[str, str], AffinityScore]:
    """Score every directed pair; deterministic regardless of map order."""
    return {
        pair: affinity_score(sequences[pair], alpha, kappa)
        for pair in sorted(sequences)
    }
