"""Bernoulli flip channel and the exact law of the observed chain.

The observed chain ``Z_t = X_t xor xi_t`` is a hidden Markov model over the
embedding states of `X`; every quantity here is computed by forward
filtering, never by simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .chain import ChainLaw, Level, SamplePath, channel_weights, forward, forward_levels, push
from .tree import ContextTree, compute_constants

MAX_WORD_LEN = 30
MAX_QMIN_DEPTH = 20
MAX_CERTIFY_J = 16
MAX_LEMMA_K = 12
MAX_WINDOW_DEPTH = 16
SLACK = 1e-10


def perturb(path: SamplePath, eps: float, seed: int) -> SamplePath:
    """Flip every symbol independently with probability `eps`."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("flip probability must lie in [0, 1]")
    flips = seeding.rng(seed).random(len(path)) < eps
    return SamplePath(path.symbols ^ flips.astype(np.uint8), seed, path.source)


class PerturbedLaw:
    """Exact law ``q`` of the observed chain for flip probability `eps`."""

    def __init__(self, base: ChainLaw | ContextTree, eps: float):
        if not 0.0 <= eps <= 1.0:
            raise ValueError("flip probability must lie in [0, 1]")
        self.base = base if isinstance(base, ChainLaw) else ChainLaw(base)
        self.eps = float(eps)
        self._levels: list[Level] = []

    @property
    def tree(self) -> ContextTree:
        return self.base.tree

    def _check_len(self, w: str) -> None:
        if len(w) > MAX_WORD_LEN:
            raise ValueError(f"words longer than {MAX_WORD_LEN} are not supported")

    def log_q(self, w: str) -> float:
        self._check_len(w)
        return forward(self.base.embedding, self.base.pi, w, self.eps)[1]

    def q(self, w: str) -> float:
        return math.exp(self.log_q(w))

    def conditional(self, a: int, w: str) -> float:
        self._check_len(w)
        post, logq = forward(self.base.embedding, self.base.pi, w, self.eps)
        if logq == -math.inf:
            raise ZeroDivisionError(f"q({w!r}) = 0")
        emb = self.base.embedding
        return float(push(post, emb.emit, *channel_weights(a, self.eps)).sum())

    def levels(self, max_len: int) -> list[Level]:
        if len(self._levels) <= max_len:
            self._levels = forward_levels(self.base.embedding, self.base.pi, self.eps, max_len)
        return self._levels[: max_len + 1]


def q_marginal(law: PerturbedLaw, w: str) -> float:
    return law.q(w)


def q_conditional(law: PerturbedLaw, a: int, w: str) -> float:
    return law.conditional(a, w)


def q_min(law: PerturbedLaw, d: int) -> float:
    """Smallest positive cylinder probability over lengths 1..d."""
    if d > MAX_QMIN_DEPTH:
        raise ValueError(f"depth {d} exceeds the cap {MAX_QMIN_DEPTH}")
    if d < 1:
        raise ValueError("depth must be >= 1")
    best = math.inf
    for lev in law.levels(d)[1:]:
        pos = lev.prob[lev.prob > 0]
        if pos.size:
            best = min(best, float(pos.min()))
    return best


@dataclass
class TheoremOneReport:
    eps: float
    bound: float
    gaps: list[float] = field(default_factory=list)

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    @property
    def holds(self) -> bool:
        return self.max_gap <= self.bound + SLACK

    def rows(self):
        for j, g in enumerate(self.gaps):
            yield j, g, self.bound, g <= self.bound + SLACK


def theorem1_certify(law: PerturbedLaw, j_max: int) -> TheoremOneReport:
    """Largest gap between observed and hidden next-symbol conditionals, per past length."""
    if j_max > MAX_CERTIFY_J:
        raise ValueError(f"j_max {j_max} exceeds the cap {MAX_CERTIFY_J}")
    c = compute_constants(law.tree).c_const
    report = TheoremOneReport(law.eps, c * law.eps)
    q_levels = law.levels(j_max)
    p_levels = law.base.levels(j_max)
    for ql, pl in zip(q_levels, p_levels):
        # binary alphabet: the gap for a = 0 equals the gap for a = 1
        report.gaps.append(float(np.max(np.abs(ql.cond1 - pl.cond1))))
    return report


def _all_words(k: int) -> np.ndarray:
    """Bit matrix whose row i is the binary expansion of i over k places."""
    idx = np.arange(1 << k)
    return ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int8)


def _flip_posterior(law: PerturbedLaw, k: int, j: int) -> np.ndarray:
    """``P(X_{-j-1} != w_{-j-1} | X_{-j..-1} = w_{-j..-1}, Z_{-k..-j-1} = w_{-k..-j-1})`` for all words."""
    emb = law.base.embedding
    eps = law.eps
    W = _all_words(k)
    m = W.shape[0]
    num = np.broadcast_to(law.base.pi, (m, emb.n_states)).copy()
    den = num.copy()
    pivot = k - j - 1
    for i in range(k):
        obs = W[:, i:i + 1].astype(float)
        if i < pivot:
            w0 = obs * eps + (1 - obs) * (1 - eps)
            w1 = obs * (1 - eps) + (1 - obs) * eps
            num = push(num, emb.emit, w0, w1)
            den = push(den, emb.emit, w0, w1)
        elif i == pivot:
            w0 = obs * eps + (1 - obs) * (1 - eps)
            w1 = obs * (1 - eps) + (1 - obs) * eps
            # numerator keeps only the hidden symbol disagreeing with the observation
            num = push(num, emb.emit, w0 * obs, w1 * (1 - obs))
            den = push(den, emb.emit, w0, w1)
        else:
            num = push(num, emb.emit, 1 - obs, obs)
            den = push(den, emb.emit, 1 - obs, obs)
        s = den.sum(axis=1, keepdims=True)
        num /= s
        den /= s
    return num.sum(axis=1) / den.sum(axis=1)


def _hidden_next_conditional(law: PerturbedLaw, k: int) -> np.ndarray:
    """``P(X_0 = 1 | Z_{-k..-1} = w)`` for every word of length k."""
    emb = law.base.embedding
    W = _all_words(k)
    post = np.broadcast_to(law.base.pi, (W.shape[0], emb.n_states)).copy()
    for i in range(k):
        obs = W[:, i:i + 1].astype(float)
        post = push(post,
                    emb.emit,
                    obs * law.eps + (1 - obs) * (1 - law.eps),
                    obs * (1 - law.eps) + (1 - obs) * law.eps)
        post /= post.sum(axis=1, keepdims=True)
    return push(post, emb.emit, 0.0, 1.0).sum(axis=1)


@dataclass
class LemmaReport:
    alpha: float
    min_observed_conditional: float
    min_hidden_conditional: float
    max_flip_posterior: float
    flip_bound: float

    @property
    def floor_holds(self) -> bool:
        return (self.min_observed_conditional >= self.alpha - SLACK
                and self.min_hidden_conditional >= self.alpha - SLACK)

    @property
    def flip_holds(self) -> bool:
        return self.max_flip_posterior <= self.flip_bound + SLACK

    @property
    def holds(self) -> bool:
        return self.floor_holds and self.flip_holds


def lemma_bounds_check(law: PerturbedLaw, k_max: int) -> LemmaReport:
    """Check the conditional floor ``alpha`` and the flip-posterior bound ``beta* eps / alpha``.

    The floor is taken over all observed pasts of length ``0..k_max`` for
    both ``Z_0`` and the hidden ``X_0``.  The flip posterior is the
    probability that the hidden symbol at time ``-j-1`` differs from its
    observation, given the hidden symbols after it and the observations up
    to it, maximised over ``0 <= j < k <= k_max`` and all words.
    """
    if k_max > MAX_LEMMA_K:
        raise ValueError(f"k_max {k_max} exceeds the cap {MAX_LEMMA_K}")
    const = compute_constants(law.tree)
    levels = law.levels(k_max)
    min_obs = min(float(np.min(np.minimum(lv.cond1, 1 - lv.cond1))) for lv in levels)
    min_hidden = math.inf
    for k in range(k_max + 1):
        h1 = _hidden_next_conditional(law, k)
        min_hidden = min(min_hidden, float(np.min(np.minimum(h1, 1 - h1))))
    max_flip = 0.0
    for k in range(1, k_max + 1):
        for j in range(k):
            max_flip = max(max_flip, float(np.max(_flip_posterior(law, k, j))))
    return LemmaReport(const.alpha, min_obs, min_hidden, max_flip,
                       const.beta_star * law.eps / const.alpha)


@dataclass(frozen=True)
class DeltaWindow:
    low: float
    high: float

    @property
    def empty(self) -> bool:
        return not self.low < self.high

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def margin(self) -> float:
        return self.high - self.low


def _code(w: str) -> int:
    return int(w, 2) if w else 0


def exact_delta_window(law: PerturbedLaw, d: int) -> DeltaWindow:
    """Range of thresholds separating contexts from their extensions under ``q``.

    ``high`` is the smallest ``max_a |q(a|w) - q(a|suf w)|`` over contexts of
    length <= d; ``low`` the largest such gap over strict extensions of
    contexts up to length d.  A threshold strictly inside recovers the tree
    from the exact law.
    """
    if d > MAX_WINDOW_DEPTH:
        raise ValueError(f"depth {d} exceeds the cap {MAX_WINDOW_DEPTH}")
    levels = law.levels(d)
    high = math.inf
    low = 0.0
    for w in law.tree.probs:
        lw = len(w)
        if lw > d:
            continue
        if lw >= 1:
            gap = abs(levels[lw].cond1[_code(w)] - levels[lw - 1].cond1[_code(w[1:])])
            high = min(high, float(gap))
        for L in range(lw + 1, d + 1):
            idx = (np.arange(1 << (L - lw)) << lw) + _code(w)
            suf = idx & ((1 << (L - 1)) - 1)
            gaps = np.abs(levels[L].cond1[idx] - levels[L - 1].cond1[suf])
            low = max(low, float(gaps.max()))
    return DeltaWindow(low, high)
