"""Window counts and the threshold variant of the algorithm Context."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import SamplePath
from .tree import ALPHABET_SIZE, ContextTree, truncate

DENSE_LEVEL_MAX = 22


class CountTrie:
    """Occurrence counts of every substring of length <= depth in a sample.

    Level ``L`` stores counts keyed by the integer code of the window, read
    oldest symbol first (so ``"10"`` has code 2).  Short levels are dense
    ``bincount`` arrays; long ones keep sorted unique codes.
    """

    def __init__(self, sample: SamplePath | np.ndarray, d: int):
        x = np.asarray(getattr(sample, "symbols", sample), dtype=np.int64)
        self.n = len(x)
        self.d = d
        self.depth = d + 1
        if d < 0 or self.depth > self.n:
            raise ValueError(f"need 1 <= d + 1 <= n (d = {d}, n = {self.n})")
        self._levels: list = [None]
        code = np.zeros(self.n, dtype=np.int64)
        for L in range(1, self.depth + 1):
            # code[t] covers the window x[t : t + L]
            code = (code[: self.n - L + 1] << 1) | x[L - 1:]
            if L <= DENSE_LEVEL_MAX:
                self._levels.append(np.bincount(code, minlength=1 << L))
            else:
                self._levels.append(np.unique(code, return_counts=True))

    def counts(self, L: int, codes) -> np.ndarray:
        """Vectorised ``N_n`` lookup for integer codes at level `L`."""
        codes = np.asarray(codes, dtype=np.int64)
        if L == 0:
            return np.full(codes.shape, self.n, dtype=np.int64)
        level = self._levels[L]
        if isinstance(level, np.ndarray):
            return level[codes]
        keys, cnt = level
        pos = np.clip(np.searchsorted(keys, codes), 0, len(keys) - 1)
        return np.where(keys[pos] == codes, cnt[pos], 0)

    def count(self, w: str) -> int:
        if len(w) > self.depth:
            raise ValueError(f"{w!r} is deeper than the trie")
        return int(self.counts(len(w), int(w, 2) if w else 0))

    def level_total(self, L: int) -> int:
        level = self._levels[L]
        return int(level.sum() if isinstance(level, np.ndarray) else level[1].sum())

    def seen(self, L: int) -> np.ndarray:
        """Codes of the substrings of length `L` occurring at least once."""
        if L == 0:
            return np.zeros(1, dtype=np.int64)
        level = self._levels[L]
        if isinstance(level, np.ndarray):
            return np.flatnonzero(level)
        return level[0]

    def smoothed_frac(self, L: int, codes) -> tuple[np.ndarray, np.ndarray]:
        """Exact numerator and denominator of ``q_hat(1 | w)``."""
        codes = np.asarray(codes, dtype=np.int64)
        n0 = self.counts(L + 1, codes << 1)
        n1 = self.counts(L + 1, (codes << 1) | 1)
        return n1 + 1, n0 + n1 + ALPHABET_SIZE

    def smoothed(self, L: int, codes) -> np.ndarray:
        """``q_hat(1 | w)`` for codes of length-`L` strings, with add-one smoothing."""
        num, den = self.smoothed_frac(L, codes)
        return num / den


def build_counts(sample: SamplePath | np.ndarray, d: int) -> CountTrie:
    return CountTrie(sample, d)


def count_naive(sample: SamplePath | str, w: str) -> int:
    """Direct scan of every window; slow, kept as an independent oracle."""
    s = sample if isinstance(sample, str) else str(sample)
    L = len(w)
    if L > len(s):
        return 0
    return sum(1 for t in range(len(s) - L + 1) if s[t:t + L] == w)


def _code(w: str) -> int:
    return int(w, 2) if w else 0


def empirical_conditional(trie: CountTrie, a: int, w: str) -> float:
    """``(N(wa) + 1) / (N(w.) + |A|)``; for the empty word the symbol counts are used."""
    if len(w) > trie.d:
        raise ValueError(f"{w!r} is deeper than d = {trie.d}")
    q1 = float(trie.smoothed(len(w), _code(w)))
    return q1 if a == 1 else 1.0 - q1


def _delta_frac(trie: CountTrie, L: int, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exact rational gap; numerator and denominator stay below n^2 < 2^63
    suf = codes & ((1 << (L - 1)) - 1)
    a, b = trie.smoothed_frac(L, codes)
    c, e = trie.smoothed_frac(L - 1, suf)
    return np.abs(a * e - c * b), b * e


def delta(trie: CountTrie, w: str) -> float:
    """Largest gap between the smoothed rows of `w` and of its suffix."""
    if not 1 <= len(w) <= trie.d:
        raise ValueError(f"need 1 <= len(w) <= d = {trie.d}")
    num, den = _delta_frac(trie, len(w), np.array([_code(w)]))
    return float(num[0] / den[0])


@dataclass
class EstimatedTree:
    """Output of the estimator.

    An empty `contexts` set is the memoryless model; its row is
    ``probs[""]``.
    """

    contexts: frozenset[str]
    probs: dict[str, tuple[float, float]]
    delta: float
    d: int
    n: int
    max_delta: float = 0.0
    significant: frozenset[str] = field(default=frozenset(), repr=False)

    @property
    def is_memoryless(self) -> bool:
        return not self.contexts

    def to_tree(self) -> ContextTree:
        return ContextTree(self.probs)

    def header(self) -> dict:
        return {"n": self.n, "d": self.d, "delta": repr(self.delta),
                "max_delta": repr(self.max_delta),
                "memoryless": int(self.is_memoryless)}

    def serialize(self) -> str:
        head = "# " + " ".join(f"{k}={v}" for k, v in self.header().items()) + "\n"
        return head + self.to_tree().serialize()


def _word(code: int, L: int) -> str:
    return format(int(code), f"0{L}b") if L else ""


def estimate_tree(sample: SamplePath | np.ndarray, delta_threshold: float, d: int,
                  trie: CountTrie | None = None) -> EstimatedTree:
    """Significant nodes of length <= d with no significant strict extension.

    Only nodes whose suffix occurs in the sample can have a nonzero gap,
    so the search visits every one-symbol extension of each seen node and
    nothing else.
    """
    n = len(sample)
    if d >= n:
        raise ValueError(f"need d < n (d = {d}, n = {n})")
    if d < 1:
        raise ValueError("d must be >= 1")
    if trie is None:
        trie = CountTrie(sample, d)
    significant: set[str] = set()
    max_delta = 0.0
    for L in range(1, d + 1):
        parents = trie.seen(L - 1)
        cand = np.concatenate([parents, parents | (1 << (L - 1))])
        num, den = _delta_frac(trie, L, cand)
        if num.size:
            max_delta = max(max_delta, float((num / den).max()))
        # ties prune, so compare exactly rather than through a rounded quotient
        for code in cand[num > delta_threshold * den]:
            significant.add(_word(code, L))
    covered = {w[i:] for w in significant for i in range(1, len(w))}
    contexts = frozenset(significant - covered)
    if contexts:
        probs = {}
        for w in contexts:
            q1 = float(trie.smoothed(len(w), _code(w)))
            probs[w] = (1.0 - q1, q1)
    else:
        q1 = float(trie.smoothed(0, 0))
        probs = {"": (1.0 - q1, q1)}
    return EstimatedTree(contexts, probs, float(delta_threshold), d, n,
                         max_delta, frozenset(significant))


@dataclass(frozen=True)
class TruncationComparison:
    K: int
    estimated: frozenset[str]
    truth: frozenset[str]

    @property
    def missing(self) -> frozenset[str]:
        return self.truth - self.estimated

    @property
    def extra(self) -> frozenset[str]:
        return self.estimated - self.truth

    @property
    def equal(self) -> bool:
        return self.estimated == self.truth


def compare_truncated(est, truth, K: int) -> TruncationComparison:
    """Compare two context sets after truncating both to level `K`."""
    e = est.contexts if isinstance(est, EstimatedTree) else est
    return TruncationComparison(K, truncate(e, K), truncate(truth, K))
