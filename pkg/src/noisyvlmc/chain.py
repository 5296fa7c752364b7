"""Exact law of a stationary chain compatible with a finite context tree.

The chain is embedded into an ordinary Markov chain whose state is the
block of the last ``order`` symbols.  States are integers: the most recent
symbol is the least significant bit, so appending symbol ``a`` to state
``s`` gives ``((s << 1) | a) & (n_states - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import seeding
from .tree import ContextTree, TreeValidationError, longest_context

MAX_ORDER = 20
DIRECT_SOLVE_MAX_ORDER = 12
POWER_TOL = 1e-12
POWER_MAX_ITER = 10**6


class ConvergenceError(RuntimeError):
    pass


class UndefinedConditionalError(ValueError):
    """Conditioning on a cylinder of probability zero."""


@dataclass(frozen=True, eq=False)
class MarkovEmbedding:
    """Order-``order`` Markov chain realising a context tree.

    ``emit[s, a]`` is the probability of emitting ``a`` from state ``s``.
    A memoryless tree is embedded with order 1 so that the last symbol is
    always part of the state.
    """

    tree: ContextTree
    order: int
    emit: np.ndarray = field(repr=False)

    @property
    def n_states(self) -> int:
        return 1 << self.order

    def state_string(self, s: int) -> str:
        return format(s, f"0{self.order}b")

    def next_state(self, s: int, a: int) -> int:
        return ((s << 1) | a) & (self.n_states - 1)

    def row(self, state: str) -> tuple[float, float]:
        s = int(state, 2)
        return float(self.emit[s, 0]), float(self.emit[s, 1])

    def transition_matrix(self) -> sp.csr_matrix:
        S = self.n_states
        src = np.repeat(np.arange(S), 2)
        sym = np.tile([0, 1], S)
        dst = ((src << 1) | sym) & (S - 1)
        return sp.csr_matrix((self.emit.ravel(), (src, dst)), shape=(S, S))


def embed(tree: ContextTree) -> MarkovEmbedding:
    if not tree.is_complete:
        raise TreeValidationError("sampling and exact laws need a complete tree")
    order = max(tree.height, 1)
    if order > MAX_ORDER:
        raise ValueError(f"tree height {order} exceeds the state-space cap {MAX_ORDER}")
    S = 1 << order
    emit = np.empty((S, 2))
    for s in range(S):
        row = tree.probs[longest_context(tree, format(s, f"0{order}b"))]
        emit[s] = row
    emit /= emit.sum(axis=1, keepdims=True)
    return MarkovEmbedding(tree, order, emit)


def _power_iteration(emb: MarkovEmbedding) -> np.ndarray:
    pi = np.full(emb.n_states, 1.0 / emb.n_states)
    for _ in range(POWER_MAX_ITER):
        nxt = push(pi, emb.emit, 1.0, 1.0)
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < POWER_TOL:
            return nxt
        pi = nxt
    raise ConvergenceError("power iteration did not converge")


def stationary(emb: MarkovEmbedding) -> np.ndarray:
    """Stationary vector ``pi`` with ``pi P = pi``, indexed by state."""
    if emb.order > DIRECT_SOLVE_MAX_ORDER:
        return _power_iteration(emb)
    S = emb.n_states
    A = (emb.transition_matrix().T - sp.identity(S)).tolil()
    A[0, :] = 1.0
    b = np.zeros(S)
    b[0] = 1.0
    pi = spla.spsolve(A.tocsc(), b) if S > 1 else np.ones(1)
    pi = np.clip(np.atleast_1d(pi), 0.0, None)
    return pi / pi.sum()


def push(post: np.ndarray, emit: np.ndarray, w0, w1) -> np.ndarray:
    """One forward step over hidden states.

    `post` has shape ``(..., S)``.  The hidden chain emits ``b`` with
    probability ``emit[s, b]`` and the result is weighted by ``w0``/``w1``
    (scalars or arrays broadcasting against `post`).  Returns the unnormalised
    vector over the successor states.
    """
    S = emit.shape[0]
    half = S // 2
    g0 = post * emit[:, 0] * w0
    g1 = post * emit[:, 1] * w1
    out = np.empty(np.broadcast_shapes(g0.shape, g1.shape))
    # state s = hi*half + r moves to 2r + b
    out[..., 0::2] = g0[..., :half] + g0[..., half:]
    out[..., 1::2] = g1[..., :half] + g1[..., half:]
    return out


def channel_weights(obs: int, eps: float) -> tuple[float, float]:
    """Likelihood of observing `obs` for hidden symbol 0 and 1."""
    return (1.0 - eps, eps) if obs == 0 else (eps, 1.0 - eps)


def forward(emb: MarkovEmbedding, pi: np.ndarray, w: str, eps: float = 0.0):
    """Filter the observed string `w` through the flip channel.

    Returns the posterior over hidden states after `w` and ``log P(Z = w)``.
    Each step is renormalised and the log-scale accumulated separately.
    """
    post = pi.copy()
    logq = 0.0
    for c in w:
        g = push(post, emb.emit, *channel_weights(int(c), eps))
        s = g.sum()
        if s <= 0.0:
            return np.zeros_like(post), -math.inf
        post = g / s
        logq += math.log(s)
    return post, logq


@dataclass
class Level:
    """Exhaustive cylinder table for all strings of one length.

    Entry ``i`` is the string ``format(i, '0{length}b')``.
    """

    length: int
    prob: np.ndarray
    cond1: np.ndarray

    def cond(self, a: int) -> np.ndarray:
        return self.cond1 if a == 1 else 1.0 - self.cond1


def forward_levels(emb: MarkovEmbedding, pi: np.ndarray, eps: float, max_len: int) -> list[Level]:
    """Cylinder probabilities and next-symbol conditionals for every string of length <= max_len."""
    post = pi[None, :].copy()
    logq = np.zeros(1)
    levels = []
    for j in range(max_len + 1):
        g0 = push(post, emb.emit, *channel_weights(0, eps))
        g1 = push(post, emb.emit, *channel_weights(1, eps))
        s0 = g0.sum(axis=1)
        s1 = g1.sum(axis=1)
        tot = s0 + s1
        with np.errstate(invalid="ignore", divide="ignore"):
            levels.append(Level(j, np.exp(logq), s1 / tot))
            if j == max_len:
                break
            m = post.shape[0]
            nxt = np.empty((2 * m, post.shape[1]))
            nxt[0::2] = g0 / s0[:, None]
            nxt[1::2] = g1 / s1[:, None]
            nlog = np.empty(2 * m)
            nlog[0::2] = logq + np.log(s0)
            nlog[1::2] = logq + np.log(s1)
        post, logq = np.nan_to_num(nxt), nlog
    return levels


class ChainLaw:
    """Stationary law of the chain compatible with a complete context tree."""

    def __init__(self, tree: ContextTree):
        self.tree = tree
        self.embedding = embed(tree)
        self.pi = stationary(self.embedding)
        self._levels: list[Level] = []

    @property
    def order(self) -> int:
        return self.embedding.order

    def stationary_prob(self, state: str) -> float:
        return float(self.pi[int(state, 2)])

    def log_marginal(self, w: str) -> float:
        return forward(self.embedding, self.pi, w)[1]

    def marginal(self, w: str) -> float:
        """``P(X_1 ... X_j = w)``."""
        return math.exp(self.log_marginal(w))

    def conditional(self, a: int, w: str) -> float:
        """``P(X_0 = a | X_{-j} ... X_{-1} = w)``.

        The tree row when some context is a suffix of `w`, otherwise the
        stationary mixture ``p(wa) / p(w)``.
        """
        for k in range(min(len(w), self.tree.height) + 1):
            c = w[len(w) - k:] if k else ""
            if c in self.tree.probs:
                return self.tree.probs[c][a]
        post, logp = forward(self.embedding, self.pi, w)
        if logp == -math.inf:
            raise UndefinedConditionalError(f"p({w!r}) = 0")
        return float(push(post, self.embedding.emit, *channel_weights(a, 0.0)).sum())

    def levels(self, max_len: int) -> list[Level]:
        if len(self._levels) <= max_len:
            self._levels = forward_levels(self.embedding, self.pi, 0.0, max_len)
        return self._levels[: max_len + 1]

    def d_k(self, k: int) -> float:
        """Smallest context-vs-suffix row gap over contexts of length <= k."""
        if k < 1:
            raise ValueError("k must be >= 1")
        gaps = [
            abs(self.tree.probs[w][1] - self.conditional(1, w[1:]))
            for w in self.tree.probs
            if 1 <= len(w) <= k
        ]
        return min(gaps) if gaps else math.inf

    def sample(self, n: int, seed: int) -> "SamplePath":
        """Stationary sample path: initial block from ``pi``, then the transitions."""
        if n < self.tree.height:
            raise ValueError(f"n = {n} is shorter than the tree height")
        gen = seeding.rng(seed)
        emb = self.embedding
        state = int(gen.choice(emb.n_states, p=self.pi))
        head = [int(c) for c in emb.state_string(state)]
        u = gen.random(max(n - emb.order, 0)).tolist()
        p1 = emb.emit[:, 1].tolist()
        mask = emb.n_states - 1
        out = head
        for x in u:
            b = 1 if x < p1[state] else 0
            state = ((state << 1) | b) & mask
            out.append(b)
        return SamplePath(np.array(out[:n], dtype=np.uint8), seed, self.tree.digest())


@dataclass(eq=False)
class SamplePath:
    symbols: np.ndarray
    seed: int | None = None
    source: str = ""

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return self.symbols.astype(np.uint8).tobytes().translate(bytes.maketrans(b"\x00\x01", b"01")).decode()

    @classmethod
    def from_string(cls, text: str, **kw) -> "SamplePath":
        return cls(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"), **kw)


class SampleFormatError(ValueError):
    pass


def format_sample(path: SamplePath, header: dict | None = None) -> str:
    head = ""
    if header:
        head = "# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n"
    return head + str(path) + "\n"


def parse_sample(text: str) -> tuple[SamplePath, dict]:
    """Read a sample file; newlines are ignored and ``#`` lines are header comments."""
    header = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    header[k] = v
            continue
        body.append(line.strip())
    bits = "".join(body)
    if bits.strip("01"):
        raise SampleFormatError("sample files may contain only '0' and '1'")
    seed = header.get("seed")
    path = SamplePath.from_string(
        bits, seed=int(seed) if seed is not None and seed.lstrip("-").isdigit() else None,
        source=header.get("tree", ""),
    )
    return path, header
