"""Probabilistic context trees over the binary alphabet.

Contexts are plain strings over ``"01"``.  The rightmost character is the
most recent symbol, so the context ``"10"`` means "the last symbol was 0 and
the one before it was 1".  The empty string stands for the empty context
(the memoryless model); in tree files it is written as ``-``.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

ALPHABET = (0, 1)
ALPHABET_SIZE = len(ALPHABET)

EMPTY_TOKEN = "-"
PARSE_TOL = 1e-9
PROB_TOL = 1e-12


class TreeFormatError(ValueError):
    """Malformed tree text (bad tokens, wrong number of fields)."""


class TreeValidationError(ValueError):
    """Well-formed text describing an invalid probabilistic context tree."""


def complement(s: int) -> int:
    return 1 - s


def suffix(w: str) -> str:
    """Largest proper suffix of `w`: drop the oldest (leftmost) symbol."""
    if not w:
        raise ValueError("the empty sequence has no suffix")
    return w[1:]


def is_suffix(s: str, w: str) -> bool:
    """True when `s` is a suffix of `w` (equality included)."""
    return w.endswith(s)


def is_proper_suffix(s: str, w: str) -> bool:
    return len(s) < len(w) and w.endswith(s)


def all_strings(length: int) -> list[str]:
    """All binary strings of the given length, in increasing integer order."""
    if length == 0:
        return [""]
    return ["".join(p) for p in itertools.product("01", repeat=length)]


def has_suffix_property(contexts: Iterable[str]) -> bool:
    ctx = set(contexts)
    return not any(
        w[i:] in ctx for w in ctx for i in range(1, len(w) + 1)
    )


def _check_string(w: str) -> None:
    if any(c not in "01" for c in w):
        raise TreeFormatError(f"context {w!r} is not a binary string")


@dataclass(frozen=True, eq=False)
class ContextTree:
    """A finite probabilistic context tree ``(tau, p)``.

    ``probs`` maps each context to the pair ``(p(0|w), p(1|w))``.  The
    constructor enforces the suffix property, row normalisation within
    `tol` and non-nullness.  Completeness and irreducibility are reported
    as flags; pass ``require_complete=True`` to make incompleteness an error.
    """

    probs: Mapping[str, tuple[float, float]]
    tol: float = field(default=PROB_TOL, repr=False)
    require_complete: bool = field(default=False, repr=False)

    def __post_init__(self):
        probs = {}
        for w, row in self.probs.items():
            _check_string(w)
            p0, p1 = (float(x) for x in row)
            if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0):
                raise TreeValidationError(f"probabilities of {w!r} outside [0, 1]")
            if abs(p0 + p1 - 1.0) > self.tol:
                raise TreeValidationError(
                    f"row of {w!r} sums to {p0 + p1!r}, not 1"
                )
            if min(p0, p1) <= 0.0:
                raise TreeValidationError(
                    f"non-nullness violated: zero probability in row of {w!r}"
                )
            probs[w] = (p0, p1)
        if not probs:
            raise TreeValidationError("a tree needs at least one context")
        for w in probs:
            for i in range(1, len(w) + 1):
                if w[i:] in probs:
                    shown = w[i:] or EMPTY_TOKEN
                    raise TreeValidationError(
                        f"suffix property violated: {shown!r} is a suffix of {w!r}"
                    )
        object.__setattr__(self, "probs", probs)
        if self.require_complete and not self.is_complete:
            raise TreeValidationError("tree is not complete")

    @property
    def contexts(self) -> tuple[str, ...]:
        return tuple(sorted(self.probs, key=lambda w: (len(w), w)))

    @property
    def height(self) -> int:
        return max(len(w) for w in self.probs)

    def __len__(self):
        return len(self.probs)

    def __contains__(self, w):
        return w in self.probs

    def __eq__(self, other):
        if not isinstance(other, ContextTree):
            return NotImplemented
        return self.probs == other.probs

    def prob(self, a: int, w: str) -> float:
        return self.probs[w][a]

    @property
    def is_complete(self) -> bool:
        """Every string of length `height` has exactly one context as suffix."""
        h = self.height
        for s in all_strings(h):
            hits = sum(1 for i in range(h + 1) if s[i:] in self.probs)
            if hits != 1:
                return False
        return True

    @property
    def is_irreducible(self) -> bool:
        """No context can be replaced by one of its proper suffixes.

        Replacing ``w`` by a nonempty proper suffix ``s`` keeps the suffix
        property exactly when ``s`` is not a suffix of some other context.
        """
        for w in self.probs:
            for i in range(1, len(w)):
                s = w[i:]
                if not any(v != w and v.endswith(s) for v in self.probs):
                    return False
        return True

    def serialize(self) -> str:
        lines = []
        for w in self.contexts:
            p0, p1 = self.probs[w]
            lines.append(f"{w or EMPTY_TOKEN} {p0!r} {p1!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Short content hash used to tag generated artifacts."""
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]


def parse_tree(text: str, require_complete: bool = False) -> ContextTree:
    """Parse the ``<context> <p0> <p1>`` line format; ``#`` starts a comment."""
    probs: dict[str, tuple[float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise TreeFormatError(f"line {lineno}: expected '<context> <p0> <p1>'")
        w = "" if parts[0] == EMPTY_TOKEN else parts[0]
        _check_string(w)
        try:
            p0, p1 = float(parts[1]), float(parts[2])
        except ValueError:
            raise TreeFormatError(f"line {lineno}: probabilities must be decimals") from None
        if w in probs:
            raise TreeValidationError(f"line {lineno}: duplicate context {parts[0]!r}")
        probs[w] = (p0, p1)
    return ContextTree(probs, tol=PARSE_TOL, require_complete=require_complete)


def load_tree(path, require_complete: bool = False) -> ContextTree:
    with open(path) as fh:
        return parse_tree(fh.read(), require_complete=require_complete)


def longest_context(tree: ContextTree, past: str) -> str:
    """The unique context of `tree` that is a suffix of `past`."""
    if len(past) < tree.height:
        raise ValueError(
            f"past of length {len(past)} is shorter than the tree height {tree.height}"
        )
    for k in range(min(len(past), tree.height) + 1):
        w = past[len(past) - k:] if k else ""
        if w in tree.probs:
            return w
    raise ValueError(f"no context of the tree is a suffix of {past!r}")


def truncate(tree: ContextTree | Iterable[str], K: int) -> frozenset[str]:
    """Contexts of length <= K plus the length-K suffixes of longer contexts."""
    if K < 1:
        raise ValueError("truncation level must be >= 1")
    contexts = tree.probs if isinstance(tree, ContextTree) else set(tree)
    out = set()
    for w in contexts:
        if len(w) <= K:
            out.add(w)
        else:
            out.add(w[-K:])
    # the empty context of a memoryless model is not a node of A*
    out.discard("")
    return frozenset(out)


def min_valid_depth(tree: ContextTree, K: int) -> int:
    """Largest, over nodes of the truncated tree, of the shortest context extending it.

    Theorem-2 style depth conditions hold for any ``d`` strictly larger.
    """
    best = 0
    for w in truncate(tree, K):
        best = max(best, min(len(v) for v in tree.probs if v.endswith(w)))
    return best


@dataclass(frozen=True)
class TreeConstants:
    alpha: float
    beta_seq: tuple[float, ...]
    beta_sum: float
    beta_star: float
    c_const: float

    def beta(self, k: int) -> float:
        return self.beta_seq[k] if k < len(self.beta_seq) else 0.0


def compute_constants(tree: ContextTree) -> TreeConstants:
    """Non-nullness floor, continuity rate and the perturbation constant.

    ``beta_k`` is the sup of ``|1 - p(a|w)/p(a|v)|`` over ordered pairs of
    contexts sharing a common proper suffix of length ``k``.
    """
    alpha = min(min(row) for row in tree.probs.values())
    ctx = list(tree.probs)
    beta_seq = []
    for k in range(tree.height):
        groups: dict[str, list[str]] = {}
        for w in ctx:
            if len(w) > k:
                groups.setdefault(w[len(w) - k:] if k else "", []).append(w)
        b = 0.0
        for members in groups.values():
            for w, v in itertools.product(members, repeat=2):
                for a in ALPHABET:
                    b = max(b, abs(1.0 - tree.probs[w][a] / tree.probs[v][a]))
        beta_seq.append(b)
    beta_sum = sum(beta_seq)
    beta_star = 1.0
    for b in beta_seq:
        beta_star *= 1.0 + b
    c_const = 1.0 + 4.0 * beta_sum * beta_star / alpha
    return TreeConstants(alpha, tuple(beta_seq), beta_sum, beta_star, c_const)
