"""Explicit recovery bound, its admissibility conditions and threshold windows."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .chain import ChainLaw
from .noise import DeltaWindow, PerturbedLaw, q_min
from .tree import ALPHABET_SIZE, ContextTree, compute_constants, min_valid_depth

MIN_N_CAP = 10**15


class AdmissibilityError(ValueError):
    pass


@dataclass(frozen=True)
class Theorem2Params:
    d: int
    K: int
    n: int
    delta: float
    epsilon: float
    c_const: float
    D_d: float
    q_d: float
    beta: float
    depth_floor: int

    @classmethod
    def from_tree(cls, tree: ContextTree | ChainLaw, d: int, K: int, n: int,
                  delta: float, epsilon: float) -> "Theorem2Params":
        law = tree if isinstance(tree, ChainLaw) else ChainLaw(tree)
        const = compute_constants(law.tree)
        return cls(
            d=d, K=K, n=n, delta=delta, epsilon=epsilon,
            c_const=const.c_const,
            D_d=law.d_k(d),
            q_d=q_min(PerturbedLaw(law, epsilon), d),
            beta=const.beta_sum,
            depth_floor=min_valid_depth(law.tree, K),
        )

    @property
    def noise_term(self) -> float:
        return 2.0 * self.epsilon * self.c_const

    @property
    def margin(self) -> float:
        """``min(delta, D_d - delta) - 2 eps C``; positive inside the window."""
        return min(self.delta, self.D_d - self.delta) - self.noise_term

    def violations(self) -> list[str]:
        out = []
        if not self.d > self.depth_floor:
            out.append(f"depth: need d > {self.depth_floor}, got d = {self.d}")
        if not self.noise_term < self.delta < self.D_d - self.noise_term:
            out.append(
                f"threshold: need {self.noise_term!r} < delta < {self.D_d - self.noise_term!r}, "
                f"got delta = {self.delta!r}"
            )
        elif not self.n > self._n_threshold():
            out.append(f"sample size: need n > {self._n_threshold()!r}, got n = {self.n}")
        return out

    @property
    def admissible(self) -> bool:
        return not self.violations()

    def _n_threshold(self) -> float:
        return 4 * (ALPHABET_SIZE + 1) / (self.margin * self.q_d) + self.d

    def replace(self, **kw) -> "Theorem2Params":
        return dataclasses.replace(self, **kw)


def theorem2_bound(params: Theorem2Params, strict: bool = True) -> float:
    """Upper bound on the probability that the truncated estimate is wrong.

    The raw value may exceed 1.  With ``strict=False`` the formula is
    evaluated even for inadmissible parameters.
    """
    if strict:
        bad = params.violations()
        if bad:
            raise AdmissibilityError("; ".join(bad))
    A = ALPHABET_SIZE
    d = params.d
    prefactor = 4.0 * math.exp(1.0 / math.e) * (A + 1) * A ** (d + 1)
    rate = params.margin ** 2 * params.q_d ** 2 / (
        256.0 * math.e * (1.0 + params.beta) * A ** 2 * (d + 1))
    return prefactor * math.exp(-(params.n - d) * rate)


def theorem2_min_n(params: Theorem2Params) -> int:
    """Smallest integer n strictly above ``4(|A|+1) / (margin q_d) + d``."""
    if params.margin <= 0:
        raise AdmissibilityError("threshold window is empty for these parameters")
    x = params._n_threshold()
    if not x < MIN_N_CAP:
        raise AdmissibilityError(f"minimal sample size exceeds {MIN_N_CAP:.0e}")
    return math.floor(x) + 1


def theoretical_delta_window(tree: ContextTree | ChainLaw, epsilon: float, d: int) -> DeltaWindow:
    """``(2 C eps, D_d - 2 C eps)``."""
    law = tree if isinstance(tree, ChainLaw) else ChainLaw(tree)
    c = compute_constants(law.tree).c_const
    return DeltaWindow(2 * c * epsilon, law.d_k(d) - 2 * c * epsilon)
