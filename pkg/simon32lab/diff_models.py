# -*- coding: utf-8 -*-
"""Differential-probability kernels.

* `xdp_add`: XOR-differential probability of addition modulo 2^n (closed form),
  the membership test of the partial DDT, plus its brute-force oracle.
* `paper_round_propagate`: the deterministic round model that generates the
  reference trail (the AND contribution is taken as a zero difference).
* `simon_and_dp_exact`: exact one-round probability of SIMON's AND map, used
  only to measure how far the deterministic model is from the real cipher.
* `monte_carlo_dp`: keyed empirical estimate through `simon_core.iterate_pair`.
"""

from __future__ import annotations

# Import dataclass for structured value objects.
from dataclasses import dataclass
from fractions import Fraction

# Import typing primitives.
from typing import Any, Optional, Tuple

# Import stdlib helpers.
import math

# Import numpy.
import numpy as np

# Import local helpers.
from .bitops import hw, hw_array, rotl, rotr, word_dtype, word_mask
from .errors import ContractError
from .simon_core import SIMON32_64, CipherState, DiffState, KeySchedule, SimonParams, iterate_pair, key_schedule

# Largest word size the brute-force oracles accept (cost 2^(2n)).
BRUTEFORCE_MAX_WORD_SIZE = 10

# Rotation of the deterministic round model (a right rotation).
PAPER_MODEL_ROTATION = 2


@dataclass(frozen=True)
class DyadicProb:
    """Probability 2^-weight, or IMPOSSIBLE when `weight` is None."""

    weight: Optional[int]

    @classmethod
    def from_weight(cls, weight: int) -> "DyadicProb":
        if weight < 0:
            raise ContractError(f"dyadic weight must be non-negative, got {weight}")
        return cls(int(weight))

    @property
    def possible(self) -> bool:
        return self.weight is not None

    @property
    def probability(self) -> float:
        """Float value (0.0 when impossible); presentation only."""
        if self.weight is None:
            return 0.0
        return math.ldexp(1.0, -self.weight)

    @property
    def fraction(self) -> Fraction:
        if self.weight is None:
            return Fraction(0)
        return Fraction(1, 1 << self.weight)

    @property
    def log2(self) -> int:
        """Signed log2 of the probability (-weight)."""
        if self.weight is None:
            raise ContractError("log2 of an impossible differential is undefined")
        return -self.weight

    def __str__(self) -> str:
        return "IMPOSSIBLE" if self.weight is None else f"2^-{self.weight}"


IMPOSSIBLE = DyadicProb(None)
CERTAIN = DyadicProb(0)


# ---------------------------------------------------------------------------
# XOR-differential probability of modular addition
# ---------------------------------------------------------------------------


def _eq(x: Any, y: Any, z: Any, mask: int) -> Any:
    """Bit i set iff x_i = y_i = z_i."""
    return ((x ^ y ^ mask) & (x ^ z ^ mask)) & mask


def xdp_add_weights(a: Any, b: Any, c: Any, n: int) -> Any:
    """Closed-form weight of (a, b -> c) through addition mod 2^n; -1 marks IMPOSSIBLE.

    Works element-wise on numpy arrays (int32 result) and on Python ints.
    A word size of 0 is the empty prefix, which always has weight 0.
    """
    if n < 0:
        raise ContractError(f"word size must be non-negative, got {n}")
    if n == 0:
        if isinstance(a, np.ndarray):
            return np.zeros(np.shape(a), dtype=np.int32)
        return 0
    mask = word_mask(n)
    low = word_mask(n - 1)
    a1, b1, c1 = a << 1, b << 1, c << 1
    bad = _eq(a1, b1, c1, mask) & (a ^ b ^ c ^ b1) & mask
    if isinstance(a, np.ndarray):
        w = hw_array(~_eq(a, b, c, mask) & low)
        return np.where(bad != 0, -1, w).astype(np.int32)
    if bad:
        return -1
    return hw(~_eq(a, b, c, mask) & low)


def xdp_add(a: int, b: int, c: int, n: int = 16) -> DyadicProb:
    """Exact XOR-differential probability DP(a, b -> c) of addition modulo 2^n."""
    mask = word_mask(n)
    w = xdp_add_weights(int(a) & mask, int(b) & mask, int(c) & mask, n)
    return IMPOSSIBLE if w < 0 else DyadicProb(int(w))


def _dyadic_from_count(count: int, total_log2: int) -> DyadicProb:
    if count == 0:
        return IMPOSSIBLE
    if count & (count - 1):
        raise ContractError(f"pair count {count} is not a power of two")
    return DyadicProb(total_log2 - (count.bit_length() - 1))


def xdp_add_bruteforce(a: int, b: int, c: int, n: int) -> DyadicProb:
    """Count the pairs (x, y) with ((x^a) + (y^b)) ^ (x + y) = c over all 2^(2n) pairs."""
    if n > BRUTEFORCE_MAX_WORD_SIZE:
        raise ContractError(f"brute force at n={n} needs 2^{2 * n} evaluations; limit is n={BRUTEFORCE_MAX_WORD_SIZE}")
    mask = word_mask(n)
    x = np.arange(1 << n, dtype=np.uint32)[:, None]
    y = np.arange(1 << n, dtype=np.uint32)[None, :]
    out = (((x ^ (a & mask)) + (y ^ (b & mask))) ^ (x + y)) & mask
    count = int(np.count_nonzero(out == (c & mask)))
    return _dyadic_from_count(count, 2 * n)


def xdp_add_bruteforce_table(n: int) -> np.ndarray:
    """Full DDT of addition at word size n as weights indexed [a, b, c] (-1 = IMPOSSIBLE)."""
    if n > 6:
        raise ContractError(f"full brute-force DDT at n={n} is too large; limit is n=6")
    size = 1 << n
    mask = word_mask(n)
    x = np.arange(size, dtype=np.uint32)[:, None]
    y = np.arange(size, dtype=np.uint32)[None, :]
    base = (x + y) & mask
    weights = np.full((size, size, size), -1, dtype=np.int32)
    for a in range(size):
        for b in range(size):
            out = ((((x ^ a) + (y ^ b)) & mask) ^ base).ravel()
            counts = np.bincount(out, minlength=size)
            for c in np.nonzero(counts)[0]:
                weights[a, b, c] = _dyadic_from_count(int(counts[c]), 2 * n).weight
    return weights


def prefix_dp_monotone(a_k: int, b_k: int, c_k: int, k: int) -> DyadicProb:
    """DP of the k-bit low prefix (a_k, b_k -> c_k).

    Extending a prefix by one more bit never raises the probability, which is
    what lets the partial DDT abandon a branch as soon as it falls below threshold.
    """
    if k < 0:
        raise ContractError(f"prefix length must be non-negative, got {k}")
    if k == 0:
        return CERTAIN
    return xdp_add(a_k, b_k, c_k, k)


# ---------------------------------------------------------------------------
# Deterministic round model
# ---------------------------------------------------------------------------


def paper_round_propagate(s: DiffState, n: int = 16, rot: int = PAPER_MODEL_ROTATION) -> Tuple[DiffState, int]:
    """Next state (dR ^ rotr(dL, rot), dL) and the weight hw(dL ^ dR) of the input state."""
    mask = word_mask(n)
    dL, dR = int(s[0]) & mask, int(s[1]) & mask
    return DiffState(dR ^ rotr(dL, rot, n), dL), hw(dL ^ dR)


def paper_model_hw(dL: Any, dR: Any, rounds: int, n: int = 16, rot: int = PAPER_MODEL_ROTATION) -> Any:
    """Sum of hw(dL_r ^ dR_r) over the states after rounds 1..rounds (vectorized)."""
    if rounds < 0:
        raise ContractError(f"rounds must be non-negative, got {rounds}")
    mask = word_mask(n)
    l = np.asarray(dL, dtype=word_dtype(n)) & mask
    r = np.asarray(dR, dtype=word_dtype(n)) & mask
    total = np.zeros(l.shape, dtype=np.int64)
    for _ in range(rounds):
        l, r = r ^ rotr(l, rot, n), l
        total += hw_array(l ^ r)
    return total


# ---------------------------------------------------------------------------
# Exact SIMON AND-differential (model error measurement)
# ---------------------------------------------------------------------------


def simon_and_dp_exact(alpha: int, gamma: int, n: int = 16, rotations: Tuple[int, int] = (1, 8)) -> DyadicProb:
    """Exact probability that rotl(x,a) & rotl(x,b) changes by `gamma` when x changes by `alpha`.

    The output difference is affine in x, so the probability is 2^-rank of the
    linear part when `gamma` lies in its image and 0 otherwise. Rows pair up
    along the chain i, i+d, i+2d, ... with d = a - b; a zero bit of the rotated
    input difference sitting between two ones yields a duplicated row.
    """
    ra, rb = rotations
    d = (ra - rb) % n
    if math.gcd(d, n) != 1:
        raise ContractError(f"rotations {rotations} at n={n} do not form a single chain (gcd({d}, {n}) != 1)")
    mask = word_mask(n)
    alpha &= mask
    gamma &= mask
    A = rotl(alpha, ra, n)
    B = rotl(alpha, rb, n)
    varibits = A | B
    gp = gamma ^ (A & B)
    if alpha == mask:
        # Every row is x_j ^ x_{j+d}: a single cycle with one dependency.
        if hw(gp) % 2:
            return IMPOSSIBLE
        return DyadicProb(n - 1)
    if gp & ~varibits & mask:
        return IMPOSSIBLE
    dup = A & ~B & rotr(B, d, n) & mask
    if (gp ^ rotr(gp, d, n)) & dup:
        return IMPOSSIBLE
    return DyadicProb(hw(varibits) - hw(dup))


def simon_and_dp_bruteforce(alpha: int, gamma: int, n: int, rotations: Tuple[int, int] = (1, 8)) -> DyadicProb:
    """Enumerate all 2^n values of x; oracle for `simon_and_dp_exact`."""
    if n > 2 * BRUTEFORCE_MAX_WORD_SIZE:
        raise ContractError(f"brute force at n={n} is too large")
    ra, rb = rotations
    mask = word_mask(n)
    x = np.arange(1 << n, dtype=word_dtype(n))
    xa = x ^ (alpha & mask)
    out = (rotl(xa, ra, n) & rotl(xa, rb, n)) ^ (rotl(x, ra, n) & rotl(x, rb, n))
    count = int(np.count_nonzero(out == (gamma & mask)))
    return _dyadic_from_count(count, n)


def one_round_dp_exact(s: DiffState, target: DiffState, params: SimonParams = SIMON32_64) -> DyadicProb:
    """Exact probability that one SIMON round maps difference `s` to `target` (keys cancel)."""
    n = params.word_size
    mask = params.mask
    dL, dR = int(s[0]) & mask, int(s[1]) & mask
    if (int(target[1]) & mask) != dL:
        return IMPOSSIBLE
    gamma = (int(target[0]) & mask) ^ dR ^ rotl(dL, params.rotations[2], n)
    return simon_and_dp_exact(dL, gamma, n, params.rotations[:2])


# ---------------------------------------------------------------------------
# Monte-Carlo estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Hit fraction with its binomial standard error."""

    hits: int
    trials: int
    target: DiffState

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)


def paper_model_state(s0: DiffState, rounds: int, n: int = 16) -> DiffState:
    """State reached after `rounds` applications of the deterministic model."""
    s = DiffState(int(s0[0]), int(s0[1]))
    for _ in range(rounds):
        s, _w = paper_round_propagate(s, n)
    return s


def and_zero_state(s0: DiffState, rounds: int, params: SimonParams = SIMON32_64) -> DiffState:
    """State reached when every AND difference is zero: (dL, dR) -> (dR ^ rotl(dL, r3), dL).

    Unlike the deterministic model this is a real transition of the cipher, so
    its one-round probability is never zero.
    """
    n, r3 = params.word_size, params.rotations[2]
    s = DiffState(int(s0[0]) & params.mask, int(s0[1]) & params.mask)
    for _ in range(rounds):
        s = DiffState(s.dR ^ rotl(s.dL, r3, n), s.dL)
    return s


def monte_carlo_dp(
    s0: DiffState,
    rounds: int,
    trials: int,
    seed: int,
    target: Optional[DiffState] = None,
    keyed: bool = True,
    params: SimonParams = SIMON32_64,
) -> MonteCarloEstimate:
    """Fraction of random plaintext pairs whose round-`rounds` difference equals `target`.

    `target` defaults to the deterministic model's prediction. Trial t draws its
    plaintext and key from a generator seeded with seed ^ t, so the estimate is
    independent of how trials are batched.
    """
    if trials < 1:
        raise ContractError(f"trials must be >= 1, got {trials}")
    if rounds < 1:
        raise ContractError(f"rounds must be >= 1, got {rounds}")
    n = params.word_size
    mask = params.mask
    dt = word_dtype(n)
    if target is None:
        target = paper_model_state(s0, rounds, n)
    draws = np.empty((trials, 2 + params.key_words), dtype=dt)
    for t in range(trials):
        rng = np.random.default_rng(int(seed) ^ t)
        draws[t] = rng.integers(0, 1 << n, size=2 + params.key_words, dtype=np.uint64).astype(dt)
    left, right = draws[:, 0], draws[:, 1]
    p0 = CipherState(left, right)
    p1 = CipherState(left ^ (int(s0[0]) & mask), right ^ (int(s0[1]) & mask))
    if keyed:
        keys = key_schedule([draws[:, 2 + i] for i in range(params.key_words)], params)
    else:
        keys = KeySchedule(tuple(np.zeros(trials, dtype=dt) for _ in range(params.rounds)))
    diff = iterate_pair(p0, p1, rounds, keys, params)[-1]
    hit = (diff.dL == (int(target[0]) & mask)) & (diff.dR == (int(target[1]) & mask))
    return MonteCarloEstimate(hits=int(np.count_nonzero(hit)), trials=int(trials), target=DiffState(int(target[0]), int(target[1])))
