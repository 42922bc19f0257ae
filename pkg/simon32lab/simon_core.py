# -*- coding: utf-8 -*-
"""Reference SIMON32/64 cipher and a keyed pair iterator for difference measurements.

All functions are pure. State words may be Python ints or numpy unsigned
arrays of equal shape, which lets the experiment layer push thousands of
plaintext pairs through the rounds in one call.
"""

from __future__ import annotations

# Import dataclass for structured parameter/value objects.
from dataclasses import dataclass, field

# Import typing primitives.
from typing import Any, List, NamedTuple, Sequence, Tuple

# Import local helpers.
from .bitops import rotl, rotr, word_mask
from .errors import ConfigError, ContractError

# Constant sequence z0 of the SIMON32/64 key schedule (62 bits, z0[0] is the MSB here).
Z0 = 0b11111010001001010110000111001101111101000100101011000011100110
Z0_PERIOD = 62


@dataclass(frozen=True)
class SimonParams:
    """Cipher parameters; only the SIMON32/64 defaults are validated against test vectors."""

    word_size: int = 16
    rounds: int = 32
    key_words: int = 4
    rotations: Tuple[int, int, int] = (1, 8, 2)
    z: int = field(default=Z0, repr=False)

    @property
    def mask(self) -> int:
        """Return the n-bit word mask."""
        return word_mask(self.word_size)


SIMON32_64 = SimonParams()


class CipherState(NamedTuple):
    """Feistel state (left, right), each masked to n bits."""

    left: Any
    right: Any


class DiffState(NamedTuple):
    """Round-state difference pair (dL, dR)."""

    dL: Any
    dR: Any


@dataclass(frozen=True)
class KeySchedule:
    """Expanded round keys (ints, or numpy arrays for batched keys)."""

    round_keys: Tuple[Any, ...]

    def __len__(self) -> int:
        return len(self.round_keys)


def round_function(x: Any, params: SimonParams = SIMON32_64) -> Any:
    """f(x) = (rotl(x, a) AND rotl(x, b)) XOR rotl(x, c)."""
    a, b, c = params.rotations
    n = params.word_size
    return (rotl(x, a, n) & rotl(x, b, n)) ^ rotl(x, c, n)


def simon_round(state: CipherState, k: Any, params: SimonParams = SIMON32_64) -> CipherState:
    """One encryption round: (right XOR f(left) XOR k, left)."""
    left, right = state
    return CipherState(right ^ round_function(left, params) ^ k, left)


def inverse_round(state: CipherState, k: Any, params: SimonParams = SIMON32_64) -> CipherState:
    """Undo simon_round with the same round key."""
    left, right = state
    return CipherState(right, left ^ round_function(right, params) ^ k)


def key_schedule(key: Sequence[Any], params: SimonParams = SIMON32_64) -> KeySchedule:
    """Expand key words (k0, k1, k2, k3 in schedule order) into `params.rounds` round keys.

    The official SIMON32/64 test key 0x1918 0x1110 0x0908 0x0100 is written
    most-significant word first, so its schedule order is (0x0100, 0x0908, 0x1110, 0x1918).
    """
    m = params.key_words
    if len(key) != m:
        raise ConfigError(f"SIMON{2 * params.word_size}/{m * params.word_size} needs {m} key words, got {len(key)}")
    n = params.word_size
    mask = params.mask
    # c = 2^n - 4 folds the NOT and the constant 3 of the reference schedule.
    const = mask ^ 3
    k: List[Any] = [kw & mask for kw in key]
    for i in range(m, params.rounds):
        tmp = rotr(k[i - 1], 3, n)
        if m == 4:
            tmp = tmp ^ k[i - 3]
        tmp = tmp ^ rotr(tmp, 1, n)
        z_bit = (params.z >> (Z0_PERIOD - 1 - ((i - m) % Z0_PERIOD))) & 1
        k.append(k[i - m] ^ tmp ^ z_bit ^ const)
    return KeySchedule(tuple(k[: params.rounds]))


def encrypt(plaintext: CipherState, keys: KeySchedule, rounds: int | None = None,
            params: SimonParams = SIMON32_64) -> CipherState:
    """Encrypt a (left, right) state with the first `rounds` round keys."""
    nr = len(keys) if rounds is None else int(rounds)
    if nr > len(keys):
        raise ContractError(f"{nr} rounds requested but the schedule holds {len(keys)} keys")
    state = CipherState(plaintext[0] & params.mask, plaintext[1] & params.mask)
    for r in range(nr):
        state = simon_round(state, keys.round_keys[r], params)
    return state


def decrypt(ciphertext: CipherState, keys: KeySchedule, rounds: int | None = None,
            params: SimonParams = SIMON32_64) -> CipherState:
    """Invert `encrypt` for the same schedule and round count."""
    nr = len(keys) if rounds is None else int(rounds)
    if nr > len(keys):
        raise ContractError(f"{nr} rounds requested but the schedule holds {len(keys)} keys")
    state = CipherState(ciphertext[0] & params.mask, ciphertext[1] & params.mask)
    for r in reversed(range(nr)):
        state = inverse_round(state, keys.round_keys[r], params)
    return state


def iterate_pair(p0: CipherState, p1: CipherState, rounds: int, keys: KeySchedule,
                 params: SimonParams = SIMON32_64, include_input: bool = False) -> List[DiffState]:
    """Encrypt both members round by round and record their XOR difference.

    Element r is the difference after r + 1 rounds; with `include_input` the
    injected difference is prepended as element 0.
    """
    if rounds > len(keys):
        raise ContractError(f"{rounds} rounds requested but the schedule holds {len(keys)} keys")
    mask = params.mask
    s0 = CipherState(p0[0] & mask, p0[1] & mask)
    s1 = CipherState(p1[0] & mask, p1[1] & mask)
    out: List[DiffState] = []
    if include_input:
        out.append(DiffState(s0.left ^ s1.left, s0.right ^ s1.right))
    for r in range(rounds):
        k = keys.round_keys[r]
        s0 = simon_round(s0, k, params)
        s1 = simon_round(s1, k, params)
        out.append(DiffState(s0.left ^ s1.left, s0.right ^ s1.right))
    return out


def zero_schedule(rounds: int, like: Any = 0) -> KeySchedule:
    """All-zero round keys (the unkeyed mode); `like` sets the array shape."""
    return KeySchedule(tuple(like & 0 for _ in range(rounds)))
