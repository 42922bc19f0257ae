# -*- coding: utf-8 -*-
import numpy as np
import pytest

from simon32lab.bitops import hw, hw_array, rotl, rotr
from simon32lab.errors import ConfigError, ContractError
from simon32lab.simon_core import (
    SIMON32_64,
    CipherState,
    DiffState,
    decrypt,
    encrypt,
    iterate_pair,
    key_schedule,
    zero_schedule,
)

TEST_KEY = (0x0100, 0x0908, 0x1110, 0x1918)


def test_rotations():
    assert rotl(0x8000, 1) == 0x0001
    assert rotl(0x1234, 0) == 0x1234
    assert rotl(0xA000, 14) == 0x2800
    assert rotr(0xA000, 2) == 0x2800
    with pytest.raises(ContractError):
        rotl(1, 16)
    with pytest.raises(ContractError):
        rotr(1, -1)


def test_rotations_on_arrays():
    x = np.array([0x8000, 0x0001, 0xA000], dtype=np.uint32)
    assert list(rotl(x, 1)) == [0x0001, 0x0002, 0x4001]


def test_hamming_weight():
    assert hw(0) == 0
    assert hw(0xFFFF) == 16
    assert list(hw_array(np.array([0, 1, 0xA0A8, 0xFFFF], dtype=np.uint32))) == [0, 1, 5, 16]


def test_official_test_vector():
    keys = key_schedule(TEST_KEY)
    assert len(keys) == 32
    assert encrypt(CipherState(0x6565, 0x6877), keys) == (0xC69B, 0xE9BB)


def test_key_schedule_keeps_key_words():
    keys = key_schedule(TEST_KEY)
    assert keys.round_keys[:4] == TEST_KEY
    assert all(0 <= k <= 0xFFFF for k in keys.round_keys)


def test_wrong_key_length():
    with pytest.raises(ConfigError):
        key_schedule((1, 2, 3))


def test_decrypt_inverts_encrypt_batched():
    rng = np.random.default_rng(7)
    words = rng.integers(0, 1 << 16, size=(6, 10_000), dtype=np.uint64).astype(np.uint32)
    keys = key_schedule([words[2], words[3], words[4], words[5]])
    pt = CipherState(words[0], words[1])
    ct = encrypt(pt, keys)
    back = decrypt(ct, keys)
    assert np.array_equal(back.left, pt.left)
    assert np.array_equal(back.right, pt.right)


def test_batched_matches_scalar():
    rng = np.random.default_rng(11)
    words = rng.integers(0, 1 << 16, size=(6, 8), dtype=np.uint64).astype(np.uint32)
    keys = key_schedule([words[2], words[3], words[4], words[5]])
    ct = encrypt(CipherState(words[0], words[1]), keys)
    for i in range(8):
        ks = key_schedule([int(words[j, i]) for j in range(2, 6)])
        assert encrypt(CipherState(int(words[0, i]), int(words[1, i])), ks) == (int(ct.left[i]), int(ct.right[i]))


def test_too_many_rounds():
    keys = key_schedule(TEST_KEY)
    with pytest.raises(ContractError):
        encrypt(CipherState(0, 0), keys, rounds=33)


def test_iterate_pair_includes_input():
    keys = key_schedule(TEST_KEY)
    diffs = iterate_pair(CipherState(0x1234, 0x5678), CipherState(0x1234 ^ 0x8000, 0x5678 ^ 0x8000), 5, keys, include_input=True)
    assert len(diffs) == 6
    assert diffs[0] == DiffState(0x8000, 0x8000)
    # Feistel structure: the new right difference is the previous left difference.
    for prev, cur in zip(diffs, diffs[1:]):
        assert cur.dR == prev.dL


def test_zero_difference_stays_zero():
    keys = zero_schedule(10)
    diffs = iterate_pair(CipherState(0xAAAA, 0x5555), CipherState(0xAAAA, 0x5555), 10, keys)
    assert all(d == DiffState(0, 0) for d in diffs)


def test_default_params():
    assert SIMON32_64.rotations == (1, 8, 2)
    assert SIMON32_64.mask == 0xFFFF
