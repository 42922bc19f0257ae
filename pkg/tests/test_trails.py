# -*- coding: utf-8 -*-
import numpy as np
import pytest

from simon32lab.errors import ContractError
from simon32lab.pddt import DiffTriple, PartialDDT, compute_pddt, sort_differentials
from simon32lab.simon_core import DiffState
from simon32lab.trails import (
    LITERATURE_RESULTS,
    VERDICT_BOUNDARY,
    VERDICT_DISTINGUISHER,
    VERDICT_NONE,
    PromisingDiff,
    comparison_rows,
    distinguisher_check,
    extract_promising,
    generate_trail,
    state_cycle,
    trail_report,
)

REFERENCE = DiffTriple(0x8000, 0x8000, 0, 0)

# Best 20-round trail of (0x8000, 0x8000 -> 0): (dL, dR, weight) per row.
GOLDEN_ROWS = [
    (0xA000, 0x8000, 1), (0xA800, 0xA000, 1), (0x8A00, 0xA800, 2), (0x8A80, 0x8A00, 1),
    (0xA8A0, 0x8A80, 3), (0xA0A8, 0xA8A0, 2), (0x808A, 0xA0A8, 3), (0x008A, 0x808A, 1),
    (0x00A8, 0x008A, 2), (0x00A0, 0x00A8, 1), (0x0080, 0x00A0, 1), (0x0080, 0x0080, 0),
    (0x00A0, 0x0080, 1), (0x00A8, 0x00A0, 1), (0x008A, 0x00A8, 2), (0x808A, 0x008A, 1),
    (0xA0A8, 0x808A, 3), (0xA8A0, 0xA0A8, 2), (0x8A80, 0xA8A0, 3), (0x8A00, 0x8A80, 1),
]


def test_golden_trail_twenty_rounds():
    t = generate_trail(REFERENCE, 20)
    assert [(r.state.dL, r.state.dR, r.weight) for r in t.rows] == GOLDEN_ROWS
    assert [r.round for r in t.rows] == list(range(20))
    assert t.total_weight == 32
    assert t.log2p == -32


def test_ten_round_anchor():
    assert generate_trail(REFERENCE, 10).total_weight == 17


def test_trail_column_relation():
    t = generate_trail(DiffTriple(0x1234, 0x4321, 0, 0), 25)
    for prev, cur in zip(t.rows, t.rows[1:]):
        assert cur.state.dR == prev.state.dL
    assert t.total_weight == sum(r.weight for r in t.rows)


def test_zero_trail():
    t = generate_trail(DiffTriple(0, 0, 0, 0), 7)
    assert t.total_weight == 0
    assert all(r.state == DiffState(0, 0) for r in t.rows)


def test_trail_is_pure_and_accepts_states():
    assert generate_trail(REFERENCE, 12) == generate_trail(DiffState(0x8000, 0x8000), 12)
    with pytest.raises(ContractError):
        generate_trail(REFERENCE, 0)


def test_repeated_state():
    assert generate_trail(DiffTriple(0, 0, 0, 0), 3).repeated_state() == (0, 1)
    assert generate_trail(REFERENCE, 5).repeated_state() is None


def test_state_cycle_is_consistent():
    start, period = state_cycle(DiffState(0x8000, 0x8000))
    assert period >= 1
    t = generate_trail(REFERENCE, start + 2 * period)
    states = [DiffState(0x8000, 0x8000)] + [r.state for r in t.rows]
    assert states[start] == states[start + period]
    assert len(set(states[:start + period])) == start + period


def test_state_cycle_budget():
    assert state_cycle(DiffState(0x8000, 0x8000), max_steps=1) is None
    assert state_cycle(DiffState(0, 0)) == (0, 1)


def test_distinguisher_check():
    assert distinguisher_check(31) == VERDICT_DISTINGUISHER
    assert distinguisher_check(32) == VERDICT_BOUNDARY
    assert distinguisher_check(33) == VERDICT_NONE
    assert distinguisher_check(generate_trail(REFERENCE, 20)) == VERDICT_BOUNDARY


def test_trail_report_ranking():
    diffs = [PromisingDiff(DiffTriple(0x1234, 0x4321, 0, 1), 0), PromisingDiff(REFERENCE, 0), PromisingDiff(DiffTriple(0, 0, 0, 0), 0)]
    ranked = trail_report(diffs, 20)
    assert [r.rank for r in ranked] == [1, 2, 3]
    weights = [r.trail.total_weight for r in ranked]
    assert weights == sorted(weights)
    assert sorted(r.diff.triple.key() for r in ranked) == sorted(d.triple.key() for d in diffs)
    assert ranked[0].diff.triple == DiffTriple(0, 0, 0, 0)
    assert trail_report([diffs[1]], 20)[0].trail.total_weight == 32


def test_trail_report_breaks_ties_canonically():
    a = PromisingDiff(DiffTriple(0x8000, 0x8000, 0, 0), 0)
    b = PromisingDiff(DiffTriple(0x0001, 0x0001, 0, 0), 0)
    ranked = trail_report([a, b], 20)
    assert ranked[0].trail.total_weight == ranked[1].trail.total_weight
    assert ranked[0].diff is b


def _significant_n16():
    return sort_differentials(compute_pddt(16, 0.5), 0.5).significant


def test_extract_keeps_trivial_at_zero_threshold():
    sig = _significant_n16()
    out = extract_promising(sig, hw_threshold=0, selection="exact")
    assert [p.triple for p in out] == [DiffTriple(0, 0, 0, 0)]


def test_extract_is_monotone_in_threshold():
    sig = _significant_n16()
    sizes = [len(extract_promising(sig, hw_threshold=h, selection="exact")) for h in (0, 17, 30, 60)]
    assert sizes == sorted(sizes)


def test_extract_near_zero_shape():
    sig = _significant_n16()
    out = extract_promising(sig, hw_threshold=0, selection="near_zero", exclude_trivial=True)
    assert out
    assert len({p.observed_hw for p in out}) == 1
    # The reference differential reaches 17 over ten rounds, so the floor is at most that.
    assert out[0].observed_hw <= 17


def test_extract_sorted_by_hw_then_canonical():
    sig = _significant_n16()
    out = extract_promising(sig, hw_threshold=5, selection="near_zero", exclude_trivial=True)
    keys = [(p.observed_hw, p.triple.key()) for p in out]
    assert keys == sorted(keys)


def test_extract_rejects_bad_arguments():
    with pytest.raises(ContractError):
        extract_promising(PartialDDT.empty(16, 1))
    sig = _significant_n16()
    with pytest.raises(ContractError):
        extract_promising(sig, selection="best")
    with pytest.raises(ContractError):
        extract_promising(sig, hw_threshold=-1)


def test_extract_with_precomputed_hw():
    sig = PartialDDT.from_triples([DiffTriple(1, 1, 0, 1), DiffTriple(2, 2, 0, 1)], max_weight=1)
    out = extract_promising(sig, hw_threshold=3, selection="exact", hw=np.array([[5, 2], [4, 9]]))
    assert [(p.triple.a, p.observed_hw) for p in out] == [(1, 2)]


def test_extract_zero_output_default_selection():
    sig = _significant_n16()
    out = extract_promising(sig, exclude_trivial=True)
    triples = [p.triple for p in out]
    assert len(triples) == 33
    assert all(t.c == 0 for t in triples)
    assert DiffTriple(0, 0, 0, 0) not in triples
    assert REFERENCE in triples
    ranked = trail_report(out, 20)
    assert ranked[0].trail.total_weight == 32
    assert ranked[0].verdict == VERDICT_BOUNDARY
    assert {r.diff.triple.key() for r in ranked if r.trail.total_weight == 32} >= {(1, 1, 0), (0x8000, 0x8000, 0)}


def test_extract_zero_output_threshold_admits_low_weight_outputs():
    sig = PartialDDT.from_triples([DiffTriple(1, 1, 0, 1), DiffTriple(1, 0, 1, 1), DiffTriple(3, 0, 3, 1)], max_weight=1)
    hw = np.zeros((3, 1), dtype=np.int64)
    assert [p.triple.c for p in extract_promising(sig, hw=hw)] == [0]
    assert [p.triple.c for p in extract_promising(sig, hw_threshold=1, hw=hw)] == [1, 0]


def test_comparison_rows():
    rows = comparison_rows([generate_trail(REFERENCE, 20)])
    assert len(rows) == len(LITERATURE_RESULTS) + 1
    assert rows[-1][:3] == ("SIMON32", 20, "2^-32.0")
