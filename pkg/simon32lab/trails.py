# -*- coding: utf-8 -*-
"""Promising-differential extraction, deterministic trails and distinguisher scoring.

Trail rows are the states after rounds 1..R of the deterministic round model,
labelled 0..R-1: the raw input state (a, b) is not a row. A row's weight is
hw(dL ^ dR) of that row and the trail weight is their integer sum; floats
appear only when a weight is printed as a probability.
"""

from __future__ import annotations

# Import dataclass for structured results.
from dataclasses import dataclass

# Import typing primitives.
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

# Import stdlib helpers.
import logging

# Import numpy.
import numpy as np

# Import local helpers.
from .bitops import hw, hw_array
from .diff_models import paper_round_propagate
from .errors import ContractError
from .experiments import hw_batch
from .pddt import DiffTriple, PartialDDT
from .shared_memory import SharedMemoryConfig
from .simon_core import SIMON32_64, DiffState, SimonParams

logger = logging.getLogger("simon32lab")

SELECTION_MODES = ("zero_output", "exact", "near_zero")

VERDICT_DISTINGUISHER = "distinguisher"
VERDICT_BOUNDARY = "boundary"
VERDICT_NONE = "none"

# Prior SIMON32 distinguishers: (rounds, log2 probability, year, approach).
LITERATURE_RESULTS: Tuple[Tuple[int, float, int, str], ...] = (
    (13, -29.69, 2009, "nested Monte-Carlo search"),
    (13, -30.2, 2015, "round-reduced differential cryptanalysis"),
    (14, -30.81, 2015, "structural observations on the SIMON family"),
    (11, -30.0, 2017, "optimal differential trail search"),
    (15, -32.0, 2023, "security evaluation of lightweight ciphers"),
    (9, -30.82, 2024, "bit-level differential search"),
    (17, -68.83, 2024, "bit-level differential search"),
    (15, -32.0, 2024, "lightweight cipher differential study"),
)


class TrailRow(NamedTuple):
    round: int
    state: DiffState
    weight: int


@dataclass(frozen=True)
class Trail:
    """Ordered trail rows; dR of row r+1 equals dL of row r."""

    start: DiffState
    rows: Tuple[TrailRow, ...]

    @property
    def total_weight(self) -> int:
        return sum(r.weight for r in self.rows)

    @property
    def rounds(self) -> int:
        return len(self.rows)

    @property
    def log2p(self) -> int:
        return -self.total_weight

    def repeated_state(self) -> Optional[Tuple[int, int]]:
        """(first row, repeating row) of the first state seen twice among the rows."""
        seen: Dict[DiffState, int] = {}
        for row in self.rows:
            if row.state in seen:
                return seen[row.state], row.round
            seen[row.state] = row.round
        return None


@dataclass(frozen=True)
class PromisingDiff:
    triple: DiffTriple
    observed_hw: int


@dataclass(frozen=True)
class RankedTrail:
    rank: int
    diff: PromisingDiff
    trail: Trail
    verdict: str
    cycle: Optional[Tuple[int, int]]


def extract_promising(
    sig: PartialDDT,
    hw_threshold: int = 0,
    rounds: int = 10,
    mode: str = "paper",
    seed: int = 0,
    trials: int = 1,
    selection: str = "zero_output",
    exclude_trivial: bool = False,
    params: SimonParams = SIMON32_64,
    shm_cfg: SharedMemoryConfig | None = None,
    hw: Optional[np.ndarray] = None,
) -> List[PromisingDiff]:
    """Significant differentials with a zero (or near-zero) output or propagation weight.

    ``zero_output`` keeps entries whose output difference c has
    hw(c) <= hw_threshold. The other rules look at the observed propagation
    hw, i.e. the best (lowest) trial: ``exact`` keeps hw <= hw_threshold and
    ``near_zero`` keeps hw within hw_threshold of the lowest hw of any
    non-trivial member. The result is ordered by observed hw, then canonically.
    """
    if len(sig) == 0:
        raise ContractError("extraction needs a non-empty significant set")
    if selection not in SELECTION_MODES:
        raise ContractError(f"selection must be one of {SELECTION_MODES}, got {selection!r}")
    if hw_threshold < 0:
        raise ContractError(f"hw_threshold must be >= 0, got {hw_threshold}")
    if hw is None:
        hw = hw_batch(sig, trials, rounds, mode, seed, stream=2, params=params, shm_cfg=shm_cfg)
    observed = hw.min(axis=1)
    trivial = (sig.a == 0) & (sig.b == 0) & (sig.c == 0)
    if selection == "zero_output":
        keep = hw_array(sig.c) <= hw_threshold
    elif selection == "exact":
        keep = observed <= hw_threshold
    else:
        nontrivial = observed[~trivial]
        floor = int(nontrivial.min()) if nontrivial.size else 0
        logger.info("Lowest non-trivial hw is %d; keeping hw <= %d", floor, floor + hw_threshold)
        keep = observed <= floor + hw_threshold
    if exclude_trivial:
        keep &= ~trivial
    idx = np.flatnonzero(keep)
    # Stable sort on hw keeps the canonical order among ties.
    idx = idx[np.argsort(observed[idx], kind="stable")]
    return [PromisingDiff(sig[int(i)], int(observed[i])) for i in idx]


def generate_trail(d: Union[DiffTriple, DiffState, Tuple[int, int]], rounds: int, n: int = 16) -> Trail:
    """Iterate the deterministic round model from (a, b) and record states 1..rounds."""
    if rounds < 1:
        raise ContractError(f"rounds must be >= 1, got {rounds}")
    if isinstance(d, DiffTriple):
        start = DiffState(d.a, d.b)
    else:
        start = DiffState(int(d[0]), int(d[1]))
    state = start
    rows: List[TrailRow] = []
    for r in range(rounds):
        state, _ = paper_round_propagate(state, n)
        rows.append(TrailRow(r, state, hw(state.dL ^ state.dR)))
    return Trail(start=start, rows=tuple(rows))


def state_cycle(state: DiffState, max_steps: int = 1 << 16, n: int = 16) -> Optional[Tuple[int, int]]:
    """(first step of the cycle, cycle length) of the model orbit from `state`, step 0 being `state` itself.

    Returns None when no state repeats within `max_steps` steps.
    """
    seen: Dict[DiffState, int] = {}
    s = DiffState(int(state[0]), int(state[1]))
    for step in range(max_steps + 1):
        if s in seen:
            return seen[s], step - seen[s]
        seen[s] = step
        s, _ = paper_round_propagate(s, n)
    return None


def distinguisher_check(t: Union[Trail, int], block_bits: int = 32) -> str:
    """Compare the trail weight with the block size: below is a distinguisher, equal is the boundary."""
    w = t.total_weight if isinstance(t, Trail) else int(t)
    if w < block_bits:
        return VERDICT_DISTINGUISHER
    if w == block_bits:
        return VERDICT_BOUNDARY
    return VERDICT_NONE


def trail_report(
    diffs: Sequence[PromisingDiff],
    rounds: int = 20,
    block_bits: int = 32,
    n: int = 16,
    cycle_max_steps: int = 1 << 16,
) -> List[RankedTrail]:
    """Trails for every promising differential, ranked by weight then canonical triple order."""
    built = [(d, generate_trail(d.triple, rounds, n)) for d in diffs]
    built.sort(key=lambda item: (item[1].total_weight, item[0].triple.key()))
    out: List[RankedTrail] = []
    for rank, (d, trail) in enumerate(built, start=1):
        out.append(
            RankedTrail(
                rank=rank,
                diff=d,
                trail=trail,
                verdict=distinguisher_check(trail, block_bits),
                cycle=state_cycle(trail.start, cycle_max_steps, n),
            )
        )
    return out


def comparison_rows(computed: Sequence[Trail], cipher: str = "SIMON32") -> List[Tuple[str, int, str, str, str]]:
    """Prior results followed by the computed trails, formatted for the comparison table."""
    rows = [(cipher, r, f"2^{p}", str(y), ref) for r, p, y, ref in LITERATURE_RESULTS]
    for t in computed:
        rows.append((cipher, t.rounds, f"2^-{t.total_weight}.0", "", "this workbench"))
    return rows
