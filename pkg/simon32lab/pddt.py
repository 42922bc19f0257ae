# -*- coding: utf-8 -*-
"""Threshold-pruned partial DDT of modular addition.

Construction extends (a, b, c) prefixes one bit at a time from the LSB and
drops a prefix as soon as its weight exceeds the admissible maximum; prefix
probabilities never increase with extra bits, so no dropped prefix can have a
descendant in the table. Each level is expanded as a whole numpy batch.

Tables are numpy structured arrays in canonical (a, b, c) order; the binary
file layout is:

    magic "PDDT1" | u8 word size | u8 max weight | u64 LE count | count x (u16 a, u16 b, u16 c, u8 weight)
"""

from __future__ import annotations

# Import dataclass for structured value objects.
from dataclasses import dataclass
from fractions import Fraction

# Import typing primitives.
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

# Import stdlib helpers.
import json
import logging
import math
import struct
from pathlib import Path

# Import numpy.
import numpy as np

# Import local helpers.
from .bitops import hw_array, word_mask
from .diff_models import DyadicProb, xdp_add_weights
from .errors import (
    BadMagicError,
    ContractError,
    PddtFormatError,
    TruncatedFileError,
    UnsortedPayloadError,
    VersionMismatchError,
)
from .mpi_utils import gather_records_to_rank0, local_items
from .schema import (
    EXACT_PDDT_COUNT,
    PDDT_FORMAT_VERSION,
    PDDT_HEADER_FORMAT,
    PDDT_MAGIC,
    PDDT_MAGIC_PREFIX,
    PDDT_MAX_WORD_SIZE,
    PDDT_NO_WEIGHT,
    PUBLISHED_PDDT_COUNT,
    REFERENCE_PDDT_THRESHOLD,
    REFERENCE_PDDT_WORD_SIZE,
    SIDECAR_SUFFIX,
)
from .shared_memory import SharedMemoryConfig, map_ordered

logger = logging.getLogger("simon32lab")

# One table entry on disk and in memory (7 bytes, packed, little-endian).
PDDT_DTYPE = np.dtype([("a", "<u2"), ("b", "<u2"), ("c", "<u2"), ("w", "u1")])

COMPARE_MODES = ("ge", "gt")


@dataclass(frozen=True)
class DiffTriple:
    """A differential (a, b -> c) with probability 2^-weight."""

    a: int
    b: int
    c: int
    weight: int

    @property
    def prob(self) -> DyadicProb:
        return DyadicProb(self.weight)

    @property
    def log2p(self) -> int:
        return -self.weight

    def key(self) -> Tuple[int, int, int]:
        """Canonical ordering key."""
        return (self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"(0x{self.a:04x}, 0x{self.b:04x} -> 0x{self.c:04x}) p=2^-{self.weight}"


def max_weight(p_thr: float, n: int = 16, compare: str = "ge") -> Optional[int]:
    """Largest weight w < n with 2^-w >= p_thr (or > for compare='gt'); None when no weight qualifies.

    The threshold is read as the decimal the user wrote, so 0.1 means exactly 1/10.
    """
    if compare not in COMPARE_MODES:
        raise ContractError(f"compare must be one of {COMPARE_MODES}, got {compare!r}")
    p = Fraction(str(p_thr))
    if p <= 0:
        raise ContractError("threshold must be > 0; a zero threshold admits all 2^(3n) triples")
    best: Optional[int] = None
    for w in range(n):
        q = Fraction(1, 1 << w)
        if q > p or (compare == "ge" and q == p):
            best = w
        else:
            break
    return best


class PartialDDT:
    """Sorted, duplicate-free partial DDT held as a structured numpy array."""

    def __init__(
        self,
        entries: np.ndarray,
        word_size: int,
        max_weight: Optional[int],
        threshold: Optional[float] = None,
        compare: str = "ge",
    ) -> None:
        if word_size > PDDT_MAX_WORD_SIZE or word_size < 1:
            raise ContractError(f"tables hold words of 1..{PDDT_MAX_WORD_SIZE} bits, got {word_size}")
        self.entries = np.ascontiguousarray(entries, dtype=PDDT_DTYPE)
        self.word_size = int(word_size)
        self.max_weight = max_weight
        # Informational; equality is decided on the stored max weight.
        self.threshold = threshold if threshold is not None else (
            None if max_weight is None else math.ldexp(1.0, -max_weight)
        )
        self.compare = compare

    # Construction -----------------------------------------------------------

    @classmethod
    def empty(cls, word_size: int = 16, max_weight: Optional[int] = None, **kw: Any) -> "PartialDDT":
        return cls(np.zeros(0, dtype=PDDT_DTYPE), word_size, max_weight, **kw)

    @classmethod
    def from_arrays(cls, a: Any, b: Any, c: Any, w: Any, word_size: int, max_weight: Optional[int], **kw: Any) -> "PartialDDT":
        """Build from parallel arrays; sorts into canonical order and drops duplicates."""
        entries = np.zeros(np.size(a), dtype=PDDT_DTYPE)
        entries["a"], entries["b"], entries["c"], entries["w"] = a, b, c, w
        order = np.lexsort((entries["c"], entries["b"], entries["a"]))
        entries = entries[order]
        if entries.size > 1:
            k = canonical_keys(entries)
            entries = entries[np.concatenate(([True], np.diff(k) != 0))]
        return cls(entries, word_size, max_weight, **kw)

    @classmethod
    def from_triples(cls, triples: Iterable[DiffTriple], word_size: int = 16, max_weight: Optional[int] = None, **kw: Any) -> "PartialDDT":
        rows = [(t.a, t.b, t.c, t.weight) for t in triples]
        if not rows:
            return cls.empty(word_size, max_weight, **kw)
        arr = np.array(rows, dtype=np.int64)
        return cls.from_arrays(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], word_size, max_weight, **kw)

    def subset(self, index: Any) -> "PartialDDT":
        """Entries selected by a boolean mask or sorted index array (order preserved)."""
        return PartialDDT(self.entries[index], self.word_size, self.max_weight, self.threshold, self.compare)

    # Access -----------------------------------------------------------------

    def __len__(self) -> int:
        return int(self.entries.size)

    def __iter__(self) -> Iterator[DiffTriple]:
        for row in self.entries:
            yield DiffTriple(int(row["a"]), int(row["b"]), int(row["c"]), int(row["w"]))

    def __getitem__(self, i: int) -> DiffTriple:
        row = self.entries[i]
        return DiffTriple(int(row["a"]), int(row["b"]), int(row["c"]), int(row["w"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartialDDT):
            return NotImplemented
        return (
            self.word_size == other.word_size
            and self.max_weight == other.max_weight
            and self.entries.tobytes() == other.entries.tobytes()
        )

    def __repr__(self) -> str:
        return f"PartialDDT(n={self.word_size}, max_weight={self.max_weight}, entries={len(self)})"

    @property
    def a(self) -> np.ndarray:
        return self.entries["a"]

    @property
    def b(self) -> np.ndarray:
        return self.entries["b"]

    @property
    def c(self) -> np.ndarray:
        return self.entries["c"]

    @property
    def weights(self) -> np.ndarray:
        return self.entries["w"]

    def triples(self) -> List[DiffTriple]:
        return list(self)

    def is_canonical(self) -> bool:
        """True when entries are strictly increasing in (a, b, c)."""
        if self.entries.size < 2:
            return True
        return bool(np.all(np.diff(canonical_keys(self.entries)) > 0))


@dataclass(frozen=True)
class SortedDiffs:
    """Partition of a table into significant and non-significant entries."""

    significant: PartialDDT
    non_significant: PartialDDT
    sig_threshold: float


def canonical_keys(entries: np.ndarray) -> np.ndarray:
    """Single uint64 key per entry that orders like (a, b, c)."""
    return (
        (entries["a"].astype(np.uint64) << np.uint64(32))
        | (entries["b"].astype(np.uint64) << np.uint64(16))
        | entries["c"].astype(np.uint64)
    )


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

# The eight (x, y, z) bit assignments of one recursion step.
_BIT_CHOICES = np.array([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=np.uint32)


def _expand_branch(branch: Tuple[int, int, int], n: int, w_max: int) -> np.ndarray:
    """All admissible n-bit triples whose bit 0 is `branch`, as a PDDT_DTYPE array (unsorted)."""
    a = np.array([branch[0]], dtype=np.uint32)
    b = np.array([branch[1]], dtype=np.uint32)
    c = np.array([branch[2]], dtype=np.uint32)
    w = xdp_add_weights(a, b, c, 1)
    keep = (w >= 0) & (w <= w_max)
    a, b, c, w = a[keep], b[keep], c[keep], w[keep]
    for k in range(1, n):
        if a.size == 0:
            break
        bx = _BIT_CHOICES[:, 0] << k
        by = _BIT_CHOICES[:, 1] << k
        bz = _BIT_CHOICES[:, 2] << k
        na = (a[:, None] | bx[None, :]).ravel()
        nb = (b[:, None] | by[None, :]).ravel()
        nc = (c[:, None] | bz[None, :]).ravel()
        nw = xdp_add_weights(na, nb, nc, k + 1)
        keep = (nw >= 0) & (nw <= w_max)
        a, b, c, w = na[keep], nb[keep], nc[keep], nw[keep]
    out = np.zeros(a.size, dtype=PDDT_DTYPE)
    out["a"], out["b"], out["c"], out["w"] = a, b, c, w
    return out


def compute_pddt(
    n: int = 16,
    p_thr: float = 0.1,
    compare: str = "ge",
    shm_cfg: SharedMemoryConfig | None = None,
    comm: Any = None,
) -> PartialDDT:
    """Build {(a, b, c) : xdp_add(a, b, c, n) >= p_thr} in canonical order.

    Work fans out over the first-level (bit 0) branches: across MPI ranks when
    `comm` is given, then across threads. The merged result is sorted, so the
    table does not depend on how the branches were scheduled. With MPI only
    rank 0 receives the table; other ranks get an empty one.
    """
    if n < 1 or n > PDDT_MAX_WORD_SIZE:
        raise ContractError(f"word size must be in 1..{PDDT_MAX_WORD_SIZE}, got {n}")
    w_max = max_weight(p_thr, n, compare)
    if w_max is None:
        logger.info("No weight satisfies p %s %s; table is empty", ">=" if compare == "ge" else ">", p_thr)
        return PartialDDT.empty(n, None, threshold=float(p_thr), compare=compare)

    branches = [tuple(int(v) for v in row) for row in _BIT_CHOICES]
    rank, size = (0, 1) if comm is None else (comm.Get_rank(), comm.Get_size())
    mine = local_items(branches, rank, size)
    logger.debug("rank %d expands %d of %d first-level branches (n=%d, w_max=%d)", rank, len(mine), len(branches), n, w_max)
    parts = map_ordered(lambda br: _expand_branch(br, n, w_max), mine, shm_cfg, n_items=1 << (3 * n))
    local = np.concatenate(parts) if parts else np.zeros(0, dtype=PDDT_DTYPE)
    merged = gather_records_to_rank0(comm, local) if comm is not None else local
    if merged is None:
        return PartialDDT.empty(n, w_max, threshold=float(p_thr), compare=compare)
    merged = merged[np.lexsort((merged["c"], merged["b"], merged["a"]))]
    return PartialDDT(merged, n, w_max, threshold=float(p_thr), compare=compare)


def enumerate_pddt(n: int, p_thr: float, compare: str = "ge") -> PartialDDT:
    """Reference table: test every one of the 2^(3n) triples with the closed form (n <= 10)."""
    if n > 10:
        raise ContractError(f"exhaustive enumeration at n={n} is too large; limit is n=10")
    w_max = max_weight(p_thr, n, compare)
    if w_max is None:
        return PartialDDT.empty(n, None, threshold=float(p_thr), compare=compare)
    size = 1 << n
    bb, cc = np.meshgrid(np.arange(size, dtype=np.uint32), np.arange(size, dtype=np.uint32), indexing="ij")
    bb, cc = bb.ravel(), cc.ravel()
    parts: List[np.ndarray] = []
    for a in range(size):
        aa = np.full(bb.shape, a, dtype=np.uint32)
        w = xdp_add_weights(aa, bb, cc, n)
        keep = (w >= 0) & (w <= w_max)
        part = np.zeros(int(np.count_nonzero(keep)), dtype=PDDT_DTYPE)
        part["a"], part["b"], part["c"], part["w"] = a, bb[keep], cc[keep], w[keep]
        parts.append(part)
    # Row-major (a, b, c) loops already produce canonical order.
    return PartialDDT(np.concatenate(parts), n, w_max, threshold=float(p_thr), compare=compare)


def check_reference_count(t: PartialDDT) -> Optional[bool]:
    """Compare a default-configuration build against the known entry counts.

    Returns None when the table was not built at the reference settings, True
    when it holds the closed-form count and False otherwise. The published
    count is out of reach in either boundary mode: both give the same weight
    bound at p=0.1, so a mismatch with it is reported rather than patched.
    """
    if t.word_size != REFERENCE_PDDT_WORD_SIZE or t.threshold != REFERENCE_PDDT_THRESHOLD:
        return None
    bounds = {mode: max_weight(t.threshold, t.word_size, mode) for mode in ("ge", "gt")}
    if len(t) == EXACT_PDDT_COUNT:
        logger.info(
            "pDDT count %d matches the closed-form count; the published %d is not reproducible "
            "(max weight ge=%s gt=%s, boundary mode %r)",
            len(t), PUBLISHED_PDDT_COUNT, bounds["ge"], bounds["gt"], t.compare,
        )
        return True
    logger.warning(
        "pDDT count %d differs from the closed-form count %d (published %d, boundary mode %r, max weight %s)",
        len(t), EXACT_PDDT_COUNT, PUBLISHED_PDDT_COUNT, t.compare, t.max_weight,
    )
    return False


# ---------------------------------------------------------------------------
# Sorting and sampling
# ---------------------------------------------------------------------------


def sort_differentials(t: PartialDDT, sig_thr: float = 0.5, compare: str = "ge") -> SortedDiffs:
    """Split `t` into entries with probability >= sig_thr and the rest, keeping order."""
    w_sig = max_weight(sig_thr, t.word_size, compare)
    if w_sig is None:
        sig_mask = np.zeros(len(t), dtype=bool)
    else:
        sig_mask = t.weights <= w_sig
    return SortedDiffs(significant=t.subset(sig_mask), non_significant=t.subset(~sig_mask), sig_threshold=float(sig_thr))


def stratum_hw_c(entries: np.ndarray) -> np.ndarray:
    """Hamming weight of the output difference."""
    return hw_array(entries["c"].astype(np.uint32))


def stratum_weight(entries: np.ndarray) -> np.ndarray:
    """Stored probability weight."""
    return entries["w"].astype(np.int32)


def stratum_hw_input(entries: np.ndarray) -> np.ndarray:
    """Hamming weight of a | b."""
    return hw_array((entries["a"] | entries["b"]).astype(np.uint32))


STRATA: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "hw_c": stratum_hw_c,
    "weight": stratum_weight,
    "hw_input": stratum_hw_input,
}


def quota_count(x: float, n_h: int) -> int:
    """max(1, ceil(x/100 * N_h)) in exact arithmetic."""
    return max(1, math.ceil(Fraction(str(x)) * n_h / 100))


def quota_sample(
    pop: PartialDDT,
    x: float = 10,
    strata_of: Union[str, Callable[[np.ndarray], np.ndarray], None] = None,
    seed: int = 0,
) -> PartialDDT:
    """Stratified sample taking max(1, ceil(x% of N_h)) entries of every stratum h.

    Strata are visited in ascending order and drawn without replacement from a
    single seeded generator; the sample keeps the population's canonical order.
    """
    if not 0 < x <= 100:
        raise ContractError(f"sample percent must be in (0, 100], got {x}")
    if len(pop) == 0:
        return pop.subset(np.zeros(0, dtype=np.int64))
    if strata_of is None:
        strata_of = stratum_hw_c
    elif isinstance(strata_of, str):
        if strata_of not in STRATA:
            raise ContractError(f"unknown stratum function {strata_of!r}; choose from {sorted(STRATA)}")
        strata_of = STRATA[strata_of]
    strata = np.asarray(strata_of(pop.entries))
    rng = np.random.default_rng(seed)
    picked: List[np.ndarray] = []
    for h in np.unique(strata):
        idx = np.flatnonzero(strata == h)
        k = quota_count(x, idx.size)
        picked.append(rng.choice(idx, size=k, replace=False))
    return pop.subset(np.sort(np.concatenate(picked)))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_pddt(t: PartialDDT, path: Union[str, Path]) -> Path:
    """Write `t` in the binary pDDT format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    w_byte = PDDT_NO_WEIGHT if t.max_weight is None else int(t.max_weight)
    header = struct.pack(PDDT_HEADER_FORMAT, PDDT_MAGIC, t.word_size, w_byte, len(t))
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(t.entries.astype(PDDT_DTYPE, copy=False).tobytes())
    return path


def _sidecar_settings(path: Path) -> Tuple[Optional[float], str]:
    """Threshold and boundary mode recorded in `<path>.meta.json`, if present.

    The binary header keeps only the weight bound, so the decimal threshold
    lives in the sidecar.
    """
    sidecar = path.with_name(path.name + SIDECAR_SUFFIX)
    if not sidecar.is_file():
        return None, "ge"
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        logger.warning("Ignoring unreadable sidecar %s: %s", sidecar, exc)
        return None, "ge"
    threshold = meta.get("threshold")
    compare = meta.get("compare", "ge")
    threshold = float(threshold) if isinstance(threshold, (int, float)) and not isinstance(threshold, bool) else None
    return threshold, compare if compare in ("ge", "gt") else "ge"


def load_pddt(path: Union[str, Path]) -> PartialDDT:
    """Read a binary pDDT file, validating header, length and ordering.

    Threshold and boundary mode come from the metadata sidecar when one exists.
    """
    data = Path(path).read_bytes()
    hsize = struct.calcsize(PDDT_HEADER_FORMAT)
    if len(data) < len(PDDT_MAGIC):
        raise TruncatedFileError(f"{path}: {len(data)} bytes is shorter than the magic")
    if data[: len(PDDT_MAGIC_PREFIX)] != PDDT_MAGIC_PREFIX:
        raise BadMagicError(f"{path}: not a pDDT file (magic {data[:5]!r})")
    if data[len(PDDT_MAGIC_PREFIX) : len(PDDT_MAGIC)] != PDDT_FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: format version {data[4:5]!r}, expected {PDDT_FORMAT_VERSION!r}")
    if len(data) < hsize:
        raise TruncatedFileError(f"{path}: header needs {hsize} bytes, file has {len(data)}")
    _magic, n, w_byte, count = struct.unpack(PDDT_HEADER_FORMAT, data[:hsize])
    if not 1 <= n <= PDDT_MAX_WORD_SIZE:
        raise PddtFormatError(f"{path}: word size {n} outside 1..{PDDT_MAX_WORD_SIZE}")
    expected = hsize + count * PDDT_DTYPE.itemsize
    if len(data) < expected:
        raise TruncatedFileError(f"{path}: {count} entries need {expected} bytes, file has {len(data)}")
    if len(data) > expected:
        raise PddtFormatError(f"{path}: {len(data) - expected} trailing bytes after {count} entries")
    entries = np.frombuffer(data, dtype=PDDT_DTYPE, count=count, offset=hsize).copy()
    w_max = None if w_byte == PDDT_NO_WEIGHT else int(w_byte)
    threshold, compare = _sidecar_settings(Path(path))
    t = PartialDDT(entries, n, w_max, threshold=threshold, compare=compare)
    if not t.is_canonical():
        raise UnsortedPayloadError(f"{path}: entries are not in strictly increasing (a, b, c) order")
    mask = word_mask(n)
    if count and (
        int(entries["a"].max()) > mask or int(entries["b"].max()) > mask or int(entries["c"].max()) > mask
    ):
        raise PddtFormatError(f"{path}: entry wider than {n} bits")
    if count and (w_max is None or int(entries["w"].max()) > w_max):
        raise PddtFormatError(f"{path}: entry weight exceeds the stored maximum {w_max}")
    return t
