"""QUBO problems: representation, energy evaluation, generation, clamping.

A QUBO instance is a dense real n x n matrix Q; the objective is to
minimize ``x^T Q x`` over binary vectors x. The matrix is evaluated
exactly as stored (no symmetrization), so upper-triangular and full
conventions both work as long as they are used consistently.

Sub-problems are built by clamping: pick a subset of variables, fix the
rest to their current values, and fold the fixed-variable interactions
into the subset's diagonal plus a constant offset. The clamping identity

    energy(Q, merge(x_fixed, y)) == energy(subq, y) + offset

holds exactly for every local assignment y.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class QuboMatrix:
    """Dense QUBO cost matrix.

    Parameters
    ----------
    q : np.ndarray
        Square (n, n) array of finite real coefficients. Stored as an
        immutable float64 copy.
    """

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64, copy=True)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"QUBO matrix must be square, got shape {q.shape}")
        if q.shape[0] < 1:
            raise ValueError("QUBO matrix must have at least one variable")
        if not np.all(np.isfinite(q)):
            raise ValueError("QUBO matrix entries must be finite")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class SubProblem:
    """A clamped restriction of a QUBO to a subset of its variables.

    ``indices`` are the global positions (strictly sorted) of the free
    variables, ``subq`` is the k x k clamped matrix and ``offset`` is the
    constant energy contributed by the fixed variables.
    """

    indices: np.ndarray
    subq: QuboMatrix
    offset: float

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.intp, copy=True)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("indices must be a non-empty 1-d sequence")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly sorted and distinct")
        if idx.size != self.subq.n:
            raise ValueError("indices length must match sub-matrix size")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return self.subq.n


def check_bits(x, n: int | None = None) -> np.ndarray:
    """Validate a binary vector and return it as an int8 array."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError("binary vector must be 1-d")
    if n is not None and arr.size != n:
        raise ValueError(f"binary vector has length {arr.size}, expected {n}")
    out = arr.astype(np.int8)
    if not np.array_equal(out, arr) or np.any((out != 0) & (out != 1)):
        raise ValueError("binary vector entries must be 0 or 1")
    return out


def energy(Q: QuboMatrix, x) -> float:
    """Energy ``x^T Q x`` of a binary assignment."""
    bits = check_bits(x, Q.n).astype(np.float64)
    return float(bits @ Q.q @ bits)


def energy_delta_flip(Q: QuboMatrix, x, i: int) -> float:
    """Energy change from flipping bit ``i``, computed in O(n).

    Equals ``energy(Q, flip(x, i)) - energy(Q, x)`` via

        (1 - 2 x_i) * (Q_ii + sum_{j != i} (Q_ij + Q_ji) x_j).
    """
    bits = check_bits(x, Q.n).astype(np.float64)
    if not 0 <= i < Q.n:
        raise ValueError(f"index {i} out of range for n={Q.n}")
    q = Q.q
    cross = float(q[i, :] @ bits + q[:, i] @ bits) - 2.0 * q[i, i] * bits[i]
    return (1.0 - 2.0 * bits[i]) * (q[i, i] + cross)


def flip(x, i: int) -> np.ndarray:
    """Copy of ``x`` with bit ``i`` flipped."""
    out = check_bits(x).copy()
    out[i] ^= 1
    return out


def gen_gaussian_qubo(n: int, seed: int) -> QuboMatrix:
    """Dense random QUBO with i.i.d. Normal(0, 0.15) entries.

    Deterministic for a fixed ``(n, seed)`` pair.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return QuboMatrix(rng.normal(0.0, 0.15, size=(n, n)))


def extract_sub_qubo(Q: QuboMatrix, indices, x_global) -> SubProblem:
    """Clamp all variables outside ``indices`` to ``x_global`` and restrict Q.

    For local positions a, b mapping to globals i, j:

        subq[a, a] = Q_ii + sum_{j fixed} (Q_ij + Q_ji) * x_j
        subq[a, b] = Q_ij                      (a != b)
        offset     = x_F^T Q_FF x_F            (F = fixed set)
    """
    requested = [int(i) for i in indices]
    idx = np.array(sorted(set(requested)), dtype=np.intp)
    if idx.size != len(requested):
        raise ValueError("indices contain duplicates")
    if idx.size < 1:
        raise ValueError("indices must be non-empty")
    if idx[0] < 0 or idx[-1] >= Q.n:
        raise ValueError("indices out of range")
    bits = check_bits(x_global, Q.n).astype(np.float64)

    fixed = np.setdiff1d(np.arange(Q.n, dtype=np.intp), idx, assume_unique=True)
    q = Q.q
    sub = q[np.ix_(idx, idx)].copy()
    if fixed.size:
        xf = bits[fixed]
        fold = q[np.ix_(idx, fixed)] @ xf + q[np.ix_(fixed, idx)].T @ xf
        sub[np.diag_indices_from(sub)] += fold
        offset = float(xf @ q[np.ix_(fixed, fixed)] @ xf)
    else:
        offset = 0.0
    return SubProblem(indices=idx, subq=QuboMatrix(sub), offset=offset)


def merge_assignment(x_global, indices, y) -> np.ndarray:
    """Copy of ``x_global`` with the subset ``indices`` overwritten by ``y``."""
    out = check_bits(x_global).copy()
    out[np.asarray(indices, dtype=np.intp)] = check_bits(y, len(indices))
    return out


def bits_from_index(b: int, k: int) -> np.ndarray:
    """Little-endian bit decomposition: bit i of ``b`` is variable i."""
    return ((b >> np.arange(k)) & 1).astype(np.int8)


def index_from_bits(x) -> int:
    """Inverse of :func:`bits_from_index`."""
    bits = check_bits(x)
    return int(bits @ (1 << np.arange(bits.size, dtype=np.int64)))


def all_energies(Q: QuboMatrix, chunk: int = 1 << 16) -> np.ndarray:
    """Energies of all 2^n basis assignments, little-endian indexed.

    Chunked so memory stays at O(chunk * n) regardless of n.
    """
    n = Q.n
    if n > 30:
        raise ValueError("all_energies is limited to n <= 30")
    total = 1 << n
    q = Q.q
    shifts = np.arange(n, dtype=np.int64)
    out = np.empty(total, dtype=np.float64)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        x = ((idx[:, None] >> shifts) & 1).astype(np.float64)
        out[start:stop] = ((x @ q) * x).sum(axis=1)
    return out


def save_qubo(Q: QuboMatrix, path) -> None:
    """Write a QUBO as JSON: ``{"n": int, "q": row-major list}``."""
    payload = {"n": Q.n, "q": [float(v) for v in Q.q.ravel()]}
    Path(path).write_text(json.dumps(payload))


def load_qubo(path) -> QuboMatrix:
    """Read a QUBO from JSON (``{"n", "q"}``) or CSV (n header + dense rows)."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"QUBO file not found: {p}")
    if p.suffix.lower() == ".csv":
        return _load_qubo_csv(p)
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "n" not in payload or "q" not in payload:
        raise DataError(f"{p}: expected an object with keys 'n' and 'q'")
    n = int(payload["n"])
    q = np.asarray(payload["q"], dtype=np.float64)
    if q.size != n * n:
        raise DataError(f"{p}: 'q' has {q.size} entries, expected {n * n}")
    return QuboMatrix(q.reshape(n, n))


def _load_qubo_csv(p: Path) -> QuboMatrix:
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{p}: empty file")
    try:
        n = int(rows[0][0])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{p}: line 1: expected the problem size n") from exc
    if len(rows) != n + 1:
        raise DataError(f"{p}: expected {n} matrix rows after the header, got {len(rows) - 1}")
    mat = np.empty((n, n), dtype=np.float64)
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise DataError(f"{p}: line {r}: expected {n} values, got {len(row)}")
        try:
            mat[r - 2] = [float(v) for v in row]
        except ValueError as exc:
            raise DataError(f"{p}: line {r}: non-numeric value") from exc
    return QuboMatrix(mat)
