"""Synthetic sparsely corrupted linear systems.

The model throughout the package is ``b = A x* + eps``: rows of ``A`` are
i.i.d. uniform on the unit sphere, the planted solution ``x*`` is uniform on
the sphere, and ``eps`` is an adversarially large but sparse corruption
supported on a small index set ``B``.  A solver only ever sees ``(A, b)``;
``x*`` and ``B`` ride along on synthetic instances so that oracle diagnostics
(error norms, corrupted-step flags) can be computed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateRow,
    DomainError,
    IndexOutOfRange,
    InvalidDimension,
    MissingTruth,
)
from .rng import RngHandle, as_handle

ROW_NORM_TOL = 1e-12
RHS_TOL = 1e-12
# Norm below which a Gaussian draw cannot be normalized safely; such rows are
# resampled, and generation aborts after this many consecutive failures.
DEGENERATE_NORM = 1e-300
MAX_RESAMPLE_FAILURES = 100

FIRST_ROWS = "first_rows"
UNIFORM_RANDOM = "uniform_random"
_PLACEMENTS = (FIRST_ROWS, UNIFORM_RANDOM)


@dataclass(frozen=True)
class UniformInterval:
    """Corruption values drawn i.i.d. uniform on [lo, hi]."""

    lo: float = -5.0
    hi: float = 5.0

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError("UniformInterval needs lo < hi")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        values = rng.uniform(self.lo, self.hi, size=size)
        # Exact zeros would shrink the support of eps below B; redraw them.
        zero = values == 0.0
        while zero.any():
            values[zero] = rng.uniform(self.lo, self.hi, size=int(zero.sum()))
            zero = values == 0.0
        return values


@dataclass(frozen=True)
class FixedMagnitude:
    """Corruption values with |eps_i| = value and independent random signs."""

    value: float

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise DomainError("FixedMagnitude needs value > 0")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        signs = np.where(rng.integers(0, 2, size=size) == 1, 1.0, -1.0)
        return self.value * signs


@dataclass(frozen=True)
class SignedFixed:
    """Every corrupted entry set to exactly ``value``."""

    value: float

    def __post_init__(self) -> None:
        if self.value == 0:
            raise DomainError("SignedFixed needs a nonzero value")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.value))


Magnitude = UniformInterval | FixedMagnitude | SignedFixed


@dataclass(frozen=True)
class CorruptionSpec:
    """How many equations to corrupt, where, and by how much.

    ``beta`` is the corrupted fraction; the corrupted count is
    ``floor(beta * m)`` with a minimum of one row whenever ``beta > 0``.
    """

    beta: float
    placement: str = FIRST_ROWS
    magnitude: Magnitude = field(default_factory=UniformInterval)

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta < 1.0:
            raise DomainError("beta must lie in [0, 1)")
        if self.placement not in _PLACEMENTS:
            raise DomainError(f"placement must be one of {_PLACEMENTS}")

    def count(self, m: int) -> int:
        if self.beta == 0.0:
            return 0
        return max(1, int(np.floor(self.beta * m)))


@dataclass(frozen=True)
class LinearSystem:
    """An overdetermined system with unit-norm rows and optional ground truth.

    Invariants enforced at construction: every row norm within 1e-12 of 1,
    ``corruption`` supported exactly on ``corrupted_set`` (sorted, unique),
    and when ``truth`` is present ``rhs = rows @ truth + corruption`` to a
    1e-12 relative tolerance.  Arrays are frozen read-only so instances are
    safe to share across threads and processes.
    """

    rows: np.ndarray
    rhs: np.ndarray
    truth: np.ndarray | None
    corrupted_set: np.ndarray
    corruption: np.ndarray

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.float64))
        rhs = np.asarray(self.rhs, dtype=np.float64)
        corruption = np.asarray(self.corruption, dtype=np.float64)
        corrupted_set = np.asarray(self.corrupted_set, dtype=np.int64)
        truth = self.truth
        if truth is not None:
            truth = np.asarray(truth, dtype=np.float64)

        if rows.ndim != 2:
            raise InvalidDimension("rows must be a 2-d array")
        m, n = rows.shape
        if n == 0 or m < n:
            raise InvalidDimension(f"need m >= n >= 1, got m={m}, n={n}")
        if rhs.shape != (m,):
            raise InvalidDimension("rhs length must equal the row count")
        if corruption.shape != (m,):
            raise InvalidDimension("corruption length must equal the row count")
        if truth is not None and truth.shape != (n,):
            raise InvalidDimension("truth length must equal the column count")

        norms = np.linalg.norm(rows, axis=1)
        if not np.all(np.abs(norms - 1.0) <= ROW_NORM_TOL):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise InvalidDimension(
                f"row {worst} has norm {norms[worst]!r}, expected 1 within {ROW_NORM_TOL}"
            )

        support = np.flatnonzero(corruption != 0.0)
        if corrupted_set.ndim != 1:
            raise InvalidDimension("corrupted_set must be 1-d")
        sorted_set = np.sort(corrupted_set)
        if len(np.unique(sorted_set)) != len(sorted_set):
            raise InvalidDimension("corrupted_set contains duplicates")
        if len(sorted_set) and (sorted_set[0] < 0 or sorted_set[-1] >= m):
            raise IndexOutOfRange("corrupted_set index outside [0, m)")
        if not np.array_equal(support, sorted_set):
            raise InvalidDimension("corruption support must equal corrupted_set")

        if truth is not None:
            expected = rows @ truth + corruption
            tol = RHS_TOL * (1.0 + np.abs(rhs))
            if not np.all(np.abs(rhs - expected) <= tol):
                raise InvalidDimension("rhs inconsistent with truth + corruption")

        for name, arr in (
            ("rows", rows),
            ("rhs", rhs),
            ("corruption", corruption),
            ("corrupted_set", sorted_set),
            ("truth", truth),
        ):
            if arr is not None:
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    @property
    def corrupted_fraction(self) -> float:
        return len(self.corrupted_set) / self.m

    def corrupted_mask(self) -> np.ndarray:
        mask = np.zeros(self.m, dtype=bool)
        mask[self.corrupted_set] = True
        return mask

    def uncorrupted_set(self) -> np.ndarray:
        """Indices of the clean equations, sorted."""
        return np.setdiff1d(np.arange(self.m, dtype=np.int64), self.corrupted_set)


def _sphere_rows(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Draw ``count`` rows i.i.d. uniform on the unit sphere in R^n.

    Normalized standard Gaussians; rows with norm below DEGENERATE_NORM are
    resampled, and more than MAX_RESAMPLE_FAILURES consecutive failures abort.
    """
    out = np.empty((count, n))
    need = np.arange(count)
    failures = 0
    while len(need):
        draws = rng.normal(size=(len(need), n))
        norms = np.linalg.norm(draws, axis=1)
        good = norms >= DEGENERATE_NORM
        out[need[good]] = draws[good] / norms[good, None]
        if good.all():
            break
        failures += 1
        if failures > MAX_RESAMPLE_FAILURES:
            raise DegenerateRow(
                f"{MAX_RESAMPLE_FAILURES} consecutive degenerate draws; "
                "generator looks broken"
            )
        need = need[~good]
    return out


def generate_system(
    m: int,
    n: int,
    corruption: CorruptionSpec,
    rng: "RngHandle | int",
) -> LinearSystem:
    """Draw a random instance of the corrupted model ``b = A x* + eps``."""
    if n <= 0 or m < n:
        raise InvalidDimension(f"need m >= n >= 1, got m={m}, n={n}")
    gen = as_handle(rng).generator()
    rows = _sphere_rows(gen, m, n)
    truth = _sphere_rows(gen, 1, n)[0]
    count = corruption.count(m)
    if corruption.placement == FIRST_ROWS:
        corrupted_set = np.arange(count, dtype=np.int64)
    else:
        corrupted_set = np.sort(gen.choice(m, size=count, replace=False)).astype(np.int64)
    eps = np.zeros(m)
    if count:
        eps[corrupted_set] = corruption.magnitude.draw(gen, count)
    rhs = rows @ truth + eps
    return LinearSystem(
        rows=rows,
        rhs=rhs,
        truth=truth,
        corrupted_set=corrupted_set,
        corruption=eps,
    )


def residual(system: LinearSystem, x: np.ndarray, i: int) -> float:
    """Signed residual ``<a_i, x> - b_i`` of equation ``i`` at ``x``."""
    if not 0 <= i < system.m:
        raise IndexOutOfRange(f"equation index {i} outside [0, {system.m})")
    return float(system.rows[i] @ x - system.rhs[i])


def error_norm(system: LinearSystem, x: np.ndarray) -> float:
    """Euclidean distance from ``x`` to the planted solution."""
    if system.truth is None:
        raise MissingTruth("system has no planted solution")
    return float(np.linalg.norm(x - system.truth))


# Binary instance format, little-endian throughout:
#   magic "QRKS", version u32, m u64, n u64, beta f64,
#   rows (m*n f64, row-major), rhs (m f64), truth (n f64), corruption (m f64).
# Used for test fixtures; the corrupted set is recovered from the corruption
# support on load, and beta is stored as |B| / m.
_MAGIC = b"QRKS"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQd")


def dump_system(system: LinearSystem, path: "str | Path") -> None:
    if system.truth is None:
        raise MissingTruth("only synthetic systems (with truth) can be dumped")
    beta = system.corrupted_fraction
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, system.m, system.n, beta))
        fh.write(np.ascontiguousarray(system.rows, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(system.rhs, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(system.truth, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(system.corruption, dtype="<f8").tobytes())


def load_system(path: "str | Path") -> LinearSystem:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated system file")
        magic, version, m, n, _beta = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported format version {version}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    expected = m * n + m + n + m
    if body.size != expected:
        raise ValueError(f"expected {expected} payload floats, found {body.size}")
    rows = body[: m * n].reshape(m, n)
    rhs = body[m * n : m * n + m]
    truth = body[m * n + m : m * n + m + n]
    corruption = body[m * n + m + n :]
    corrupted_set = np.flatnonzero(corruption != 0.0).astype(np.int64)
    return LinearSystem(
        rows=rows.copy(),
        rhs=rhs.copy(),
        truth=truth.copy(),
        corrupted_set=corrupted_set,
        corruption=corruption.copy(),
    )
