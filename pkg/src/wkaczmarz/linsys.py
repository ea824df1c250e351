"""Dense row-normalized linear systems, Gram matrices and test-matrix generators.

A system is stored as a dense ``(m, n)`` float64 array with unit-norm rows.
Normalizing row ``i`` divides both ``a_i`` and ``b_i`` by ``||a_i||`` so the
solution set is unchanged.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMatrixFile, GeneratorError, ZeroRow

ROW_NORM_TOL = 1e-12
ZERO_ROW_GUARD = 1e-300
SOLUTION_TOL = 1e-10


@dataclass(frozen=True)
class NormalizedSystem:
    """A consistent system ``A x = b`` whose rows satisfy ``||a_i|| = 1``.

    Parameters
    ----------
    A : ndarray, shape (m, n)
        Row-normalized matrix. The analysis routines need ``m >= n`` and
        full column rank; the container itself only checks the row norms.
    b : ndarray, shape (m,)
        Right-hand side, rescaled together with the rows.
    solution : ndarray, shape (n,) or None
        Known exact solution, used only for diagnostics.
    row_scales : ndarray, shape (m,)
        Row norms of the matrix before normalization.
    """

    A: np.ndarray
    b: np.ndarray
    solution: np.ndarray | None = None
    row_scales: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"A must be a non-empty 2-D array, got shape {A.shape}")
        m, n = A.shape
        if b.shape != (m,):
            raise ValueError(f"b has length {b.size}, expected {m}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        norms = np.linalg.norm(A, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > ROW_NORM_TOL)
        if bad.size:
            raise ValueError(f"row {bad[0]} is not unit norm (|a_i| = {norms[bad[0]]!r})")
        sol = self.solution
        if sol is not None:
            sol = np.array(sol, dtype=np.float64).reshape(-1)
            if sol.shape != (n,):
                raise ValueError(f"solution has length {sol.size}, expected {n}")
            gap = np.max(np.abs(A @ sol - b))
            if gap > SOLUTION_TOL:
                raise ValueError(f"stored solution leaves residual {gap:.3g}")
        scales = np.ones(m) if self.row_scales is None else np.array(self.row_scales, dtype=np.float64)
        for arr in (A, b, scales) + ((sol,) if sol is not None else ()):
            arr.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "solution", sol)
        object.__setattr__(self, "row_scales", scales)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_solution(self, solution) -> "NormalizedSystem":
        return NormalizedSystem(self.A, self.b, solution, self.row_scales)


def normalize_system(A_raw, b_raw, solution=None) -> NormalizedSystem:
    """Scale every equation to a unit-norm row.

    Raises
    ------
    ZeroRow
        If some row has norm below ``1e-300``.
    """
    A_raw = np.asarray(A_raw, dtype=np.float64)
    b_raw = np.asarray(b_raw, dtype=np.float64).reshape(-1)
    if A_raw.ndim != 2:
        raise ValueError("A_raw must be 2-D")
    if b_raw.size != A_raw.shape[0]:
        raise ValueError(f"b_raw has length {b_raw.size}, expected {A_raw.shape[0]}")
    scales = np.linalg.norm(A_raw, axis=1)
    zero = np.flatnonzero(scales < ZERO_ROW_GUARD)
    if zero.size:
        raise ZeroRow(int(zero[0]))
    A = A_raw / scales[:, None]
    # one more pass removes the last ulp of norm error left by the division
    A /= np.linalg.norm(A, axis=1)[:, None]
    return NormalizedSystem(A, b_raw / scales, solution, scales)


def gram(system: NormalizedSystem) -> np.ndarray:
    """Return the symmetric ``(m, m)`` table ``Q[i, j] = <a_i, a_j>``."""
    Q = system.A @ system.A.T
    # BLAS may not produce a bitwise-symmetric product
    Q = np.triu(Q) + np.triu(Q, 1).T
    Q.flags.writeable = False
    return Q


def residual(system: NormalizedSystem, x) -> np.ndarray:
    """``A x - b``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (system.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({system.n},)")
    return system.A @ x - system.b


def _check_dims(m, n):
    if int(n) < 1 or int(m) < int(n):
        raise GeneratorError(f"need m >= n >= 1, got m={m}, n={n}")


def gen_gaussian(m: int, n: int, seed: int, solution=None) -> NormalizedSystem:
    """I.i.d. standard normal entries, rows then normalized.

    ``b = A @ solution``; the solution defaults to zero, so ``b = 0``.
    """
    _check_dims(m, n)
    rng = np.random.default_rng(seed)
    A_raw = rng.standard_normal((int(m), int(n)))
    x_star = np.zeros(int(n)) if solution is None else np.asarray(solution, dtype=np.float64)
    sys_ = normalize_system(A_raw, np.zeros(int(m)))
    return NormalizedSystem(sys_.A, sys_.A @ x_star, x_star, sys_.row_scales)


def gen_gaussian_shifted(n: int, shift: float, seed: int) -> NormalizedSystem:
    """Square Gaussian matrix plus ``shift * I``, rows normalized, ``b = 0``."""
    _check_dims(n, n)
    if not shift > 0:
        raise GeneratorError(f"shift must be positive, got {shift}")
    rng = np.random.default_rng(seed)
    A_raw = rng.standard_normal((int(n), int(n))) + shift * np.eye(int(n))
    return normalize_system(A_raw, np.zeros(int(n)), solution=np.zeros(int(n)))


def ones_start(system: NormalizedSystem) -> np.ndarray:
    """Default experiment start ``x0 = (1, ..., 1)``."""
    return np.ones(system.n)


# -- plain-text I/O --------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def read_matrix(path) -> np.ndarray:
    """Read ``m n`` on the first line followed by ``m`` rows of ``n`` floats."""
    with open(path) as fh:
        lines = [(i + 1, ln.split()) for i, ln in enumerate(fh)]
    lines = [(i, toks) for i, toks in lines if toks]
    if not lines:
        raise BadMatrixFile(path, 1, "empty file")
    lineno, head = lines[0]
    try:
        m, n = (int(t) for t in head)
    except ValueError:
        raise BadMatrixFile(path, lineno, "header must be two integers 'm n'") from None
    if m < 1 or n < 1:
        raise BadMatrixFile(path, lineno, f"invalid dimensions {m} x {n}")
    body = lines[1:]
    if len(body) != m:
        where = body[-1][0] + 1 if body else lineno + 1
        raise BadMatrixFile(path, where, f"expected {m} rows, found {len(body)}")
    A = np.empty((m, n))
    for r, (lineno, toks) in enumerate(body):
        if len(toks) != n:
            raise BadMatrixFile(path, lineno, f"expected {n} values, found {len(toks)}")
        try:
            A[r] = [float(t) for t in toks]
        except ValueError as exc:
            raise BadMatrixFile(path, lineno, str(exc)) from None
    if not np.all(np.isfinite(A)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(A), axis=1))[0])
        raise BadMatrixFile(path, body[bad][0], "non-finite entry")
    return A


def read_rhs(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for lineno, ln in enumerate(fh, start=1):
            s = ln.strip()
            if not s:
                continue
            try:
                vals.append(float(s))
            except ValueError:
                raise BadMatrixFile(path, lineno, f"not a float: {s!r}") from None
    return np.array(vals)


def write_matrix(path, A) -> None:
    A = np.asarray(A, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def write_rhs(path, b) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(b, dtype=np.float64).reshape(-1):
            fh.write(_fmt(v) + "\n")


def load_system(matrix_path, rhs_path=None) -> NormalizedSystem:
    """Read a matrix (and optional right-hand side, default zero) and normalize it."""
    A = read_matrix(matrix_path)
    solution = None
    if rhs_path is None:
        # homogeneous system, the unique solution of a full-rank A is zero
        b = np.zeros(A.shape[0])
        solution = np.zeros(A.shape[1])
    else:
        b = read_rhs(rhs_path)
        if b.size != A.shape[0]:
            raise BadMatrixFile(rhs_path, b.size + 1, f"expected {A.shape[0]} values, found {b.size}")
    if A.shape[0] < A.shape[1]:
        raise BadMatrixFile(matrix_path, 1, f"need m >= n, got {A.shape[0]} x {A.shape[1]}")
    try:
        return normalize_system(A, b, solution)
    except ZeroRow as exc:
        raise BadMatrixFile(os.fspath(matrix_path), exc.row + 2, "zero row") from None
