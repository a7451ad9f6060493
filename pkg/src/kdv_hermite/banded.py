"""Banded storage with periodic corner blocks, and its direct solver."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.linalg import lapack

HALF_BANDWIDTH = 3
DENSE_FALLBACK_MAX = 512


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class BandedPeriodicMatrix:
    """Square matrix = band of half-width ``bw`` + two 2x2 periodic corner blocks.

    ``bands[bw + i - j, j] == a[i, j]`` for ``|i - j| <= bw``;
    ``upper_corner == a[0:2, n-2:n]`` and ``lower_corner == a[n-2:n, 0:2]``.
    """

    n: int
    bands: np.ndarray
    upper_corner: np.ndarray
    lower_corner: np.ndarray
    bw: int = HALF_BANDWIDTH

    @classmethod
    def from_element_matrices(cls, local: np.ndarray, cell_dofs: np.ndarray, n: int):
        """Scatter-add per-cell (4x4) matrices; ``local[k, a, b]`` couples test a with trial b."""
        bw = HALF_BANDWIDTH
        if n - 2 <= bw:
            raise ValueError(f"need at least {bw + 3} unknowns, got {n}")
        rows = np.broadcast_to(cell_dofs[:, :, None], local.shape).ravel()
        cols = np.broadcast_to(cell_dofs[:, None, :], local.shape).ravel()
        vals = local.ravel()
        off = cols - rows
        inband = np.abs(off) <= bw
        bands = np.zeros((2 * bw + 1, n))
        np.add.at(bands, (bw - off[inband], cols[inband]), vals[inband])
        upper = np.zeros((2, 2))
        lower = np.zeros((2, 2))
        up = ~inband & (rows < 2)
        lo = ~inband & (rows >= n - 2)
        if np.any(~inband & ~up & ~lo):
            raise ValueError("element coupling outside band and corner blocks")
        np.add.at(upper, (rows[up], cols[up] - (n - 2)), vals[up])
        np.add.at(lower, (rows[lo] - (n - 2), cols[lo]), vals[lo])
        return cls(n=n, bands=bands, upper_corner=upper, lower_corner=lower)

    @classmethod
    def identity(cls, n: int):
        bands = np.zeros((2 * HALF_BANDWIDTH + 1, n))
        bands[HALF_BANDWIDTH] = 1.0
        return cls(n=n, bands=bands, upper_corner=np.zeros((2, 2)), lower_corner=np.zeros((2, 2)))

    def __add__(self, other: "BandedPeriodicMatrix") -> "BandedPeriodicMatrix":
        if other.n != self.n or other.bw != self.bw:
            raise ValueError("shape mismatch")
        return BandedPeriodicMatrix(
            self.n,
            self.bands + other.bands,
            self.upper_corner + other.upper_corner,
            self.lower_corner + other.lower_corner,
            self.bw,
        )

    def __mul__(self, alpha: float) -> "BandedPeriodicMatrix":
        return BandedPeriodicMatrix(
            self.n, alpha * self.bands, alpha * self.upper_corner, alpha * self.lower_corner, self.bw
        )

    __rmul__ = __mul__

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n, bw = self.n, self.bw
        y = np.zeros(n)
        for k in range(-bw, bw + 1):
            # diagonal k holds a[i, i + k]
            diag = self.bands[bw - k]
            if k >= 0:
                y[: n - k] += diag[k:] * x[k:]
            else:
                y[-k:] += diag[: n + k] * x[: n + k]
        y[:2] += self.upper_corner @ x[n - 2 :]
        y[n - 2 :] += self.lower_corner @ x[:2]
        return y

    __matmul__ = matvec

    def diagonal(self) -> np.ndarray:
        return self.bands[self.bw].copy()

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        n, bw = self.n, self.bw
        offsets = list(range(-bw, bw + 1))
        diags = []
        for k in offsets:
            d = self.bands[bw - k]
            diags.append(d[k:] if k >= 0 else d[: n + k])
        mat = scipy.sparse.diags(diags, offsets, shape=(n, n), format="lil")
        mat[:2, n - 2 :] = mat[:2, n - 2 :].toarray() + self.upper_corner
        mat[n - 2 :, :2] = mat[n - 2 :, :2].toarray() + self.lower_corner
        return mat.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.to_sparse()).sum(axis=1)))

    def factorize(self) -> "BandedFactorization":
        return BandedFactorization(self)


class BandedFactorization:
    """LU of the strict band plus a rank-4 Woodbury correction for the corners.

    Falls back to a dense (n <= 512) or sparse LU when the strict band is
    singular or the corrected solve misses the residual target.
    """

    def __init__(self, mat: BandedPeriodicMatrix):
        self.mat = mat
        n, bw = mat.n, mat.bw
        self._fallback = None
        ab = np.zeros((3 * bw + 1, n))
        ab[bw:] = mat.bands
        lu, piv, info = lapack.dgbtrf(ab, bw, bw)
        if info != 0:
            self._make_fallback()
            return
        self._lu, self._piv = lu, piv
        self._idx = np.array([0, 1, n - 2, n - 1])
        gc = np.zeros((4, 4))
        gc[:2, 2:] = mat.upper_corner
        gc[2:, :2] = mat.lower_corner
        self._gc = gc
        u = np.zeros((n, 4))
        u[self._idx, np.arange(4)] = 1.0
        self._z = self._band_solve(u)
        cap = np.eye(4) + gc @ self._z[self._idx]
        try:
            self._cap = scipy.linalg.lu_factor(cap, check_finite=True)
        except (np.linalg.LinAlgError, ValueError):
            self._make_fallback()
            return
        if not np.all(np.isfinite(self._z)) or np.linalg.cond(cap) > 1e12:
            self._make_fallback()

    def _band_solve(self, b):
        x, info = lapack.dgbtrs(self._lu, self.mat.bw, self.mat.bw, b, self._piv)
        if info != 0:
            raise SingularSystemError(f"dgbtrs failed with info={info}")
        return x

    def _make_fallback(self):
        if self.mat.n <= DENSE_FALLBACK_MAX:
            dense = self.mat.to_dense()
            try:
                lu = scipy.linalg.lu_factor(dense)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SingularSystemError(str(exc)) from exc
            if np.any(np.abs(np.diag(lu[0])) < 1e-300):
                raise SingularSystemError("matrix is singular")
            self._fallback = lambda b: scipy.linalg.lu_solve(lu, b)
        else:
            try:
                lu = scipy.sparse.linalg.splu(self.mat.to_sparse().tocsc())
            except RuntimeError as exc:
                raise SingularSystemError(str(exc)) from exc
            self._fallback = lu.solve

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self._fallback is not None:
            x = self._fallback(rhs)
        else:
            y = self._band_solve(rhs)
            x = y - self._z @ scipy.linalg.lu_solve(self._cap, self._gc @ y[self._idx])
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("non-finite solution")
        res = np.linalg.norm(self.mat.matvec(x) - rhs)
        if res > 1e-10 * (1.0 + np.linalg.norm(rhs)):
            if self._fallback is None:
                self._make_fallback()
                return self.solve(rhs)
            raise SingularSystemError(f"residual {res:.3e} above tolerance")
        return x


def solve_banded(lhs: BandedPeriodicMatrix, rhs: np.ndarray) -> np.ndarray:
    return lhs.factorize().solve(rhs)
