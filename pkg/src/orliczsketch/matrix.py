"""Dense or coordinate-sparse real matrices."""
import numpy as np
from scipy import sparse


class MatrixError(ValueError):
    pass


class MatrixHandle:
    """An n x d matrix stored densely or as (i, j, value) triplets.

    Triplet storage keeps indices zero-based and unique; it is the form the
    sketch kernels consume in one pass.
    """

    def __init__(self, dense=None, rows=None, cols=None, vals=None, shape=None):
        if dense is not None:
            arr = np.ascontiguousarray(dense, dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2:
                raise MatrixError("dense storage must be two-dimensional")
            self.dense = arr
            self.rows = self.cols = self.vals = None
            self.shape = arr.shape
        else:
            if shape is None:
                raise MatrixError("sparse storage needs an explicit shape")
            n, d = (int(s) for s in shape)
            rows = np.ascontiguousarray(rows, dtype=np.int64)
            cols = np.ascontiguousarray(cols, dtype=np.int64)
            vals = np.ascontiguousarray(vals, dtype=float)
            if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
                raise MatrixError("rows, cols and vals must be equal-length vectors")
            if rows.size and (rows.min() < 0 or rows.max() >= n
                              or cols.min() < 0 or cols.max() >= d):
                raise MatrixError("triplet index out of range")
            flat = rows * d + cols
            if np.unique(flat).size != flat.size:
                raise MatrixError("duplicate (i, j) triplets")
            self.dense = None
            self.rows, self.cols, self.vals = rows, cols, vals
            self.shape = (n, d)

    @classmethod
    def from_dense(cls, arr):
        return cls(dense=arr)

    @classmethod
    def from_coo(cls, rows, cols, vals, shape):
        return cls(rows=rows, cols=cols, vals=vals, shape=shape)

    @classmethod
    def wrap(cls, A):
        if isinstance(A, cls):
            return A
        if sparse.issparse(A):
            coo = sparse.coo_array(A)
            coo.sum_duplicates()
            return cls.from_coo(coo.row, coo.col, coo.data, coo.shape)
        return cls.from_dense(A)

    @property
    def is_sparse(self):
        return self.dense is None

    @property
    def n(self):
        return self.shape[0]

    @property
    def d(self):
        return self.shape[1]

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self.vals.size)
        return int(np.count_nonzero(self.dense))

    def to_dense(self):
        if not self.is_sparse:
            return self.dense
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.vals
        return out

    def to_scipy(self):
        if self.is_sparse:
            return sparse.csr_array((self.vals, (self.rows, self.cols)), shape=self.shape)
        return self.dense

    def __matmul__(self, other):
        return self.to_scipy() @ other

    def rmatmul(self, other):
        """``other @ A``."""
        if self.is_sparse:
            return (self.to_scipy().T @ np.asarray(other).T).T
        return other @ self.dense

    def transpose(self):
        if self.is_sparse:
            return MatrixHandle.from_coo(self.cols, self.rows, self.vals,
                                         (self.d, self.n))
        return MatrixHandle.from_dense(self.dense.T)

    @property
    def T(self):
        return self.transpose()

    def scale_rows(self, w):
        if self.is_sparse:
            return MatrixHandle.from_coo(self.rows, self.cols, self.vals * w[self.rows],
                                         self.shape)
        return MatrixHandle.from_dense(self.dense * w[:, None])

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"MatrixHandle({kind}, shape={self.shape}, nnz={self.nnz})"
