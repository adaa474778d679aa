"""Exact linear algebra over the prime field F_p.

Matrices come in two storage forms.  Small matrices are dense numpy blocks;
large ones are coordinate triplets, eliminated with a Markowitz-style pivot
rule (fewest entries in the column, then the shortest row) to keep fill-in
down.  Ties break on the lowest column index and then the lowest row index,
so every basis that comes out of here is reproducible.
"""
import heapq

import numpy as np

from .errors import DimensionMismatch, NoSolution, NotASubspace

DENSE_THRESHOLD = 4096


def is_prime(p):
    if p < 2:
        return False
    q = 2
    while q * q <= p:
        if p % q == 0:
            return False
        q += 1
    return True


def inv_mod(a, p):
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse mod %d" % p)
    return pow(int(a), p - 2, p)


class FpMatrix:
    """Matrix over F_p, stored dense or as sorted (row, col, value) triplets."""

    def __init__(self, p, shape, dense=None, rows=None, cols=None, vals=None):
        self.p = int(p)
        self.shape = (int(shape[0]), int(shape[1]))
        self._dense = dense
        self._r = rows
        self._c = cols
        self._v = vals

    @classmethod
    def from_dense(cls, arr, p, sparse=False):
        a = np.asarray(arr, dtype=np.int64)
        if a.ndim != 2:
            a = a.reshape(len(a), -1) if a.size else np.zeros((0, 0), dtype=np.int64)
        a = a % p
        if sparse:
            r, c = np.nonzero(a)
            return cls(p, a.shape, rows=r.astype(np.int64), cols=c.astype(np.int64),
                       vals=a[r, c].astype(np.int64))
        return cls(p, a.shape, dense=a)

    @classmethod
    def from_triplets(cls, p, shape, rows, cols, vals):
        """Build a sparse matrix; duplicate positions are summed mod p."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.int64).ravel() % p
        nr, nc = int(shape[0]), int(shape[1])
        if len(rows) and (rows.min() < 0 or rows.max() >= nr or cols.min() < 0 or cols.max() >= nc):
            raise DimensionMismatch("triplet index outside %dx%d" % (nr, nc))
        if len(rows):
            key = rows * max(nc, 1) + cols
            order = np.argsort(key, kind="stable")
            key, vals = key[order], vals[order]
            uniq, start = np.unique(key, return_index=True)
            sums = np.add.reduceat(vals, start) % p if len(vals) else vals
            keep = sums != 0
            uniq, sums = uniq[keep], sums[keep]
            rows, cols = uniq // max(nc, 1), uniq % max(nc, 1)
            vals = sums
        return cls(p, (nr, nc), rows=rows, cols=cols, vals=vals)

    @classmethod
    def zeros(cls, p, shape):
        return cls(p, shape, dense=np.zeros(shape, dtype=np.int64))

    @classmethod
    def identity(cls, p, n):
        return cls(p, (n, n), dense=np.eye(n, dtype=np.int64))

    @property
    def is_sparse(self):
        return self._dense is None

    @property
    def nnz(self):
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return len(self._v)

    def to_dense(self):
        if self._dense is not None:
            return self._dense.copy()
        a = np.zeros(self.shape, dtype=np.int64)
        a[self._r, self._c] = self._v
        return a

    def triplets(self):
        if self._dense is None:
            return self._r.copy(), self._c.copy(), self._v.copy()
        r, c = np.nonzero(self._dense)
        return r.astype(np.int64), c.astype(np.int64), self._dense[r, c].astype(np.int64)

    def to_sparse(self):
        if self._dense is None:
            return self
        r, c, v = self.triplets()
        return FpMatrix(self.p, self.shape, rows=r, cols=c, vals=v)

    @property
    def T(self):
        if self._dense is not None:
            return FpMatrix(self.p, self.shape[::-1], dense=self._dense.T.copy())
        return FpMatrix.from_triplets(self.p, self.shape[::-1], self._c, self._r, self._v)

    def dot(self, x):
        """Product with a vector or a 2-d array, reduced mod p."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape[0] != self.shape[1]:
            raise DimensionMismatch("matrix has %d columns, operand has %d rows" % (self.shape[1], x.shape[0]))
        if self._dense is not None:
            return (self._dense @ (x % self.p)) % self.p
        out = np.zeros((self.shape[0],) + x.shape[1:], dtype=np.int64)
        contrib = (self._v.reshape((-1,) + (1,) * (x.ndim - 1)) * (x[self._c] % self.p)) % self.p
        np.add.at(out, self._r, contrib)
        return out % self.p

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            return FpMatrix.from_dense(self.dot(other.to_dense()), self.p)
        return self.dot(other)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        if self.p != other.p or self.shape != other.shape:
            return False
        return np.array_equal(self.to_dense(), other.to_dense())

    def __hash__(self):
        return hash((self.p, self.shape, self.to_dense().tobytes()))

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return "FpMatrix(p=%d, %dx%d, %s, nnz=%d)" % (self.p, self.shape[0], self.shape[1], kind, self.nnz)

    def row_dicts(self):
        rows = [dict() for _ in range(self.shape[0])]
        r, c, v = self.triplets()
        for i, j, x in zip(r.tolist(), c.tolist(), v.tolist()):
            rows[i][j] = x
        return rows


def as_matrix(M, p=None):
    if isinstance(M, FpMatrix):
        return M
    if p is None:
        raise ValueError("prime required for raw arrays")
    return FpMatrix.from_dense(M, p)


def _use_dense(M, method):
    if method == "dense":
        return True
    if method == "sparse":
        return False
    return M.shape[0] * M.shape[1] < DENSE_THRESHOLD


# ---------------------------------------------------------------- dense path

def rref(A, p, pivot_cols=None):
    """Reduced row echelon form of a dense array.

    Pivots are searched only among the first `pivot_cols` columns (all of
    them by default), which lets callers carry augmented blocks along.
    Returns (R, pivots) with R trimmed to its nonzero pivot rows.
    """
    A = np.array(A, dtype=np.int64) % p
    if A.ndim != 2:
        raise DimensionMismatch("rref needs a 2-d array")
    m, n = A.shape
    lim = n if pivot_cols is None else pivot_cols
    pivots = []
    r = 0
    for c in range(lim):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * inv_mod(A[r, c], p)) % p
        f = A[:, c].copy()
        f[r] = 0
        nzr = np.nonzero(f)[0]
        if len(nzr):
            A[nzr] = (A[nzr] - np.outer(f[nzr], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


# --------------------------------------------------------------- sparse path

def _markowitz(rows, ncols, p, protect=None):
    """Eliminate a list of row dicts in place.

    Columns >= `protect` are carried along but never chosen as pivots.
    Returns the pivots as (col, row dict) in elimination order, together with
    the leftover nonzero rows (those supported only on protected columns).
    """
    limit = ncols if protect is None else protect
    rows = [dict(r) for r in rows]
    col_rows = {}
    for i, r in enumerate(rows):
        for j in r:
            if j < limit:
                col_rows.setdefault(j, set()).add(i)
    heap = [(len(s), j) for j, s in col_rows.items()]
    heapq.heapify(heap)
    active = set(range(len(rows)))
    pivots = []
    while heap:
        cnt, c = heapq.heappop(heap)
        s = col_rows.get(c)
        if not s:
            continue
        if cnt != len(s):
            heapq.heappush(heap, (len(s), c))
            continue
        piv = min(s, key=lambda i: (len(rows[i]), i))
        prow = rows[piv]
        inv = inv_mod(prow[c], p)
        for j in prow:
            if j < limit:
                col_rows[j].discard(piv)
        active.discard(piv)
        for i in sorted(s):
            row = rows[i]
            f = (row[c] * inv) % p
            for j, v in prow.items():
                nv = (row.get(j, 0) - f * v) % p
                if nv:
                    if j not in row and j < limit:
                        col_rows.setdefault(j, set()).add(i)
                    row[j] = nv
                elif j in row:
                    del row[j]
                    if j < limit:
                        col_rows[j].discard(i)
                        if col_rows[j]:
                            heapq.heappush(heap, (len(col_rows[j]), j))
            for j in prow:
                if j < limit and j != c and j in col_rows and col_rows[j]:
                    heapq.heappush(heap, (len(col_rows[j]), j))
        del col_rows[c]
        pivots.append((c, prow))
    leftover = [rows[i] for i in sorted(active) if rows[i]]
    return pivots, leftover


def _back_substitute(pivots, ncols, p, free_values):
    """Solve the triangular pivot system.

    `free_values` is an (ncols, k) array holding fixed values for non-pivot
    columns; pivot columns are filled in, last pivot first.
    """
    X = free_values
    for c, row in reversed(pivots):
        inv = inv_mod(row[c], p)
        acc = np.zeros(X.shape[1], dtype=np.int64)
        for j, v in row.items():
            if j != c and j < ncols:
                acc = (acc + v * X[j]) % p
        X[c] = (-inv * acc) % p
    return X


# ------------------------------------------------------------------ public

def rank(M, method=None):
    M = as_matrix(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    if _use_dense(M, method):
        return len(rref(M.to_dense(), M.p)[1])
    pivots, _ = _markowitz(M.row_dicts(), M.shape[1], M.p)
    return len(pivots)


def kernel_matrix(M, method=None):
    """Columns form a basis of {v : Mv = 0}."""
    M = as_matrix(M)
    p = M.p
    m, n = M.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if m == 0:
        return np.eye(n, dtype=np.int64)
    if _use_dense(M, method):
        R, piv = rref(M.to_dense(), p)
        free = [j for j in range(n) if j not in set(piv)]
        K = np.zeros((n, len(free)), dtype=np.int64)
        for k, f in enumerate(free):
            K[f, k] = 1
            K[piv, k] = (-R[:, f]) % p
        return K
    pivots, _ = _markowitz(M.row_dicts(), n, p)
    pcols = {c for c, _ in pivots}
    free = [j for j in range(n) if j not in pcols]
    X = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        X[f, k] = 1
    return _back_substitute(pivots, n, p, X)


def kernel_basis(M, method=None):
    K = kernel_matrix(M, method)
    return [K[:, k].copy() for k in range(K.shape[1])]


def solve(M, b, method=None):
    """Some x with Mx = b; raises NoSolution when b is not in the image."""
    M = as_matrix(M)
    p = M.p
    b = np.asarray(b, dtype=np.int64).ravel() % p
    m, n = M.shape
    if len(b) != m:
        raise DimensionMismatch("matrix has %d rows, right-hand side has %d" % (m, len(b)))
    if _use_dense(M, method):
        aug = np.concatenate([M.to_dense(), b.reshape(-1, 1)], axis=1)
        R, piv = rref(aug, p, pivot_cols=n)
        rest = np.nonzero(R[len(piv):, n])[0] if len(R) > len(piv) else []
        x = np.zeros(n, dtype=np.int64)
        x[piv] = R[:len(piv), n]
        # rows beyond the pivots are zero on M's block, so any b entry there is inconsistent
        full = (M.dot(x) - b) % p
        if len(rest) or full.any():
            raise NoSolution("right-hand side is not in the image")
        return x
    rows = M.row_dicts()
    for i, v in enumerate(b.tolist()):
        if v:
            rows[i][n] = v
    pivots, leftover = _markowitz(rows, n + 1, p, protect=n)
    if leftover:
        raise NoSolution("right-hand side is not in the image")
    X = np.zeros((n, 1), dtype=np.int64)
    for c, row in reversed(pivots):
        inv = inv_mod(row[c], p)
        acc = row.get(n, 0)
        for j, v in row.items():
            if j != c and j < n:
                acc = (acc - v * int(X[j, 0])) % p
        X[c, 0] = (inv * acc) % p
    x = X[:, 0]
    if ((M.dot(x) - b) % p).any():
        raise NoSolution("substitution check failed")
    return x


def image_basis(M):
    """Rows spanning the column space of M, in echelon form."""
    M = as_matrix(M)
    R, _ = rref(M.to_dense().T, M.p)
    return R


class RowSpace:
    """Span of a list of vectors with fast membership and coordinates.

    Coordinates refer to the vectors as given (rows of `gens`), so callers can
    mix a basis of one subspace with complement vectors and read off both
    parts at once.  The generators must be linearly independent.
    """

    def __init__(self, gens, p, ambient=None):
        gens = np.asarray(gens, dtype=np.int64)
        if gens.size == 0:
            amb = ambient if ambient is not None else (gens.shape[1] if gens.ndim == 2 else 0)
            gens = np.zeros((0, amb), dtype=np.int64)
        self.p = p
        self.gens = gens % p
        k, n = self.gens.shape
        self.ambient = n
        aug = np.concatenate([self.gens, np.eye(k, dtype=np.int64)], axis=1)
        R, piv = rref(aug, p, pivot_cols=n)
        if len(piv) != k:
            raise ValueError("generators are linearly dependent")
        self.R = R[:, :n]
        self.T = R[:, n:]
        self.piv = piv

    @property
    def dim(self):
        return self.gens.shape[0]

    def coords(self, V, strict=True):
        """Coefficients c with c @ gens = v, row by row for a 2-d V."""
        V = np.asarray(V, dtype=np.int64) % self.p
        one = V.ndim == 1
        V2 = V.reshape(1, -1) if one else V
        if V2.shape[1] != self.ambient:
            raise DimensionMismatch("vector length %d, ambient %d" % (V2.shape[1], self.ambient))
        D = V2[:, self.piv]
        if strict and ((D @ self.R - V2) % self.p).any():
            raise NotASubspace("vector outside the span")
        C = (D @ self.T) % self.p
        return C[0] if one else C

    def contains(self, v):
        v = np.asarray(v, dtype=np.int64) % self.p
        D = v[self.piv]
        return not ((D @ self.R - v) % self.p).any()


class SubquotientBasis:
    """Z/B with chosen coset representatives."""

    def __init__(self, p, ambient, Z, B, reps):
        self.p = p
        self.ambient = ambient
        self.Z = Z
        self.B = B
        self.reps = reps
        self._space = RowSpace(np.concatenate([B, reps], axis=0), p, ambient)

    @property
    def dim(self):
        return self.reps.shape[0]

    def coords(self, v):
        """Coordinates of the class of v (v must lie in Z)."""
        c = self._space.coords(v)
        nb = self.B.shape[0]
        return c[..., nb:]

    def reduce(self, v):
        c = self.coords(v)
        return (c @ self.reps) % self.p

    def lift(self, c):
        return (np.asarray(c, dtype=np.int64) @ self.reps) % self.p

    def in_B(self, v):
        return not self.coords(v).any()


def _basis_rows(vectors, p, ambient):
    V = np.asarray(vectors, dtype=np.int64)
    if V.size == 0:
        return np.zeros((0, ambient), dtype=np.int64)
    R, _ = rref(V.reshape(-1, ambient), p)
    return R


def subquotient(Z, B, p, ambient=None):
    """Quotient of span(Z) by span(B); raises NotASubspace unless B lies in Z."""
    Zm = np.asarray(Z, dtype=np.int64)
    Bm = np.asarray(B, dtype=np.int64)
    if ambient is None:
        if Zm.ndim == 2 and Zm.shape[1]:
            ambient = Zm.shape[1]
        elif Bm.ndim == 2:
            ambient = Bm.shape[1]
        else:
            ambient = 0
    Zr = _basis_rows(Zm, p, ambient)
    Br = _basis_rows(Bm, p, ambient)
    zs = RowSpace(Zr, p, ambient)
    for b in Br:
        if not zs.contains(b):
            raise NotASubspace("a vector of B is outside span(Z)")
    # greedy left-to-right independent columns of [B; Z]^T extend B by reps
    nb = Br.shape[0]
    if Zr.shape[0] and ambient:
        _, piv = rref(np.concatenate([Br, Zr], axis=0).T, p)
        reps = Zr[[c - nb for c in piv if c >= nb]]
    else:
        reps = np.zeros((0, ambient), dtype=np.int64)
    return SubquotientBasis(p, ambient, Zr, Br, reps)
