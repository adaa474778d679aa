"""Spectral sequences of filtered cochain complexes.

A filtered complex here is a finite cochain complex whose basis vectors each
carry a filtration degree (the column index for double complexes), with the
differential never lowering it.  Pages are computed directly from

    Z_r^s = {x in F^s : dx in F^{s+r}},
    E_r^s = Z_r^s / (Z_{r-1}^{s+1} + d Z_{r-1}^{s-r+1}),

so every basis element of E_r comes with a representative that is already
lifted through the zig-zag, and d_r[x] = [dx] is read off by coordinates.
"""
import numpy as np

from .collapse import MorseReduction
from .errors import LiftFailed, NotASubspace
from .fplinalg import FpMatrix, kernel_matrix, rank, subquotient, rref
from .rings import TruncatedAlgebra, algebra_iso_search


def _rowspace(V, p, ambient):
    V = np.asarray(V, dtype=np.int64)
    if V.size == 0:
        return np.zeros((0, ambient), dtype=np.int64)
    V = V.reshape(-1, ambient) % p
    if V.shape[0] == 0:
        return V
    R, _ = rref(V, p)
    return R


class FilteredComplex:
    """Cochain complex with a filtration degree per basis vector."""

    def __init__(self, p, dims, d, filt, product=None, name=""):
        self.p = p
        self.dims = list(dims)
        self._d = d
        self.filt = [np.asarray(f, dtype=np.int64) for f in filt]
        self.product = product
        self.name = name
        self._dense = {}

    @property
    def top(self):
        return len(self.dims) - 2

    def D(self, t):
        """Dense delta^t : C^t -> C^{t+1} (shape dims[t+1] x dims[t])."""
        if t not in self._dense:
            if t < 0 or t + 1 >= len(self.dims):
                raise IndexError(t)
            M = self._d(t)
            M = M.to_dense() if isinstance(M, FpMatrix) else np.asarray(M, dtype=np.int64)
            self._dense[t] = M % self.p
        return self._dense[t]

    def filtration_range(self):
        vals = np.concatenate([f for f in self.filt if len(f)]) if any(len(f) for f in self.filt) else np.zeros(1)
        return int(vals.min()), int(vals.max())

    def check_filtered(self):
        for t in range(self.top + 1):
            D = self.D(t)
            if D.size == 0:
                continue
            lower = self.filt[t + 1][:, None] < self.filt[t][None, :]
            if (D[lower] % self.p).any():
                return False
        return True

    def Z(self, r, s, t):
        """Basis rows of Z_r^s in degree t (r=None means cocycles)."""
        p = self.p
        n = self.dims[t]
        cols = np.nonzero(self.filt[t] >= s)[0]
        if len(cols) == 0:
            return np.zeros((0, n), dtype=np.int64)
        if t + 1 < len(self.dims) and self.dims[t + 1]:
            D = self.D(t)
            rows = np.arange(self.dims[t + 1]) if r is None else np.nonzero(self.filt[t + 1] < s + r)[0]
            A = D[np.ix_(rows, cols)]
        else:
            A = np.zeros((0, len(cols)), dtype=np.int64)
        if A.shape[0] == 0:
            K = np.eye(len(cols), dtype=np.int64)
        else:
            K = kernel_matrix(FpMatrix.from_dense(A, p), method="dense")
        out = np.zeros((K.shape[1], n), dtype=np.int64)
        out[:, cols] = K.T
        return out

    def boundaries_into(self, r, s, t):
        """Rows spanning d Z_r^{s-r} taken from degree t-1 (lands in F^s of degree t)."""
        n = self.dims[t]
        if t == 0:
            return np.zeros((0, n), dtype=np.int64)
        Zp = self.Z(r, s - r, t - 1)
        if Zp.shape[0] == 0:
            return np.zeros((0, n), dtype=np.int64)
        return (Zp @ self.D(t - 1).T) % self.p

    def page_space(self, r, s, t):
        """E_r^{s, t-s} as a SubquotientBasis of C^t."""
        p = self.p
        n = self.dims[t]
        if r is None:
            Zs = self.Z(None, s, t)
            lo, hi = self.filtration_range()
            big = hi - lo + 2
            den = np.concatenate([self.Z(None, s + 1, t), self.boundaries_into(big, s, t)], axis=0)
        else:
            Zs = self.Z(r, s, t)
            den = np.concatenate([self.Z(r - 1, s + 1, t), self.boundaries_into(r - 1, s, t)], axis=0)
        return subquotient(_rowspace(Zs, p, n), _rowspace(den, p, n), p, ambient=n)

    def cohomology_dim(self, t):
        D_out = self.D(t) if t + 1 < len(self.dims) and self.dims[t + 1] else np.zeros((0, self.dims[t]))
        r_out = rank(FpMatrix.from_dense(D_out, self.p)) if D_out.size else 0
        r_in = rank(FpMatrix.from_dense(self.D(t - 1), self.p)) if t and self.D(t - 1).size else 0
        return self.dims[t] - r_out - r_in


class SpectralPage:
    """One page; `spaces` may hold one extra total degree used as d_r targets."""

    def __init__(self, r, spaces, differentials, Ntot):
        self.r = r
        self.spaces = spaces
        self.differentials = differentials
        self.Ntot = Ntot

    @property
    def dims(self):
        return {k: v.dim for k, v in self.spaces.items() if sum(k) <= self.Ntot}

    def to_json(self):
        return {"r": self.r,
                "dims": [[n, m, d] for (n, m), d in sorted(self.dims.items())],
                "differentials": [[n, m, M.tolist()] for (n, m), M in sorted(self.differentials.items())]}


def spectral_sequence(F, r_max=None, Ntot=None):
    """Pages E_1..E_{r_max} (and E_infinity as the last entry with r=None).

    Bidegree keys are (s, t-s).  Raises LiftFailed if a differential image
    is not a cocycle of the next page (cannot happen for a filtered complex).
    """
    p = F.p
    Ntot = F.top if Ntot is None else min(Ntot, F.top)
    lo, hi = F.filtration_range()
    if r_max is None:
        r_max = hi - lo + 2
    pages = []
    for r in list(range(1, r_max + 1)) + [None]:
        spaces = {}
        for t in range(Ntot + 2 if r is not None else Ntot + 1):
            if t >= len(F.dims):
                continue
            for s in range(lo, hi + 1):
                spaces[(s, t - s)] = F.page_space(r, s, t)
        diffs = {}
        if r is not None:
            for (s, m), E in spaces.items():
                t = s + m
                if t > Ntot:
                    continue
                tgt = spaces.get((s + r, m - r + 1))
                if E.dim == 0:
                    diffs[(s, m)] = np.zeros((tgt.dim if tgt else 0, 0), dtype=np.int64)
                    continue
                img = (E.reps @ F.D(t).T) % p
                if tgt is None:
                    if img.any():
                        raise LiftFailed("d_%d leaves the computed window at (%d,%d)" % (r, s, m))
                    diffs[(s, m)] = np.zeros((0, E.dim), dtype=np.int64)
                    continue
                try:
                    C = tgt.coords(img)
                except NotASubspace as exc:
                    raise LiftFailed("d_%d of a page representative at (%d,%d) is not in Z_r" % (r, s, m)) from exc
                diffs[(s, m)] = C.T % p
        pages.append(SpectralPage(r, spaces, diffs, Ntot))
    return pages


def check_pages(pages, p, Ntot):
    """d_r o d_r = 0 and dim E_{r+1} = dim H(E_r, d_r) inside the window."""
    ok = True
    finite = [pg for pg in pages if pg.r is not None]
    for a, b in zip(finite, finite[1:]):
        r = a.r
        for (s, m), M in a.differentials.items():
            nxt = a.differentials.get((s + r, m - r + 1))
            if nxt is not None and M.size and nxt.size and ((nxt @ M) % p).any():
                ok = False
            if s + m > Ntot - 1:
                continue
            prev = a.differentials.get((s - r, m + r - 1))
            rk_out = rank(FpMatrix.from_dense(M, p)) if M.size else 0
            rk_in = rank(FpMatrix.from_dense(prev, p)) if prev is not None and prev.size else 0
            if b.dims.get((s, m), 0) != a.dims[(s, m)] - rk_out - rk_in:
                ok = False
    return ok


def antidiagonal_sums(page, Ntot):
    out = [0] * (Ntot + 1)
    for (s, m), d in page.dims.items():
        if 0 <= s + m <= Ntot:
            out[s + m] += d
    return out


# ---------------------------------------------------------------- sources

def filtered_from_double(D):
    """Tot of an explicit DoubleComplex, filtered by columns."""
    C = D.total()
    dims = [D.offsets(t)[1] for t in range(D.Ntot + 2)]
    return FilteredComplex(D.p, dims, C.d, [D.filtration(t) for t in range(D.Ntot + 2)],
                           name="Tot " + D.name)


def filtered_from_reduction(R, Ntot):
    """Reduced Tot complex of a TotScheme, filtered by the P-degree of cells."""
    dims = [len(R.essential(t)) for t in range(Ntot + 2)]
    filt = [np.array([R.scheme.column(c) for c in R.essential(t)], dtype=np.int64) for t in range(Ntot + 2)]

    def product(t1, X1, t2, X2):
        ev = R.cup_evaluator(t1, X1, t2, X2)
        return R.iota_values(t1 + t2, ev).T % R.p

    return FilteredComplex(R.p, dims, R.coboundary, filt, product=product, name="reduced Tot")


def random_double_complex(rng, p, size=4, max_dim=6):
    """Random first-quadrant double complex with anticommuting differentials.

    A direct sum of small pieces placed at random bidegrees: single cells,
    squares, and staircases x_0..x_k, y_1..y_{k+1} with x_i at (n+i, m-i),
    y_j at (n+j, m-j+1), d_h x_i = c_i y_{i+1}, d_v x_{i+1} = -c_i y_{i+1}.
    A staircase of length k carries a nonzero d_{k+1}.  Each bidegree is then
    conjugated by a random invertible matrix.
    """
    from .homalg import DoubleComplex
    blocks = {(n, m): 0 for n in range(size) for m in range(size)}
    H, V = {}, {}

    def take(cells):
        if not all(k in blocks and blocks[k] < max_dim for k in cells):
            return None
        out = []
        for k in cells:
            out.append(blocks[k])
            blocks[k] += 1
        return out

    def unit():
        return int(rng.integers(1, p))

    for _ in range(int(rng.integers(4, 3 * size * size))):
        kind = int(rng.integers(0, 3))
        n, m = int(rng.integers(0, size)), int(rng.integers(0, size))
        if kind == 0:
            take([(n, m)])
        elif kind == 1:
            cells = [(n, m), (n + 1, m), (n, m + 1), (n + 1, m + 1)]
            sl = take(cells)
            if sl is None:
                continue
            a, b, c, d = sl
            u, v = unit(), unit()
            H.setdefault((n, m), []).append((b, a, u))
            V.setdefault((n, m), []).append((c, a, v))
            V.setdefault((n + 1, m), []).append((d, b, v))
            H.setdefault((n, m + 1), []).append((d, c, (-u) % p))
        else:
            k = int(rng.integers(0, 3))
            xs = [(n + i, m - i) for i in range(k + 1)]
            ys = [(n + j, m - j + 1) for j in range(1, k + 2)]
            sl = take(xs + ys)
            if sl is None:
                continue
            xi, yi = sl[:k + 1], sl[k + 1:]
            for i in range(k + 1):
                c = unit()
                H.setdefault(xs[i], []).append((yi[i], xi[i], c))
                if i < k:
                    V.setdefault(xs[i + 1], []).append((yi[i], xi[i + 1], (-c) % p))
    Q, Qi = {}, {}
    for k, dim in blocks.items():
        while True:
            A = rng.integers(0, p, size=(dim, dim)) % p
            if dim == 0 or rank(FpMatrix.from_dense(A, p)) == dim:
                break
        Q[k] = A
        Qi[k] = _inverse(A, p) if dim else A

    def dims_fn(n, m):
        return blocks.get((n, m), 0)

    def build(entries, src, tgt):
        M = np.zeros((dims_fn(*tgt), dims_fn(*src)), dtype=np.int64)
        for r, c, v in entries.get(src, []):
            M[r, c] = v
        if M.size:
            M = (Q[tgt] @ M @ Qi[src]) % p
        return FpMatrix.from_dense(M, p)

    def dh(n, m):
        return build(H, (n, m), (n + 1, m))

    def dv(n, m):
        return build(V, (n, m), (n, m + 1))

    return DoubleComplex(p, dims_fn, dh, dv, 2 * size, name="random")


def _inverse(A, p):
    n = A.shape[0]
    aug = np.concatenate([A % p, np.eye(n, dtype=np.int64)], axis=1)
    R, piv = rref(aug, p, pivot_cols=n)
    return R[:, n:] % p


# ----------------------------------------------------------- E_infinity ring

class BigradedAlgebra(TruncatedAlgebra):
    """Associated bigraded algebra of a filtered ring, keys (s, t-s)."""

    def __init__(self, p, dims, table, N, provenance=""):
        super().__init__(p, dims, table, N, provenance=provenance)


def einfty_bigraded_algebra(F, Ntot, pages=None):
    """Bigraded algebra of the column filtration on H^*(Tot).

    Needs F.product(t1, X1, t2, X2) giving products of cocycles (rows) as
    rows of the degree t1+t2 complex.
    """
    if F.product is None:
        raise ValueError("filtered complex carries no product")
    p = F.p
    lo, hi = F.filtration_range()
    spaces = {}
    for t in range(Ntot + 1):
        for s in range(lo, hi + 1):
            if s >= 0 and t - s >= 0:
                spaces[(s, t - s)] = F.page_space(None, s, t)
    dims = {k: v.dim for k, v in spaces.items()}
    table = {}
    for k1, E1 in spaces.items():
        for k2, E2 in spaces.items():
            t = sum(k1) + sum(k2)
            if t > Ntot or E1.dim == 0 or E2.dim == 0:
                continue
            k3 = (k1[0] + k2[0], k1[1] + k2[1])
            Y = F.product(sum(k1), E1.reps, sum(k2), E2.reps)
            E3 = spaces.get(k3)
            if E3 is None or E3.dim == 0:
                table[(k1, k2)] = np.zeros((E1.dim, E2.dim, 0), dtype=np.int64)
                continue
            C = E3.coords(Y)
            table[(k1, k2)] = C.reshape(E1.dim, E2.dim, E3.dim) % p
    return BigradedAlgebra(p, dims, table, Ntot, provenance=F.name)


def bigraded_iso_search(B1, B2, Ntot=None, cap=200000):
    return algebra_iso_search(B1, B2, Ntot, cap=cap)
