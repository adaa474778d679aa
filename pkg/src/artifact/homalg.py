"""Cochain complexes of groups: bar cochains, cup products, double complexes.

Conventions.  A cochain f of degree n on G is a function G^n -> F_p in
inhomogeneous coordinates, stored as a flat array indexed by the mixed-radix
code of (g_1, ..., g_n) with g_1 most significant.  The differential carries
the global sign (-1)^{n+1}:

    (delta f)(g_1..g_{n+1}) = (-1)^{n+1} [ f(g_2..) + sum_j (-1)^j f(..g_j g_{j+1}..)
                                            + (-1)^{n+1} f(g_1..g_n) ]

and the cup product is (f1 u f2)(g) = (-1)^{n1 n2} f1(g_1..g_{n1}) f2(g_{n1+1}..).

Hom(B(P), C^*(K)) double complexes use d^h f = (-1)^{n+m+1} f o d_A and
d^v f = d_{C(K)} o f, where P acts on K-cochains through (q.f)(k) = f(q^{-1}.k).
Cohomology itself is computed on the reduced complexes of `collapse`; the
explicit matrices here are for cochain-level checks and small cross-checks.
"""
import itertools
import json

import numpy as np

from .collapse import BarScheme, MorseReduction, TotScheme, pc_presentation, DEFAULT_BUDGET
from .errors import BudgetExceeded, DegreeOverflow, DimensionMismatch
from .fplinalg import FpMatrix, rank, subquotient, kernel_matrix, image_basis

CHUNK = 1 << 20


def decode(idx, base, n):
    """Digits (first most significant) of mixed-radix codes, shape (len, n)."""
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty((len(idx), n), dtype=np.int64)
    r = idx.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = r % base
        r //= base
    return out


def encode(D, base):
    D = np.asarray(D, dtype=np.int64)
    idx = np.zeros(D.shape[0], dtype=np.int64)
    for j in range(D.shape[1]):
        idx = idx * base + D[:, j]
    return idx


def _sgn(e, p):
    return 1 if e % 2 == 0 else p - 1


def bar_face_terms(T, D):
    """Index arrays and unsigned alternating coefficients of the bar faces.

    For cells D (R, m) returns a list of (codes-of-faces (R,) , coefficient, is_degenerate mask)
    with the chain boundary d = face_0 + sum_j (-1)^j merge_j + (-1)^m face_m.
    """
    R, m = D.shape
    base = T.shape[0]
    out = [(encode(D[:, 1:], base), 1, None)]
    for j in range(1, m):
        merged = T[D[:, j - 1], D[:, j]]
        F = np.concatenate([D[:, :j - 1], merged[:, None], D[:, j + 1:]], axis=1)
        out.append((encode(F, base), -1 if j % 2 else 1, merged == 0))
    out.append((encode(D[:, :-1], base), -1 if m % 2 else 1, None))
    return out


# ------------------------------------------------------------ single complexes

class CochainComplex:
    """Finite cochain complex given by dims and differential matrices."""

    def __init__(self, p, dims, differentials, N=None, labels=None, product=None, name=""):
        self.p = p
        self.dims = list(dims)
        self._d = dict(differentials) if isinstance(differentials, dict) else None
        self._dfun = differentials if callable(differentials) else None
        self.N = len(self.dims) - 1 if N is None else N
        self.labels = labels
        self.product = product
        self.name = name
        self._coh = {}

    def dim(self, n):
        if n < 0:
            return 0
        return self.dims[n] if n < len(self.dims) else 0

    def d(self, n):
        """delta^n : C^n -> C^{n+1}."""
        if self._d is not None:
            if n in self._d:
                return self._d[n]
            return FpMatrix.zeros(self.p, (self.dim(n + 1), self.dim(n)))
        return self._dfun(n)

    def check_d_squared(self, n):
        a, b = self.d(n), self.d(n + 1)
        if a.shape[0] == 0 or b.shape[0] == 0 or a.shape[1] == 0:
            return True
        return not (b.to_dense() @ a.to_dense() % self.p).any()

    def cohomology(self, n):
        if n not in self._coh:
            p = self.p
            dim = self.dim(n)
            Z = kernel_matrix(self.d(n)).T if dim else np.zeros((0, 0), dtype=np.int64)
            if n == 0 or self.dim(n - 1) == 0 or dim == 0:
                B = np.zeros((0, dim), dtype=np.int64)
            else:
                B = image_basis(self.d(n - 1))
            self._coh[n] = subquotient(Z, B, p, ambient=dim)
        return self._coh[n]

    def cohomology_dims(self, N=None):
        N = self.N if N is None else N
        out = []
        for n in range(N + 1):
            dn = self.dim(n)
            r_out = rank(self.d(n)) if dn and self.dim(n + 1) else 0
            r_in = rank(self.d(n - 1)) if n and dn and self.dim(n - 1) else 0
            out.append(dn - r_out - r_in)
        return out

    def to_json(self, N=None):
        N = self.N if N is None else N
        diffs = []
        for n in range(N):
            r, c, v = self.d(n).triplets()
            diffs.append({"degree": n, "shape": [self.dim(n + 1), self.dim(n)],
                          "rows": r.tolist(), "cols": c.tolist(), "vals": v.tolist()})
        return {"p": self.p, "name": self.name, "dims": self.dims[:N + 1], "differentials": diffs}


class BarCochains(CochainComplex):
    """Inhomogeneous bar cochains C^*(G; F_p) with trivial coefficients.

    Nothing of size |G|^n is built until asked for; every materialization is
    checked against the budget.  Cohomology goes through the Morse reduction
    of the normalized bar complex.
    """

    def __init__(self, G, N, budget=DEFAULT_BUDGET, koszul=True):
        self.G = G
        self.order = G.order
        self.T = G.table
        self.budget = budget
        self.koszul = koszul
        super().__init__(G.p, [G.order ** n for n in range(N + 1)], self._bar_d, N=N,
                         name=G.name or "C*(G)")
        self._red = None
        self._dcache = {}

    # sizes
    def _need(self, what, size):
        if size > self.budget:
            raise BudgetExceeded(what, size, self.budget)

    def cells(self, n, idx=None):
        if idx is None:
            self._need("cochains in degree %d" % n, self.order ** n)
            idx = np.arange(self.order ** n, dtype=np.int64)
        return decode(idx, self.order, n)

    # differential
    def _bar_d(self, n):
        if n in self._dcache:
            return self._dcache[n]
        R = self.order ** (n + 1)
        self._need("entries of delta^%d" % n, R * (n + 2))
        p = self.p
        s = 1 if (n + 1) % 2 == 0 else -1
        rows, cols, vals = [], [], []
        for start in range(0, R, CHUNK):
            idx = np.arange(start, min(R, start + CHUNK), dtype=np.int64)
            D = decode(idx, self.order, n + 1)
            for codes, c, _ in bar_face_terms(self.T, D):
                rows.append(idx)
                cols.append(codes)
                vals.append(np.full(len(idx), (s * c) % p, dtype=np.int64))
        M = FpMatrix.from_triplets(p, (R, self.order ** n), np.concatenate(rows),
                                   np.concatenate(cols), np.concatenate(vals))
        self._dcache[n] = M
        return M

    def coboundary(self, f, n):
        """delta f for a dense cochain f of degree n (vectorized, no matrix)."""
        f = np.asarray(f, dtype=np.int64)
        if len(f) != self.order ** n:
            raise DimensionMismatch("cochain of length %d is not of degree %d" % (len(f), n))
        R = self.order ** (n + 1)
        self._need("cochains in degree %d" % (n + 1), R)
        p = self.p
        s = 1 if (n + 1) % 2 == 0 else -1
        out = np.zeros(R, dtype=np.int64)
        for start in range(0, R, CHUNK):
            idx = np.arange(start, min(R, start + CHUNK), dtype=np.int64)
            D = decode(idx, self.order, n + 1)
            acc = np.zeros(len(idx), dtype=np.int64)
            for codes, c, _ in bar_face_terms(self.T, D):
                acc += c * f[codes]
            out[start:start + len(idx)] = (s * acc) % p
        return out

    def cup(self, f1, n1, f2, n2):
        if n1 + n2 > self.N:
            raise DegreeOverflow("cup lands in degree %d above cutoff %d" % (n1 + n2, self.N))
        self._need("cochains in degree %d" % (n1 + n2), self.order ** (n1 + n2))
        f1 = np.asarray(f1, dtype=np.int64)
        f2 = np.asarray(f2, dtype=np.int64)
        sign = -1 if (self.koszul and (n1 * n2) % 2) else 1
        return (sign * np.outer(f1, f2).ravel()) % self.p

    def unit(self):
        return np.ones(1, dtype=np.int64)

    def act(self, perm, f, n):
        """(q.f)(k_1..k_n) = f(q^{-1}.k_1, ..), with perm the permutation of q^{-1}."""
        perm = np.asarray(perm, dtype=np.int64)
        D = self.cells(n)
        return np.asarray(f, dtype=np.int64)[encode(perm[D], self.order)]

    def is_normalized(self, f, n):
        D = self.cells(n)
        return not np.asarray(f)[(D == 0).any(axis=1)].any() if n else True

    # cohomology through the reduced complex
    @property
    def reduction(self):
        if self._red is None:
            self._red = MorseReduction(BarScheme(self.G), self.budget)
        return self._red

    def cohomology_dims(self, N=None, method="reduced"):
        N = self.N if N is None else N
        if method == "explicit":
            return CochainComplex.cohomology_dims(self, N)
        return self.reduction.dims(N)

    def evaluator(self, fs, n):
        """Evaluator over cell tuples for dense cochains fs (list or 2-d array)."""
        F = np.atleast_2d(np.asarray(fs, dtype=np.int64))
        order = self.order

        def ev(cells):
            if n == 0:
                return np.repeat(F[:, :1].T, len(cells), axis=0)
            idx = encode(np.asarray(cells, dtype=np.int64).reshape(len(cells), n), order)
            return F[:, idx].T

        return ev

    def class_coords(self, fs, n):
        """Coordinates in H^n of normalized cocycles (rows of fs)."""
        return self.reduction.class_coords(n, self.evaluator(fs, n))

    def representative(self, n, coords):
        """Dense normalized cocycle representing the class with given coordinates."""
        R = self.reduction
        H = R.cohomology(n)
        z = H.lift(np.asarray(coords, dtype=np.int64))
        D = self.cells(n)
        out = np.zeros(len(D), dtype=np.int64)
        if n == 0:
            return (z[:1] * np.ones(1, dtype=np.int64)) % self.p
        mask = ~(D == 0).any(axis=1)
        sel = np.nonzero(mask)[0]
        cells = [tuple(r) for r in D[sel].tolist()]
        vals = R.representative_values(n, z.reshape(1, -1), cells)[:, 0]
        out[sel] = vals
        return out % self.p


def bar_cochains(G, N, budget=DEFAULT_BUDGET, koszul=True):
    return BarCochains(G, N, budget=budget, koszul=koszul)


# ------------------------------------------------------------- double complexes

class DoubleComplex:
    """First-quadrant double complex with explicit bidegree matrices."""

    def __init__(self, p, dims, dh, dv, Ntot, product=None, name=""):
        self.p = p
        self._dims = dims
        self._dh = dh
        self._dv = dv
        self.Ntot = Ntot
        self.product = product
        self.name = name
        self._hcache = {}
        self._vcache = {}

    def dim(self, n, m):
        if n < 0 or m < 0:
            return 0
        return self._dims(n, m)

    def dh(self, n, m):
        """(n, m) -> (n+1, m)."""
        if (n, m) not in self._hcache:
            self._hcache[(n, m)] = self._dh(n, m)
        return self._hcache[(n, m)]

    def dv(self, n, m):
        """(n, m) -> (n, m+1)."""
        if (n, m) not in self._vcache:
            self._vcache[(n, m)] = self._dv(n, m)
        return self._vcache[(n, m)]

    def bidegrees(self, t):
        return [(n, t - n) for n in range(t + 1)]

    def offsets(self, t):
        off = {}
        acc = 0
        for n, m in self.bidegrees(t):
            off[(n, m)] = acc
            acc += self.dim(n, m)
        return off, acc

    def total_d(self, t):
        """Total differential Tot^t -> Tot^{t+1} as one sparse matrix."""
        src, ns = self.offsets(t)
        dst, nd = self.offsets(t + 1)
        rows, cols, vals = [], [], []
        for (n, m), o in src.items():
            for M, tgt in ((self.dh(n, m), (n + 1, m)), (self.dv(n, m), (n, m + 1))):
                r, c, v = M.triplets()
                rows.append(r + dst[tgt])
                cols.append(c + o)
                vals.append(v)
        if not rows:
            return FpMatrix.zeros(self.p, (nd, ns))
        return FpMatrix.from_triplets(self.p, (nd, ns), np.concatenate(rows), np.concatenate(cols),
                                      np.concatenate(vals))

    def total(self):
        dims = [self.offsets(t)[1] for t in range(self.Ntot + 2)]
        return CochainComplex(self.p, dims, {t: self.total_d(t) for t in range(self.Ntot + 1)},
                              N=self.Ntot, name="Tot " + self.name)

    def filtration(self, t):
        """Column index of each basis vector of Tot^t."""
        off, size = self.offsets(t)
        filt = np.zeros(size, dtype=np.int64)
        for (n, m), o in off.items():
            filt[o:o + self.dim(n, m)] = n
        return filt

    def check(self):
        """d_h^2 = 0, d_v^2 = 0 and the total differential squares to zero."""
        p = self.p
        for t in range(self.Ntot):
            for n, m in self.bidegrees(t):
                for a, b in ((self.dh(n, m), self.dh(n + 1, m)), (self.dv(n, m), self.dv(n, m + 1))):
                    if a.shape[1] and b.shape[0] and ((b.to_dense() @ a.to_dense()) % p).any():
                        return False
        for t in range(self.Ntot):
            a, b = self.total_d(t), self.total_d(t + 1)
            if a.shape[1] and b.shape[0] and ((b.to_dense() @ a.to_dense()) % p).any():
                return False
        return True

    def to_json(self):
        out = {"p": self.p, "name": self.name, "Ntot": self.Ntot, "bidegrees": []}
        for t in range(self.Ntot + 1):
            for n, m in self.bidegrees(t):
                entry = {"n": n, "m": m, "dim": self.dim(n, m)}
                for key, M in (("dh", self.dh(n, m)), ("dv", self.dv(n, m))):
                    r, c, v = M.triplets()
                    entry[key] = {"shape": list(M.shape), "rows": r.tolist(), "cols": c.tolist(),
                                  "vals": v.tolist()}
                out["bidegrees"].append(entry)
        return out


class HomDoubleComplex(DoubleComplex):
    """Hom_P(B(P), C^*(K)) in inhomogeneous coordinates, cells P^n x K^m.

    `perms[q]` is the permutation of K induced by q in P.  Trivial perms give
    the iterated-Hom form of C^*(P x K).
    """

    def __init__(self, K, P, perms, Ntot, budget=DEFAULT_BUDGET, name=""):
        self.K, self.P = K, P
        self.perms = np.asarray(perms, dtype=np.int64)
        self.inv_perms = self.perms[P.inv]
        self.budget = budget
        for t in range(Ntot + 2):
            for n in range(t + 1):
                size = P.order ** n * K.order ** (t - n)
                if size > budget:
                    raise BudgetExceeded("bidegree (%d,%d)" % (n, t - n), size, budget)
        super().__init__(K.p, self._dims_fn, self._dh_fn, self._dv_fn, Ntot, name=name)

    def _dims_fn(self, n, m):
        return self.P.order ** n * self.K.order ** m

    def _split(self, idx, n, m):
        a, b = self.P.order, self.K.order
        sig = decode(idx // b ** m, a, n)
        kap = decode(idx % b ** m, b, m)
        return sig, kap

    def _join(self, sig, kap):
        a, b = self.P.order, self.K.order
        return encode(sig, a) * b ** kap.shape[1] + encode(kap, b)

    def _dh_fn(self, n, m):
        p = self.p
        rows_n = self.dim(n + 1, m)
        idx = np.arange(rows_n, dtype=np.int64)
        sig, kap = self._split(idx, n + 1, m)
        s = 1 if (n + m + 1) % 2 == 0 else -1
        TP = self.P.table
        terms = []
        acted = self.inv_perms[sig[:, 0]][np.arange(len(idx))[:, None], kap] if m else kap
        terms.append((self._join(sig[:, 1:], acted), 1))
        for i in range(1, n + 1):
            merged = TP[sig[:, i - 1], sig[:, i]]
            S = np.concatenate([sig[:, :i - 1], merged[:, None], sig[:, i + 1:]], axis=1)
            terms.append((self._join(S, kap), -1 if i % 2 else 1))
        terms.append((self._join(sig[:, :-1], kap), -1 if (n + 1) % 2 else 1))
        return self._assemble(idx, terms, s, (rows_n, self.dim(n, m)))

    def _dv_fn(self, n, m):
        rows_n = self.dim(n, m + 1)
        idx = np.arange(rows_n, dtype=np.int64)
        sig, kap = self._split(idx, n, m + 1)
        s = 1 if (m + 1) % 2 == 0 else -1
        terms = []
        for codes, c, _ in bar_face_terms(self.K.table, kap):
            kf = decode(codes, self.K.order, m)
            terms.append((self._join(sig, kf), c))
        return self._assemble(idx, terms, s, (rows_n, self.dim(n, m)))

    def _assemble(self, idx, terms, s, shape):
        p = self.p
        rows = np.concatenate([idx for _ in terms])
        cols = np.concatenate([c for c, _ in terms])
        vals = np.concatenate([np.full(len(idx), (s * c) % p, dtype=np.int64) for _, c in terms])
        return FpMatrix.from_triplets(p, shape, rows, cols, vals)

    def cup(self, f1, bideg1, f2, bideg2):
        """Product of homogeneous cochains: sign (-1)^{n1(n2+m2)+m1 m2}, back part acted by q^{-1}."""
        n1, m1 = bideg1
        n2, m2 = bideg2
        n, m = n1 + n2, m1 + m2
        if n + m > self.Ntot:
            raise DegreeOverflow("product lands in total degree %d" % (n + m))
        size = self.dim(n, m)
        if size > self.budget:
            raise BudgetExceeded("bidegree (%d,%d)" % (n, m), size, self.budget)
        p = self.p
        idx = np.arange(size, dtype=np.int64)
        sig, kap = self._split(idx, n, m)
        q = np.zeros(size, dtype=np.int64)
        for j in range(n1):
            q = self.P.table[q, sig[:, j]]
        kb = kap[:, m1:]
        if m2:
            kb = self.inv_perms[q][np.arange(size)[:, None], kb]
        a = np.asarray(f1)[self._join(sig[:, :n1], kap[:, :m1])]
        b = np.asarray(f2)[self._join(sig[:, n1:], kb)]
        e = (n1 * (n2 + m2) + m1 * m2) % 2
        return ((-1 if e else 1) * a * b) % p


def semidirect_double_complex(K, P, act, Ntot, budget=DEFAULT_BUDGET):
    """Explicit Hom_P(B(P), C^*(K)) for K x| P (act: ActionHom or perms array)."""
    perms = act.perms if hasattr(act, "perms") else np.asarray(act)
    return HomDoubleComplex(K, P, perms, Ntot, budget, name="%s x| %s" % (K.name, P.name))


def _tensor_tot_direct(G1, G2, Ntot, p):
    """Hom(Tot(B(G1) (x) B(G2)), F_p), assembled cell by cell from the tensor
    chain differential d(a (x) b) = d a (x) b + (-1)^n a (x) d b and the global
    dual sign (-1)^{t+1}."""
    a, b = G1.order, G2.order
    mats_h, mats_v = {}, {}
    for t in range(Ntot + 1):
        for n in range(t + 1):
            m = t - n
            s = 1 if (t + 1) % 2 == 0 else -1
            # horizontal part: cells of bidegree (n+1, m)
            R = a ** (n + 1) * b ** m
            idx = np.arange(R, dtype=np.int64)
            sig = decode(idx // b ** m, a, n + 1)
            kap_code = idx % b ** m
            rows, cols, vals = [], [], []
            for codes, c, _ in bar_face_terms(G1.table, sig):
                rows.append(idx)
                cols.append(codes * b ** m + kap_code)
                vals.append(np.full(R, (s * c) % p, dtype=np.int64))
            mats_h[(n, m)] = FpMatrix.from_triplets(p, (R, a ** n * b ** m), np.concatenate(rows),
                                                    np.concatenate(cols), np.concatenate(vals))
            R = a ** n * b ** (m + 1)
            idx = np.arange(R, dtype=np.int64)
            sig_code = idx // b ** (m + 1)
            kap = decode(idx % b ** (m + 1), b, m + 1)
            sv = s * (-1 if n % 2 else 1)
            rows, cols, vals = [], [], []
            for codes, c, _ in bar_face_terms(G2.table, kap):
                rows.append(idx)
                cols.append(sig_code * b ** m + codes)
                vals.append(np.full(R, (sv * c) % p, dtype=np.int64))
            mats_v[(n, m)] = FpMatrix.from_triplets(p, (R, a ** n * b ** m), np.concatenate(rows),
                                                    np.concatenate(cols), np.concatenate(vals))
    return mats_h, mats_v


def _kron(A, B):
    """Kronecker product of FpMatrices (row/col codes: A index major)."""
    ra, ca, va = A.triplets()
    rb, cb, vb = B.triplets()
    rows = (ra[:, None] * B.shape[0] + rb[None, :]).ravel()
    cols = (ca[:, None] * B.shape[1] + cb[None, :]).ravel()
    vals = (va[:, None] * vb[None, :]).ravel()
    return FpMatrix.from_triplets(A.p, (A.shape[0] * B.shape[0], A.shape[1] * B.shape[1]), rows, cols, vals)


class TensorDoubleComplex(HomDoubleComplex):
    """Hom(B(G1) (x) B(G2), F_p) as the iterated Hom(B(G1), C^*(G2)).

    `check_adjunction` rebuilds every matrix from the tensor chain complex and
    compares them entrywise."""

    def __init__(self, G1, G2, Ntot, budget=DEFAULT_BUDGET):
        perms = np.tile(np.arange(G2.order), (G1.order, 1))
        super().__init__(G2, G1, perms, Ntot, budget, name="%s (x) %s" % (G1.name, G2.name))
        self.G1, self.G2 = G1, G2

    def iterated_hom_matrices(self):
        """d^h = (-1)^{n+m+1} (d_A)^* (x) 1 and d^v = 1 (x) delta_{C(G2)} as Kronecker products."""
        p = self.p
        B1 = BarCochains(self.G1, self.Ntot + 1, self.budget)
        B2 = BarCochains(self.G2, self.Ntot + 1, self.budget)
        h, v = {}, {}
        for t in range(self.Ntot + 1):
            for n in range(t + 1):
                m = t - n
                # B1.d(n) carries (-1)^{n+1}; rescale to (-1)^{n+m+1}
                D1 = B1.d(n)
                r, c, val = D1.triplets()
                if m % 2:
                    val = (-val) % p
                D1s = FpMatrix.from_triplets(p, D1.shape, r, c, val)
                h[(n, m)] = _kron(D1s, FpMatrix.identity(p, self.G2.order ** m))
                v[(n, m)] = _kron(FpMatrix.identity(p, self.G1.order ** n), B2.d(m))
        return h, v

    def check_adjunction(self):
        h1, v1 = _tensor_tot_direct(self.G1, self.G2, self.Ntot, self.p)
        h2, v2 = self.iterated_hom_matrices()
        ok = True
        for key in h1:
            ok &= (h1[key] == self.dh(*key)) and (h2[key] == self.dh(*key))
            ok &= (v1[key] == self.dv(*key)) and (v2[key] == self.dv(*key))
        return bool(ok)


def tensor_double_complex(G1, G2, Ntot, budget=DEFAULT_BUDGET):
    return TensorDoubleComplex(G1, G2, Ntot, budget)


# ------------------------------------------------------------ reduced routes

def semidirect_reduction(K, P, act, budget=DEFAULT_BUDGET):
    """Reduced Tot complex of Hom_P(B(P), C^*(K)); filtration by the P-degree."""
    perms = act.perms if hasattr(act, "perms") else act
    return MorseReduction(TotScheme(K, P, perms), budget)


def tensor_reduction(G1, G2, budget=DEFAULT_BUDGET):
    """Reduced tensor double complex: both factors collapsed."""
    return MorseReduction(TotScheme(G2, G1, None, normalize_P=True, match_P=True), budget)


def cohomology_dims(G, N, method="reduced", budget=DEFAULT_BUDGET):
    if method == "explicit":
        return BarCochains(G, N + 1, budget).cohomology_dims(N, method="explicit")
    return MorseReduction(BarScheme(G), budget).dims(N)


def abelian_pattern(d, N):
    """sum_{2i+j=n} binom(i+d-1, d-1) binom(d, j): dims of Lambda[d] (x) Poly[d]."""
    from math import comb
    out = []
    for n in range(N + 1):
        s = 0
        for j in range(0, min(d, n) + 1):
            if (n - j) % 2 == 0:
                i = (n - j) // 2
                s += comb(i + d - 1, d - 1) * comb(d, j)
        out.append(s)
    return out


# ----------------------------------------------------------------- Nakaoka

def koszul_sign(degrees, perm):
    """Sign of moving factor i to position perm[i] for graded factors."""
    s = 0
    n = len(perm)
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j] and degrees[i] % 2 and degrees[j] % 2:
                s += 1
    return s % 2


def tensor_power_module(dims_G, n, S_perms, N, p):
    """Graded pieces of the n-fold tensor power of a graded space with the
    Koszul-signed permutation action.

    Returns {q: (basis list, action matrices per element of S)} for q <= N.
    The basis element (d_1, i_1, ..., d_n, i_n) is the tensor of the i-th
    basis vector in degree d_l in slot l.
    """
    per_deg = [(d, i) for d in range(min(N, len(dims_G) - 1) + 1) for i in range(dims_G[d])]
    out = {}
    for q in range(N + 1):
        basis = [t for t in itertools.product(per_deg, repeat=n) if sum(x[0] for x in t) == q]
        index = {b: k for k, b in enumerate(basis)}
        mats = []
        for s in S_perms:
            M = np.zeros((len(basis), len(basis)), dtype=np.int64)
            for k, b in enumerate(basis):
                new = [None] * n
                for i in range(n):
                    new[s[i]] = b[i]
                e = koszul_sign([x[0] for x in b], s)
                M[index[tuple(new)], k] = 1 if e == 0 else p - 1
            mats.append(M)
        out[q] = (basis, mats)
    return out


def group_cochains_with_coefficients(S_table, mats, N, p):
    """Cohomology dims of a group (table) with coefficients in a module given by matrices."""
    order = S_table.shape[0]
    dimM = mats[0].shape[0]
    if dimM == 0:
        return [0] * (N + 1)
    M = np.stack(mats)  # (order, dimM, dimM), M[g] acts on column vectors

    def delta(k):
        """C^k -> C^{k+1}; cochain = array (order^k, dimM) flattened."""
        R = order ** (k + 1)
        C = order ** k
        s = 1 if (k + 1) % 2 == 0 else -1
        A = np.zeros((R * dimM, C * dimM), dtype=np.int64)
        D = decode(np.arange(R), order, k + 1)
        faces = bar_face_terms(S_table, D)
        for r in range(R):
            for t, (codes, c, _) in enumerate(faces):
                col = codes[r]
                blk = (s * c) * (M[D[r, 0]] if t == 0 else np.eye(dimM, dtype=np.int64))
                A[r * dimM:(r + 1) * dimM, col * dimM:(col + 1) * dimM] += blk
        return FpMatrix.from_dense(A % p, p)

    ds = [delta(k) for k in range(N + 1)]
    dims = []
    for k in range(N + 1):
        dk = order ** k * dimM
        r_out = rank(ds[k])
        r_in = rank(ds[k - 1]) if k else 0
        dims.append(dk - r_out - r_in)
    return dims


def nakaoka_dims(G, S, N, n=None, dims_G=None, budget=DEFAULT_BUDGET):
    """dims of H^*(S; (x)^n H^*(G)) up to total degree N.

    S is a permutation group (labels are the permutations) or a list of
    generating permutations.
    """
    from .groups import perm_group
    if hasattr(S, "table"):
        Sg = S
    else:
        S = [tuple(x) for x in S]
        Sg = perm_group(S, len(S[0]))
    perms = [tuple(x) for x in Sg.labels]
    n = len(perms[0]) if n is None else n
    p = G.p
    if dims_G is None:
        dims_G = MorseReduction(BarScheme(G), budget).dims(N)
    mod = tensor_power_module(dims_G, n, perms, N, p)
    total = [0] * (N + 1)
    for q in range(N + 1):
        basis, mats = mod[q]
        if not basis:
            continue
        hk = group_cochains_with_coefficients(Sg.table, mats, N - q, p)
        for k, h in enumerate(hk):
            total[q + k] += h
    return total


def complex_json(C):
    return json.dumps(C.to_json(), sort_keys=True)
