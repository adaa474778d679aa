"""Truncated graded algebras and isomorphism testing.

An algebra is stored by its graded pieces (keys are integer degrees, or
(s, t) pairs for bigraded algebras) and structure constants
table[(a, b)][i, j, :] = coordinates of u_i * v_j in the piece a + b.

`algebra_iso_search` looks for a degree-preserving isomorphism by choosing
images of a minimal generating set, one total degree at a time.  The images
in total degree t are constrained linearly by the relations in degree t + 1
(products of the new generators with degree-one classes), and the affine
solution space is enumerated up to a cap.
"""
import itertools
from math import comb

import numpy as np

from .errors import PredicateFail
from .fplinalg import FpMatrix, RowSpace, kernel_matrix, rank, rref


def _total(k):
    return k if isinstance(k, (int, np.integer)) else sum(k)


def _add(a, b):
    if isinstance(a, (int, np.integer)):
        return a + b
    return tuple(x + y for x, y in zip(a, b))


class Verdict:
    ISO = "ISO"
    NONISO = "NONISO"
    INCONCLUSIVE = "INCONCLUSIVE"

    def __init__(self, kind, witness=None, invariant=None, note=""):
        self.kind = kind
        self.witness = witness
        self.invariant = invariant
        self.note = note

    def __eq__(self, other):
        if isinstance(other, str):
            return self.kind == other
        return isinstance(other, Verdict) and self.kind == other.kind

    def __repr__(self):
        extra = self.invariant or self.note
        return "Verdict(%s%s)" % (self.kind, ", " + str(extra) if extra else "")

    def to_json(self):
        out = {"verdict": self.kind}
        if self.invariant:
            out["invariant"] = self.invariant
        if self.note:
            out["note"] = self.note
        if self.witness is not None:
            out["witness"] = [[_key_json(k), M.tolist()] for k, M in sorted(self.witness.items(), key=lambda kv: _sort_key(kv[0]))]
        return out


def _key_json(k):
    return k if isinstance(k, (int, np.integer)) else list(k)


def _sort_key(k):
    return (_total(k), k if isinstance(k, tuple) else (k,))


class TruncatedAlgebra:
    """Graded (or bigraded) algebra known up to total degree N."""

    def __init__(self, p, dims, table, N, provenance=""):
        self.p = p
        if isinstance(dims, (list, tuple)):
            dims = {n: int(d) for n, d in enumerate(dims)}
        self.dims = {k: int(v) for k, v in dims.items() if _total(k) <= N}
        self.table = {k: np.asarray(v, dtype=np.int64) % p for k, v in table.items()}
        self.N = N
        self.provenance = provenance

    def keys(self, total=None):
        ks = sorted(self.dims, key=_sort_key)
        if total is None:
            return ks
        return [k for k in ks if _total(k) == total]

    def dim(self, k):
        return self.dims.get(k, 0)

    def mul_vectors(self, a, U, b, V):
        """Products of row vectors U (in piece a) with rows of V (piece b): (len U, len V, dim a+b)."""
        T = self.table.get((a, b))
        c = _add(a, b)
        if T is None:
            return np.zeros((len(U), len(V), self.dim(c)), dtype=np.int64)
        return np.einsum("ui,vj,ijk->uvk", np.asarray(U, dtype=np.int64), np.asarray(V, dtype=np.int64), T) % self.p

    def unit_key(self):
        return 0 if all(isinstance(k, (int, np.integer)) for k in self.dims) else (0, 0)

    # structure checks
    def check_commutativity(self):
        p = self.p
        for (a, b), T in self.table.items():
            if (b, a) not in self.table:
                continue
            s = -1 if (_total(a) * _total(b)) % 2 else 1
            if ((T - s * self.table[(b, a)].transpose(1, 0, 2)) % p).any():
                return False
        return True

    def check_associativity(self):
        p = self.p
        for a in self.dims:
            for b in self.dims:
                for c in self.dims:
                    if _total(a) + _total(b) + _total(c) > self.N:
                        continue
                    ab, bc = _add(a, b), _add(b, c)
                    if self.dim(a) == 0 or self.dim(b) == 0 or self.dim(c) == 0:
                        continue
                    T1 = self.table.get((a, b))
                    T2 = self.table.get((ab, c))
                    T3 = self.table.get((b, c))
                    T4 = self.table.get((a, bc))
                    if any(t is None for t in (T1, T2, T3, T4)):
                        continue
                    left = np.einsum("ijk,klm->ijlm", T1, T2) % p
                    right = np.einsum("jlk,ikm->ijlm", T3, T4) % p
                    if ((left - right) % p).any():
                        return False
        return True

    # generators
    def decomposable_rows(self, k):
        """Rows spanning products of positive-degree pieces landing in k."""
        rows = []
        for (a, b), T in self.table.items():
            if _add(a, b) != k or _total(a) == 0 or _total(b) == 0:
                continue
            if T.size:
                rows.append(T.reshape(-1, self.dim(k)))
        if not rows:
            return np.zeros((0, self.dim(k)), dtype=np.int64)
        return np.concatenate(rows, axis=0) % self.p

    def generator_rows(self, k):
        """Unit vectors completing a basis of the decomposables (deterministic)."""
        n = self.dim(k)
        D = self.decomposable_rows(k)
        piv = rref(D, self.p)[1] if D.shape[0] else []
        free = [j for j in range(n) if j not in set(piv)]
        out = np.zeros((len(free), n), dtype=np.int64)
        for i, j in enumerate(free):
            out[i, j] = 1
        return out

    def generator_counts(self):
        return {k: self.generator_rows(k).shape[0] for k in self.keys() if _total(k) > 0}

    def invariants(self):
        """Isomorphism invariants: dims, generator counts, product ranks, degree-one annihilators."""
        p = self.p
        inv = {"dims": {str(k): v for k, v in sorted(self.dims.items(), key=lambda kv: _sort_key(kv[0]))},
               "generators": {str(k): v for k, v in sorted(self.generator_counts().items(), key=lambda kv: _sort_key(kv[0]))}}
        ranks = {}
        for (a, b), T in sorted(self.table.items(), key=lambda kv: (_sort_key(kv[0][0]), _sort_key(kv[0][1]))):
            if _total(a) == 0 or _total(b) == 0 or T.size == 0:
                continue
            ranks[str((a, b))] = rank(FpMatrix.from_dense(T.reshape(-1, T.shape[2]), p))
        inv["product_ranks"] = ranks
        ones = self.keys(1)
        ann = {}
        for k in self.keys():
            if _total(k) == 0 or _total(k) + 1 > self.N or self.dim(k) == 0:
                continue
            blocks = [self.table[(k, o)].reshape(self.dim(k), -1) for o in ones
                      if (k, o) in self.table and self.table[(k, o)].size]
            if not blocks:
                ann[str(k)] = self.dim(k)
                continue
            A = np.concatenate(blocks, axis=1)
            ann[str(k)] = self.dim(k) - rank(FpMatrix.from_dense(A, p))
        inv["degree_one_annihilators"] = ann
        return inv

    def to_json(self):
        return {"p": self.p, "N": self.N, "provenance": self.provenance,
                "dims": [[_key_json(k), v] for k, v in sorted(self.dims.items(), key=lambda kv: _sort_key(kv[0]))],
                "table": [[_key_json(a), _key_json(b), T.tolist()]
                          for (a, b), T in sorted(self.table.items(), key=lambda kv: (_sort_key(kv[0][0]), _sort_key(kv[0][1])))]}

    def presentation(self):
        """Human-readable generators and product ranks."""
        lines = ["%s  (p=%d, N=%d)" % (self.provenance or "algebra", self.p, self.N)]
        for k in self.keys():
            g = self.generator_rows(k).shape[0] if _total(k) else 0
            lines.append("  degree %-8s dim %-3d new generators %d" % (k, self.dim(k), g))
        return "\n".join(lines)


class GradedRingTruncation(TruncatedAlgebra):
    def __init__(self, p, dims, table, N, bases=None, provenance=""):
        super().__init__(p, dims, table, N, provenance=provenance)
        self.bases = bases

    @property
    def dim_list(self):
        return [self.dim(n) for n in range(self.N + 1)]


# ------------------------------------------------------------ construction

def ring_from_reduction(R, N, provenance=""):
    """Cohomology ring of a reduced complex (bar or Tot) up to degree N."""
    p = R.p
    reps = {}
    dims = {}
    for n in range(N + 1):
        H = R.cohomology(n)
        dims[n] = H.dim
        reps[n] = H.reps
    if dims[0] == 1:
        reps[0] = np.ones((1, 1), dtype=np.int64)
    table = {}
    for a in range(N + 1):
        for b in range(N + 1 - a):
            if dims[a] == 0 or dims[b] == 0:
                table[(a, b)] = np.zeros((dims[a], dims[b], dims[a + b]), dtype=np.int64)
                continue
            if dims[a + b] == 0:
                table[(a, b)] = np.zeros((dims[a], dims[b], 0), dtype=np.int64)
                continue
            ev = R.cup_evaluator(a, reps[a], b, reps[b])
            vals = R.iota_values(a + b, ev)
            C = R.cohomology(a + b).coords(vals.T)
            table[(a, b)] = C.reshape(dims[a], dims[b], dims[a + b]) % p
    return GradedRingTruncation(p, dims, table, N, bases=reps, provenance=provenance)


def ring_truncation(source, N, budget=None):
    """Source: a Group, a MorseReduction, or a CochainComplex with a reduction."""
    from .collapse import BarScheme, MorseReduction, DEFAULT_BUDGET
    if isinstance(source, MorseReduction):
        return ring_from_reduction(source, N)
    if hasattr(source, "reduction"):
        return ring_from_reduction(source.reduction, N, provenance=getattr(source, "name", ""))
    R = MorseReduction(BarScheme(source), budget or DEFAULT_BUDGET)
    return ring_from_reduction(R, N, provenance=source.name or "H*(G)")


# ------------------------------------------------------------------ search

def _affine_solutions(A, b, p):
    """Particular solution and kernel basis of A x = b, or None."""
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(n, dtype=np.int64), np.eye(n, dtype=np.int64)
    aug = np.concatenate([A % p, (b % p).reshape(-1, 1)], axis=1)
    R, piv = rref(aug, p, pivot_cols=n)
    x = np.zeros(n, dtype=np.int64)
    x[piv] = R[:len(piv), n]
    if ((A @ x - b) % p).any():
        return None
    K = kernel_matrix(FpMatrix.from_dense(A % p, p), method="dense")
    return x, K.T


class _Search:
    def __init__(self, R1, R2, N, cap):
        self.R1, self.R2, self.N, self.cap = R1, R2, N, cap
        self.p = R1.p
        self.visited = 0
        self.gen = {k: R1.generator_rows(k) for k in R1.keys() if _total(k) > 0}
        self.capped = False

    def images_of_products(self, phi, k):
        """Products spanning the decomposables of R1 in piece k and their images."""
        R1, R2 = self.R1, self.R2
        S, T = [], []
        for (a, b), tab in R1.table.items():
            if _add(a, b) != k or _total(a) == 0 or _total(b) == 0 or tab.size == 0:
                continue
            S.append(tab.reshape(-1, R1.dim(k)))
            T.append(R2.mul_vectors(a, phi[a], b, phi[b]).reshape(-1, R2.dim(k)))
        if not S:
            return np.zeros((0, R1.dim(k)), dtype=np.int64), np.zeros((0, R2.dim(k)), dtype=np.int64)
        return np.concatenate(S) % self.p, np.concatenate(T) % self.p

    def assemble(self, phi, k, X):
        """phi_k from the decomposable part and generator images X (rows)."""
        p = self.p
        R1 = self.R1
        S, T = self.images_of_products(phi, k)
        G = self.gen[k]
        n1 = R1.dim(k)
        if S.shape[0]:
            # combinations of products that vanish in R1 must vanish in R2
            L = kernel_matrix(FpMatrix.from_dense(S.T, p), method="dense").T
            if L.shape[0] and ((L @ T) % p).any():
                return None
            aug = np.concatenate([S, np.eye(S.shape[0], dtype=np.int64)], axis=1)
            Rr, piv = rref(aug, p, pivot_cols=n1)
            r = len(piv)
            Dbasis = Rr[:r, :n1]
            Dimg = (Rr[:r, n1:] @ T) % p
        else:
            Dbasis = np.zeros((0, n1), dtype=np.int64)
            Dimg = np.zeros((0, self.R2.dim(k)), dtype=np.int64)
        basis = np.concatenate([Dbasis, G], axis=0)
        imgs = np.concatenate([Dimg, np.asarray(X, dtype=np.int64).reshape(len(G), self.R2.dim(k))], axis=0) % p
        space = RowSpace(basis, p, n1)
        coords = space.coords(np.eye(n1, dtype=np.int64))
        return (coords @ imgs) % p

    def linear_constraints(self, phi, t):
        """Affine map X -> consistency residue at total degree t + 1, one row per condition."""
        p = self.p
        keys_t = [k for k in self.R1.keys(t)]
        unknown = [(k, i, j) for k in keys_t for i in range(self.gen[k].shape[0]) for j in range(self.R2.dim(k))]
        nvar = len(unknown)

        def residue(xvec):
            trial = dict(phi)
            off = 0
            for k in keys_t:
                g = self.gen[k].shape[0]
                X = xvec[off:off + g * self.R2.dim(k)].reshape(g, self.R2.dim(k))
                off += g * self.R2.dim(k)
                M = self.assemble(trial, k, X)
                if M is None:
                    return None
                trial[k] = M
            out = []
            for k in self.R1.keys(t + 1):
                S, T = self.images_of_products(trial, k)
                if S.shape[0] == 0:
                    continue
                L = kernel_matrix(FpMatrix.from_dense(S.T % p, p), method="dense").T
                if L.shape[0]:
                    out.append(((L @ T) % p).ravel())
            return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

        return unknown, nvar, residue

    def run(self):
        phi = {k: np.eye(1, dtype=np.int64) for k in self.R1.keys(0)}
        return self._stage(phi, 1)

    def _stage(self, phi, t):
        p = self.p
        if t > self.N:
            return phi
        keys_t = self.R1.keys(t)
        if not keys_t:
            return self._stage(phi, t + 1)
        if t == self.N:
            return self._complete_last(phi, t)
        unknown, nvar, residue = self.linear_constraints(phi, t)
        # the degree t+1 relations are affine in the new images once t >= 2
        if t >= 2 and nvar:
            r0 = residue(np.zeros(nvar, dtype=np.int64))
            if r0 is None:
                return None
            cols = []
            for v in range(nvar):
                e = np.zeros(nvar, dtype=np.int64)
                e[v] = 1
                rv = residue(e)
                if rv is None:
                    return None
                cols.append((rv - r0) % p)
            A = np.stack(cols, axis=1) if cols and len(r0) else np.zeros((0, nvar), dtype=np.int64)
            sol = _affine_solutions(A, (-r0) % p, p) if A.shape[0] else (np.zeros(nvar, dtype=np.int64), np.eye(nvar, dtype=np.int64))
            if sol is None:
                return None
            x0, K = sol
        else:
            x0, K = np.zeros(nvar, dtype=np.int64), np.eye(nvar, dtype=np.int64)
        dimK = K.shape[0]
        if p ** dimK > self.cap - self.visited:
            self.capped = True
            return None
        for coeffs in itertools.product(range(p), repeat=dimK):
            self.visited += 1
            x = (x0 + np.asarray(coeffs, dtype=np.int64) @ K) % p if dimK else x0
            trial = dict(phi)
            ok = True
            off = 0
            for k in keys_t:
                g = self.gen[k].shape[0]
                X = x[off:off + g * self.R2.dim(k)].reshape(g, self.R2.dim(k))
                off += g * self.R2.dim(k)
                M = self.assemble(trial, k, X)
                if M is None or M.shape[0] != M.shape[1] or rank(FpMatrix.from_dense(M, p)) != M.shape[0]:
                    ok = False
                    break
                trial[k] = M
            if not ok:
                continue
            res = self._stage(trial, t + 1)
            if res is not None:
                return res
            if self.visited > self.cap:
                self.capped = True
                return None
        return None

    def _complete_last(self, phi, t):
        p = self.p
        trial = dict(phi)
        for k in self.R1.keys(t):
            G = self.gen[k]
            n2 = self.R2.dim(k)
            zero = np.zeros((len(G), n2), dtype=np.int64)
            M0 = self.assemble(trial, k, zero)
            if M0 is None:
                return None
            img = M0 if M0.size else np.zeros((0, n2), dtype=np.int64)
            Rimg, piv = rref(img, p) if img.shape[0] else (img, [])
            if len(piv) != self.R1.dim(k) - len(G):
                return None
            free = [j for j in range(n2) if j not in set(piv)]
            if len(free) != len(G):
                return None
            X = np.zeros((len(G), n2), dtype=np.int64)
            for i, j in enumerate(free):
                X[i, j] = 1
            M = self.assemble(trial, k, X)
            if M is None or rank(FpMatrix.from_dense(M, p)) != n2:
                return None
            trial[k] = M
        return trial


def verify_witness(R1, R2, phi):
    """phi (dict key -> matrix of images, rows indexed by R1 basis) is an algebra map and bijective."""
    p = R1.p
    for k, M in phi.items():
        if M.shape != (R1.dim(k), R2.dim(k)) or rank(FpMatrix.from_dense(M, p)) != R1.dim(k):
            return False
    for (a, b), T in R1.table.items():
        if a not in phi or b not in phi or _add(a, b) not in phi:
            continue
        lhs = np.einsum("ijk,kl->ijl", T, phi[_add(a, b)]) % p
        rhs = R2.mul_vectors(a, phi[a], b, phi[b])
        if ((lhs - rhs) % p).any():
            return False
    return True


def algebra_iso_search(R1, R2, N=None, cap=200000):
    if R1.p != R2.p:
        return Verdict(Verdict.NONISO, invariant="different primes")
    N = min(R1.N, R2.N) if N is None else N
    A = TruncatedAlgebra(R1.p, {k: v for k, v in R1.dims.items() if _total(k) <= N},
                         {k: v for k, v in R1.table.items() if _total(k[0]) + _total(k[1]) <= N}, N, R1.provenance)
    B = TruncatedAlgebra(R2.p, {k: v for k, v in R2.dims.items() if _total(k) <= N},
                         {k: v for k, v in R2.table.items() if _total(k[0]) + _total(k[1]) <= N}, N, R2.provenance)
    ia, ib = A.invariants(), B.invariants()
    for name in ("dims", "generators", "product_ranks", "degree_one_annihilators"):
        if ia[name] != ib[name]:
            return Verdict(Verdict.NONISO, invariant="%s differ: %s vs %s" % (name, ia[name], ib[name]))
    s = _Search(A, B, N, cap)
    phi = s.run()
    if phi is None:
        if s.capped:
            return Verdict(Verdict.INCONCLUSIVE, note="search cap %d reached" % cap)
        return Verdict(Verdict.NONISO, invariant="exhaustive search over generator images found no isomorphism")
    if not verify_witness(A, B, phi):
        return Verdict(Verdict.INCONCLUSIVE, note="candidate failed verification")
    return Verdict(Verdict.ISO, witness=phi)


def graded_iso_search(R1, R2, N=None, cap=200000):
    return algebra_iso_search(R1, R2, N, cap)


# ----------------------------------------------------------------- Weigel

def weigel_dims(d, N):
    """Dims of Lambda(y_1..y_d) (x) F_p[x_1..x_d] with |y| = 1, |x| = 2."""
    out = []
    for n in range(N + 1):
        s = 0
        for j in range(0, min(d, n) + 1):
            if (n - j) % 2 == 0:
                i = (n - j) // 2
                s += comb(i + d - 1, d - 1) * comb(d, j)
        out.append(s)
    return out


class WeigelReport:
    def __init__(self, d, computed, expected, powerful, pcentral):
        self.d = d
        self.computed = computed
        self.expected = expected
        self.powerful = powerful
        self.pcentral = pcentral

    @property
    def ok(self):
        return self.computed == self.expected

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"d": self.d, "computed": self.computed, "expected": self.expected,
                "powerful": self.powerful, "pcentral": self.pcentral, "match": self.ok}


def weigel_pattern_check(G, N, budget=None, dims=None):
    """Compare dim H^n(G) with the exterior (x) polynomial count on d = dim Omega_1(G).

    Requires G powerful and p-central (PredicateFail otherwise).  Only the
    dimension consequence is tested.
    """
    from .groups import is_powerful, is_pcentral, omega1
    from .homalg import cohomology_dims
    if not is_pcentral(G):
        raise PredicateFail("group is not p-central")
    if not is_powerful(G):
        raise PredicateFail("group is not powerful")
    om = omega1(G)
    size = len(om) if not hasattr(om, "order") else om.order
    d = 0
    while G.p ** d < size:
        d += 1
    if dims is None:
        from .collapse import DEFAULT_BUDGET
        dims = cohomology_dims(G, N, budget=budget or DEFAULT_BUDGET)
    return WeigelReport(d, list(dims), weigel_dims(d, N), True, True)
