"""Universal models U(p, d), U(p, d, n) and the maps out of them.

The polynomial factor is the minimal model: a free graded-commutative algebra
on x_1..x_d (degree 2) and y_1..y_d (degree 1) with zero differential.  The
maps into bar cochains send

    y_i -> Y_i,   Y_i(g) = i-th coordinate of g mod p
    x_i -> X_i,   X_i(g, h) = carry of g_i + h_i in C_{n_i}, mod p

and a monomial x^a y_S to (X-cups in index order) u (antisymmetrized Y-cup).

Cochains on K^n are kept lazy: only the cells that a check touches are
evaluated, in chunks, so exact identities over all of C^n(K) stay cheap in
memory.
"""
import itertools
from math import factorial

import numpy as np

from .collapse import BarScheme, MorseReduction, DEFAULT_BUDGET
from .errors import (BudgetExceeded, DimensionMismatch, NoLifting, QuasiIsoFails,
                     RankTooLarge)
from .fplinalg import FpMatrix, inv_mod, rank
from .homalg import decode, encode, koszul_sign
from .rings import GradedRingTruncation, weigel_dims

CHUNK = 1 << 18


# ------------------------------------------------------------ lazy cochains

class LazyCochain:
    """A function K^n -> F_p evaluated on batches of cells (R, n) of element indices."""

    degree = 0

    def values(self, D):
        raise NotImplementedError

    def __call__(self, D):
        return self.values(np.asarray(D, dtype=np.int64).reshape(-1, self.degree)) % self.p


class One(LazyCochain):
    def __init__(self, p):
        self.p = p
        self.degree = 0

    def values(self, D):
        return np.ones(len(D), dtype=np.int64)


class Coordinate(LazyCochain):
    """Y_i: reduction mod p of the i-th coordinate."""

    def __init__(self, K, i):
        self.p = K.p
        self.degree = 1
        self.col = np.asarray(K.coords[:, i], dtype=np.int64) % K.p

    def values(self, D):
        return self.col[D[:, 0]]


class Carry(LazyCochain):
    """X_i(g, h) = floor((g_i + h_i) / n_i) mod p."""

    def __init__(self, K, i):
        self.p = K.p
        self.degree = 2
        self.col = np.asarray(K.coords[:, i], dtype=np.int64)
        self.m = int(K.moduli[i])

    def values(self, D):
        return ((self.col[D[:, 0]] + self.col[D[:, 1]]) // self.m) % self.p


class Cup(LazyCochain):
    def __init__(self, a, b):
        self.p = a.p
        self.a, self.b = a, b
        self.degree = a.degree + b.degree
        self.sign = -1 if (a.degree * b.degree) % 2 else 1

    def values(self, D):
        na = self.a.degree
        return self.sign * self.a.values(D[:, :na]) * self.b.values(D[:, na:]) % self.p


class Combination(LazyCochain):
    def __init__(self, terms, p, degree):
        self.p = p
        self.degree = degree
        self.terms = [(int(c) % p, f) for c, f in terms if int(c) % p]

    def values(self, D):
        out = np.zeros(len(D), dtype=np.int64)
        for c, f in self.terms:
            out += c * f.values(D)
        return out % self.p


class Acted(LazyCochain):
    """(q.f)(k_1..k_n) = f(q^{-1} k_1, ..), given the permutation of q^{-1}."""

    def __init__(self, f, perm):
        self.p = f.p
        self.f = f
        self.degree = f.degree
        self.perm = np.asarray(perm, dtype=np.int64)

    def values(self, D):
        return self.f.values(self.perm[D])


class Dense(LazyCochain):
    def __init__(self, vec, order, degree, p):
        self.p = p
        self.vec = np.asarray(vec, dtype=np.int64) % p
        self.order = order
        self.degree = degree
        if len(self.vec) != order ** degree:
            raise DimensionMismatch("dense cochain has the wrong length")

    def values(self, D):
        if self.degree == 0:
            return np.repeat(self.vec[:1], len(D))
        return self.vec[encode(D, self.order)]


def cup_all(fs, p):
    out = One(p)
    for f in fs:
        out = f if out.degree == 0 and isinstance(out, One) else Cup(out, f)
    return out


def iterate_cells(order, n, budget=None, chunk=CHUNK):
    total = order ** n
    if budget is not None and total > budget:
        raise BudgetExceeded("cells of degree %d" % n, total, budget)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield idx, decode(idx, order, n)


def coboundary_values(fs, T, D, p):
    """delta f on cells D (R, n+1) for each lazy cochain f of degree n: (R, len(fs))."""
    R, m = D.shape
    n = m - 1
    s = 1 if m % 2 == 0 else -1
    faces = [(D[:, 1:], 1)]
    for j in range(1, m):
        merged = T[D[:, j - 1], D[:, j]]
        faces.append((np.concatenate([D[:, :j - 1], merged[:, None], D[:, j + 1:]], axis=1), -1 if j % 2 else 1))
    faces.append((D[:, :-1], -1 if m % 2 else 1))
    out = np.zeros((R, len(fs)), dtype=np.int64)
    for F, c in faces:
        for k, f in enumerate(fs):
            if n == 0:
                out[:, k] += c * f.values(np.zeros((R, 0), dtype=np.int64))
            else:
                out[:, k] += c * f.values(F)
    return (s * out) % p


def all_cocycles(fs, K, n, budget=DEFAULT_BUDGET):
    """Exact check that every f (degree n) is a cocycle on all of K^(n+1)."""
    if not fs:
        return True
    T = np.asarray(K.table, dtype=np.int64)
    for _, D in iterate_cells(K.order, n + 1, budget):
        if coboundary_values(fs, T, D, K.p).any():
            return False
    return True


def all_equal(f, g, order, n, budget=DEFAULT_BUDGET):
    """Exact equality of two lazy cochains of degree n over all cells."""
    if n == 0:
        z = np.zeros((1, 0), dtype=np.int64)
        return bool(((f.values(z) - g.values(z)) % f.p == 0).all())
    for _, D in iterate_cells(order, n, budget):
        if ((f.values(D) - g.values(D)) % f.p).any():
            return False
    return True


def materialize(fs, order, n, budget=DEFAULT_BUDGET):
    """Dense matrix (order^n, len(fs)) of values."""
    total = order ** n
    if total * max(1, len(fs)) > budget:
        raise BudgetExceeded("dense cochains of degree %d" % n, total * len(fs), budget)
    out = np.zeros((total, len(fs)), dtype=np.int64)
    if n == 0:
        for k, f in enumerate(fs):
            out[:, k] = f.values(np.zeros((1, 0), dtype=np.int64))
        return out % (fs[0].p if fs else 1)
    for idx, D in iterate_cells(order, n, budget):
        for k, f in enumerate(fs):
            out[idx, k] = f.values(D)
    return out % fs[0].p if fs else out


def evaluator(fs, n):
    """Evaluator over tuples of cells for Morse class coordinates."""

    def ev(cells):
        D = np.asarray(cells, dtype=np.int64).reshape(len(cells), n)
        out = np.zeros((len(cells), len(fs)), dtype=np.int64)
        for k, f in enumerate(fs):
            out[:, k] = f.values(D)
        return out

    return ev


# ----------------------------------------------------------- the algebra

class UniversalModel:
    """Free graded-commutative algebra on x_j (degree 2) and y_j (degree 1).

    For n factors the generators are indexed j = l*d + i (factor l, slot i).
    Basis monomials are pairs (a, S): exponent tuple a and sorted tuple S.
    """

    def __init__(self, p, d, N, n=1, actions=None, name=None):
        if p == 2:
            raise RankTooLarge("the antisymmetrization needs an odd prime")
        if d >= p:
            raise RankTooLarge("rank d = %d is not below p = %d" % (d, p))
        self.p, self.d, self.N, self.n = p, d, N, n
        self.D = d * n
        self.name = name or ("U(%d,%d)" % (p, d) if n == 1 else "U(%d,%d,%d)" % (p, d, n))
        self.basis = {t: self._monomials(t) for t in range(N + 1)}
        self.index = {t: {m: k for k, m in enumerate(B)} for t, B in self.basis.items()}
        # actions: name -> D x D matrix G with g_j -> sum_k G[j, k] g_k on x- and y-span
        self.actions = {k: np.asarray(v, dtype=np.int64) % p for k, v in (actions or {}).items()}
        self._act_cache = {}

    def _monomials(self, t):
        D = self.D
        out = []
        for j in range(0, min(D, t) + 1):
            if (t - j) % 2:
                continue
            i = (t - j) // 2
            for S in itertools.combinations(range(D), j):
                for a in _compositions(i, D):
                    out.append((a, S))
        out.sort(key=lambda m: (len(m[1]), tuple(-x for x in m[0]), m[1]))
        return out

    @property
    def dims(self):
        return [len(self.basis[t]) for t in range(self.N + 1)]

    @staticmethod
    def degree_of(m):
        return 2 * sum(m[0]) + len(m[1])

    def multiply(self, u, v):
        """(sign, monomial) of u*v, or None when it vanishes."""
        a, S = u
        b, T = v
        if set(S) & set(T):
            return None
        inv = sum(1 for s in S for t in T if s > t)
        return (-1 if inv % 2 else 1), (tuple(x + y for x, y in zip(a, b)), tuple(sorted(S + T)))

    def poly_mul(self, P1, P2):
        out = {}
        for u, c1 in P1.items():
            for v, c2 in P2.items():
                r = self.multiply(u, v)
                if r is None:
                    continue
                s, w = r
                out[w] = (out.get(w, 0) + s * c1 * c2) % self.p
        return {k: v for k, v in out.items() if v}

    def generator(self, kind, j):
        a = [0] * self.D
        if kind == "x":
            a[j] = 1
            return (tuple(a), ())
        return (tuple(a), (j,))

    def factors(self, m):
        """Generators whose ordered product is m (x's in index order, then y's)."""
        a, S = m
        out = []
        for j in range(self.D):
            out += [("x", j)] * a[j]
        out += [("y", j) for j in S]
        return out

    def ring(self):
        """Structure constants of the model as a GradedRingTruncation."""
        p, N = self.p, self.N
        table = {}
        for a in range(N + 1):
            for b in range(N + 1 - a):
                T = np.zeros((len(self.basis[a]), len(self.basis[b]), len(self.basis[a + b])), dtype=np.int64)
                for i, u in enumerate(self.basis[a]):
                    for j, v in enumerate(self.basis[b]):
                        r = self.multiply(u, v)
                        if r is not None:
                            T[i, j, self.index[a + b][r[1]]] = r[0] % p
                table[(a, b)] = T
        return GradedRingTruncation(p, self.dims, table, N, provenance=self.name)

    def action_matrix(self, key, t):
        """Columns: images of basis monomials (rows index the image basis)."""
        ck = (key, t)
        if ck in self._act_cache:
            return self._act_cache[ck]
        G = self.actions[key]
        B = self.basis[t]
        M = np.zeros((len(B), len(B)), dtype=np.int64)
        for col, m in enumerate(B):
            img = {((0,) * self.D, ()): 1}
            for kind, j in self.factors(m):
                lin = {self.generator(kind, k): int(G[j, k]) for k in range(self.D) if G[j, k] % self.p}
                img = self.poly_mul(img, lin)
            for w, c in img.items():
                M[self.index[t][w], col] = c % self.p
        self._act_cache[ck] = M
        return M

    def check_action(self):
        """Each action matrix is invertible and multiplicative on generator products."""
        for key in self.actions:
            for t in range(self.N + 1):
                M = self.action_matrix(key, t)
                if M.size and rank(FpMatrix.from_dense(M, self.p)) != M.shape[0]:
                    return False
        return True

    def to_json(self):
        return {"name": self.name, "p": self.p, "d": self.d, "n": self.n, "N": self.N,
                "dims": self.dims,
                "basis": {str(t): [[list(a), list(S)] for a, S in B] for t, B in self.basis.items()}}


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def lifting_inverse_mod_p(P, g, A, p):
    """lift(g^{-1}) mod p as A^(ord g - 1)."""
    k = int(P.order_of(g))
    B = np.eye(A.shape[0], dtype=np.int64)
    for _ in range(k - 1):
        B = (B @ A) % p
    return B


def build_universal(p, d, N, lifting=None, P=None):
    """U(p, d) to degree N; with an integral lifting, P acts through lift(q^{-1}) mod p."""
    actions = {}
    if lifting is not None:
        if P is None:
            raise NoLifting("a lifting needs its acting group")
        for g in lifting.generators():
            actions[g] = lifting_inverse_mod_p(P, g, lifting[g], p)
    U = UniversalModel(p, d, N, actions=actions)
    return U


# ------------------------------------------------------------- cochain maps

class CochainMap:
    """Map from a UniversalModel to bar cochains of an abelian group K.

    images[t][k] is the lazy cochain of the k-th basis monomial in degree t.
    """

    def __init__(self, source, K, images, name="", budget=DEFAULT_BUDGET):
        self.source = source
        self.K = K
        self.images = images
        self.name = name
        self.budget = budget
        self._red = None

    @property
    def p(self):
        return self.K.p

    @property
    def N(self):
        return max(self.images)

    def matrix(self, t):
        return FpMatrix.from_dense(materialize(self.images[t], self.K.order, t, self.budget), self.p)

    @property
    def reduction(self):
        if self._red is None:
            self._red = MorseReduction(BarScheme(self.K), self.budget)
        return self._red

    def is_cochain_map(self, N=None):
        """Source differential is zero, so every image must be a cocycle (exact, all cells)."""
        N = self.N if N is None else N
        return {t: all_cocycles(self.images[t], self.K, t, self.budget) for t in range(N + 1)}

    def cohomology_matrix(self, t):
        """Rows: H(phi)(basis monomial) in the Morse basis of H^t(K)."""
        R = self.reduction
        if not self.images[t]:
            return np.zeros((0, R.cohomology(t).dim), dtype=np.int64)
        return R.class_coords(t, evaluator(self.images[t], t))

    def quasi_iso_report(self, N=None, raise_on_fail=False):
        N = self.N if N is None else N
        rep = {}
        for t in range(N + 1):
            C = self.cohomology_matrix(t)
            hk = self.reduction.cohomology(t).dim
            r = rank(FpMatrix.from_dense(C, self.p)) if C.size else 0
            ok = C.shape[0] == hk and r == hk
            rep[t] = {"dim_source": C.shape[0], "dim_target": hk, "rank": r, "ok": ok}
            if not ok and raise_on_fail:
                raise QuasiIsoFails(t, "(rank %d, dims %d -> %d)" % (r, C.shape[0], hk))
        return rep

    def ring_report(self, N=None):
        """H(phi)(u v) against H(phi)(u) H(phi)(v) for all basis pairs of positive degree."""
        N = self.N if N is None else N
        U = self.source
        R = self.reduction
        checked = failed = 0
        for a in range(1, N + 1):
            for b in range(a, N + 1 - a):
                if not U.basis[a] or not U.basis[b]:
                    continue
                pairs = [(i, j) for i in range(len(U.basis[a])) for j in range(len(U.basis[b]))]
                cups = [Cup(self.images[a][i], self.images[b][j]) for i, j in pairs]
                lhs = R.class_coords(a + b, evaluator(cups, a + b))
                rhs = np.zeros_like(lhs)
                img = self.cohomology_matrix(a + b)
                for k, (i, j) in enumerate(pairs):
                    r = U.multiply(U.basis[a][i], U.basis[b][j])
                    if r is not None:
                        s, w = r
                        rhs[k] = (s * img[U.index[a + b][w]]) % self.p
                bad = int(((lhs - rhs) % self.p).any(axis=1).sum())
                checked += len(pairs)
                failed += bad
        return {"pairs_checked": checked, "pairs_failed": failed, "ok": failed == 0}


def phi_o_image(K, S, antisymmetrize=True):
    p = K.p
    t = len(S)
    if t == 0:
        return One(p)
    Ys = [Coordinate(K, i) for i in S]
    if not antisymmetrize:
        return cup_all(Ys, p)
    terms = []
    for perm in itertools.permutations(range(t)):
        sgn = _perm_sign(perm)
        terms.append((sgn, cup_all([Ys[k] for k in perm], p)))
    scale = inv_mod(factorial(t) % p, p)
    return Combination([(scale * c, f) for c, f in terms], p, t)


def phi_e_image(K, a):
    p = K.p
    fs = []
    for i, e in enumerate(a):
        fs += [Carry(K, i)] * e
    return cup_all(fs, p)


def _perm_sign(perm):
    s = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


def _rank_check(K, U=None):
    if K.coords is None:
        raise RankTooLarge("maps out of U(p, d) need an abelian group with coordinates")
    d = K.coords.shape[1]
    p = K.p
    if d >= p:
        raise RankTooLarge("rank %d is not below p = %d" % (d, p))
    if U is not None and U.d != d:
        raise DimensionMismatch("model rank %d, group rank %d" % (U.d, d))
    return d


def phi_o(K, N, U=None, antisymmetrize=True, budget=DEFAULT_BUDGET):
    """Exterior part: the y-monomials of U (no x's) to antisymmetrized Y-cups."""
    d = _rank_check(K, U)
    U = U or UniversalModel(K.p, d, N)
    images = {t: [phi_o_image(K, m[1], antisymmetrize) for m in U.basis[t] if not any(m[0])]
              for t in range(N + 1)}
    sub = _SubModel(U, lambda m: not any(m[0]))
    return CochainMap(sub, K, images, name="phi_o", budget=budget)


def phi_e(K, N, U=None, budget=DEFAULT_BUDGET):
    """Polynomial part: x-monomials to ordered cups of carry cocycles."""
    d = _rank_check(K, U)
    U = U or UniversalModel(K.p, d, N)
    images = {t: [phi_e_image(K, m[0]) for m in U.basis[t] if not m[1]] for t in range(N + 1)}
    sub = _SubModel(U, lambda m: not m[1])
    return CochainMap(sub, K, images, name="phi_e", budget=budget)


def phi(K, N, U=None, antisymmetrize=True, budget=DEFAULT_BUDGET, verify=False):
    """phi(x^a y_S) = phi_e(x^a) u phi_o(y_S)."""
    d = _rank_check(K, U)
    U = U or UniversalModel(K.p, d, N)
    images = {}
    for t in range(N + 1):
        row = []
        for a, S in U.basis[t]:
            e = phi_e_image(K, a)
            o = phi_o_image(K, S, antisymmetrize)
            if e.degree == 0:
                row.append(o)
            elif o.degree == 0:
                row.append(e)
            else:
                row.append(Cup(e, o))
        images[t] = row
    f = CochainMap(U, K, images, name="phi", budget=budget)
    if verify:
        f.quasi_iso_report(N, raise_on_fail=True)
    return f


class _SubModel:
    """The subalgebra of U spanned by monomials passing a filter."""

    def __init__(self, U, keep):
        self.U = U
        self.p = U.p
        self.N = U.N
        self.basis = {t: [m for m in B if keep(m)] for t, B in U.basis.items()}
        self.index = {t: {m: k for k, m in enumerate(B)} for t, B in self.basis.items()}
        self.actions = U.actions
        self.keep = keep

    @property
    def dims(self):
        return [len(self.basis[t]) for t in range(self.N + 1)]

    def multiply(self, u, v):
        r = self.U.multiply(u, v)
        if r is None or not self.keep(r[1]):
            return None
        return r

    def action_matrix(self, key, t):
        M = self.U.action_matrix(key, t)
        rows = [self.U.index[t][m] for m in self.basis[t]]
        return M[np.ix_(rows, rows)]


# ------------------------------------------------------------- invariance

def verify_invariance(f, P, act, lifting=None, N=None, detail=False):
    """phi(q.u) = q.phi(u) on all cells, for every generator q of P and degree <= N.

    The action on the model comes from the model's own action matrices; on
    cochains, (q.g)(k) = g(q^{-1} k).
    """
    from .lattices import check_integral_lifting
    if lifting is not None and not check_integral_lifting(act, lifting):
        raise NoLifting("the given matrices do not lift the action")
    N = f.N if N is None else N
    U = f.source
    gens = sorted(U.actions) if U.actions else []
    if not gens and not act.is_trivial():
        raise NoLifting("the model carries no action for a nontrivial P")
    report = {}
    ok = True
    for g in gens:
        perm = act.perms[int(P.inv[g])]
        for t in range(N + 1):
            Mt = U.action_matrix(g, t)
            fails = []
            for k, img in enumerate(f.images[t]):
                lhs = Combination([(Mt[r, k], f.images[t][r]) for r in range(Mt.shape[0])], f.p, t)
                rhs = Acted(img, perm)
                if not all_equal(lhs, rhs, f.K.order, t, f.budget):
                    fails.append(k)
            report[(g, t)] = fails
            ok = ok and not fails
    if detail:
        return ok, report
    return ok


def prufer_truncation_invariant(K, act, lifting, extra=1):
    """The inclusion K -> (C_{p^L})^d, k_i -> p^{L - e_i} k_i, commutes with the
    lifted action (so pulling back any cochain of the big group is P-invariant)."""
    p = K.p
    mod = np.asarray(K.moduli, dtype=np.int64)
    L = int(round(np.log(mod.max()) / np.log(p))) + extra
    big = p ** L
    scale = big // mod
    for g in lifting.generators():
        A = np.asarray(lifting[g], dtype=np.int64)
        emb = (K.coords * scale) % big
        lhs = (emb @ A.T) % big
        moved = K.coords[act.perms[g]]
        rhs = (moved * scale) % big
        if not np.array_equal(lhs, rhs):
            return False
    return True


# ------------------------------------------------------------- zig-zags

def zigzag_report(K1, K2, N1, N2=None, budget=DEFAULT_BUDGET, check_cocycles=True):
    """C^*(K1) <- U(p, d) -> C^*(K2): quasi-iso and ring checks per side."""
    N2 = N1 if N2 is None else N2
    p = K1.p
    d = _rank_check(K1)
    U = UniversalModel(p, d, max(N1, N2))
    out = {"model": U.name, "dims": U.dims}
    for tag, K, N in (("left", K1, N1), ("right", K2, N2)):
        f = phi(K, N, U, budget=budget)
        side = {"group": K.name, "N": N}
        if check_cocycles:
            side["cocycles"] = f.is_cochain_map(N)
        side["quasi_iso"] = f.quasi_iso_report(N)
        side["ring"] = f.ring_report(N)
        side["ok"] = all(v["ok"] for v in side["quasi_iso"].values()) and side["ring"]["ok"] and \
            (not check_cocycles or all(side["cocycles"].values()))
        out[tag] = side
    out["ok"] = out["left"]["ok"] and out["right"]["ok"]
    return out


# ----------------------------------------------------- unbounded rank

class TensorCochain:
    """Element of the n-fold tensor cochains: multidegree -> lazy product of factor cochains.

    A component is a list of (coefficient, [f_1, .., f_n]) meaning
    c * f_1(z_1) ... f_n(z_n) on K^{m_1} x .. x K^{m_n}.
    """

    def __init__(self, p, n, comps=None):
        self.p = p
        self.n = n
        self.comps = comps or {}

    def add(self, mdeg, coef, fs):
        self.comps.setdefault(tuple(mdeg), []).append((int(coef) % self.p, list(fs)))

    def values(self, mdeg, D):
        """Values on cells D (R, sum mdeg), blocks in slot order."""
        out = np.zeros(len(D), dtype=np.int64)
        for c, fs in self.comps.get(tuple(mdeg), []):
            v = np.full(len(D), c, dtype=np.int64)
            off = 0
            for f, m in zip(fs, mdeg):
                v = v * f.values(D[:, off:off + m]) % self.p
                off += m
            out += v
        return out % self.p


def _multidegrees(t, n):
    return [m for m in itertools.product(range(t + 1), repeat=n) if sum(m) == t]


class UnboundedMap:
    """phi: U(p, d, n) -> (x)^n C^*(K), tensor of the rank-d maps."""

    def __init__(self, U, K, budget=DEFAULT_BUDGET):
        self.U, self.K = U, K
        self.p = K.p
        self.budget = budget
        self.base = UniversalModel(U.p, U.d, U.N)
        self.phi1 = phi(K, U.N, self.base, budget=budget)

    def split(self, m):
        """Factor monomials of a monomial of U(p, d, n)."""
        a, S = m
        d = self.U.d
        out = []
        for l in range(self.U.n):
            al = tuple(a[l * d:(l + 1) * d])
            Sl = tuple(j - l * d for j in S if l * d <= j < (l + 1) * d)
            out.append((al, Sl))
        return out

    def image(self, m):
        t = UniversalModel.degree_of(m)
        T = TensorCochain(self.p, self.U.n)
        parts = self.split(m)
        fs, mdeg = [], []
        for u in parts:
            deg = UniversalModel.degree_of(u)
            fs.append(self.phi1.images[deg][self.base.index[deg][u]])
            mdeg.append(deg)
        T.add(mdeg, 1, fs)
        return T

    def images(self, t):
        return [self.image(m) for m in self.U.basis[t]]

    def is_cochain_map(self, N=None):
        """Each factor image is a cocycle, hence so is each tensor (Leibniz in every slot)."""
        N = self.U.N if N is None else N
        return self.phi1.is_cochain_map(N)


def build_universal_unbounded(p, d, n, N, K, slot_perms=None, factor_matrices=None, P=None,
                              budget=DEFAULT_BUDGET):
    """U(p, d, n) with actions of Q elements (sigma, per-factor lifting matrices).

    slot_perms: dict name -> permutation sigma of range(n) (sigma[l] = new slot of factor l).
    factor_matrices: optional dict name -> list of n matrices lift(p_l^{-1}) mod p.
    """
    actions = {}
    D = d * n
    for key, sigma in (slot_perms or {}).items():
        G = np.zeros((D, D), dtype=np.int64)
        mats = (factor_matrices or {}).get(key)
        for l in range(n):
            B = np.eye(d, dtype=np.int64) if mats is None else np.asarray(mats[l], dtype=np.int64)
            L = sigma[l]
            G[l * d:(l + 1) * d, L * d:(L + 1) * d] = B
        actions[key] = G
    U = UniversalModel(p, d, N, n=n, actions=actions)
    U.slot_perms = dict(slot_perms or {})
    return U, UnboundedMap(U, K, budget)


def _acted_tensor_values(F, sigma, mdeg, D, n, p):
    """(sigma.F) on the multidegree mdeg at cells D.

    (sigma.F)(z_1..z_n) = eps F(z_{sigma(1)}, .., z_{sigma(n)}), with eps the
    Koszul sign of that reordering.
    """
    inv = [0] * n
    for l in range(n):
        inv[sigma[l]] = l
    offs = np.cumsum([0] + list(mdeg))
    blocks = [D[:, offs[j]:offs[j + 1]] for j in range(n)]
    src_deg = [mdeg[sigma[l]] for l in range(n)]
    cells = np.concatenate([blocks[sigma[l]] for l in range(n)], axis=1) if D.shape[1] else D
    eps = koszul_sign(list(mdeg), inv)
    v = F.values(tuple(src_deg), cells)
    return (-v if eps else v) % p


def verify_unbounded_invariance(U, f, N=None, budget=DEFAULT_BUDGET):
    """phi(sigma.u) = sigma.phi(u) on every multidegree component, exact."""
    N = U.N if N is None else N
    n = U.n
    order = f.K.order
    ok = True
    report = {}
    for key, sigma in U.slot_perms.items():
        for t in range(N + 1):
            Mt = U.action_matrix(key, t)
            imgs = f.images(t)
            fails = 0
            for k in range(len(imgs)):
                for mdeg in _multidegrees(t, n):
                    for _, D in iterate_cells(order, t, budget):
                        lhs = np.zeros(len(D), dtype=np.int64)
                        for r in range(Mt.shape[0]):
                            if Mt[r, k]:
                                lhs += Mt[r, k] * imgs[r].values(mdeg, D)
                        rhs = _acted_tensor_values(imgs[k], sigma, mdeg, D, n, f.p)
                        if ((lhs - rhs) % f.p).any():
                            fails += 1
                            break
            report[(key, t)] = fails
            ok = ok and fails == 0
    return ok, report


def universal_dims(d, N):
    return weigel_dims(d, N)


def verify_class_invariance(f, P, act, N=None):
    """The weaker statement on cohomology: [phi(q.u)] = [q.phi(u)] for every generator q."""
    N = f.N if N is None else N
    U = f.source
    R = f.reduction
    ok = True
    report = {}
    for g in sorted(U.actions):
        perm = act.perms[int(P.inv[g])]
        for t in range(N + 1):
            Mt = U.action_matrix(g, t)
            imgs = f.images[t]
            if not imgs:
                continue
            lhs = [Combination([(Mt[r, k], imgs[r]) for r in range(Mt.shape[0])], f.p, t) for k in range(len(imgs))]
            rhs = [Acted(img, perm) for img in imgs]
            A = R.class_coords(t, evaluator(lhs, t))
            B = R.class_coords(t, evaluator(rhs, t))
            good = not ((A - B) % f.p).any()
            report[(g, t)] = good
            ok = ok and good
    return ok, report
