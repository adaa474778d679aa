"""Finite p-groups given by multiplication tables.

Every group is stored as a full Cayley table with 0 as the identity.  The
builders encode elements as mixed-radix integers: coordinates for abelian
groups (first coordinate most significant), and `inner + |inner| * outer`
for semidirect products, extensions and wreath products.
"""
import itertools
import math

import numpy as np

from .errors import (BadExponent, CocycleIdentityFails, EvenPrime, InvalidAction,
                     InvalidForm, MismatchedExtensions, NotAPermutationGroup,
                     PreconditionFail, TooLarge, TwistConditionViolated)
from .fplinalg import is_prime

TABLE_LIMIT = 3 ** 7
ISO_BOUND = 3 ** 6
SECTIONAL_BOUND = 3 ** 5


def prime_of(n):
    """The prime p with n a power of p (None for n = 1 or non prime powers)."""
    if n < 2:
        return None
    q = 2
    while n % q:
        q += 1
    m = n
    while m % q == 0:
        m //= q
    return q if m == 1 else None


def _ilog(n, p):
    k = 0
    while n > 1:
        if n % p:
            raise ValueError("%d is not a power of %d" % (n, p))
        n //= p
        k += 1
    return k


class Group:
    """A finite p-group with a Cayley table and identity 0."""

    def __init__(self, table, p=None, labels=None, kind="table", info=None, name=None):
        T = np.asarray(table)
        n = T.shape[0]
        if T.shape != (n, n):
            raise ValueError("table must be square")
        if n > TABLE_LIMIT:
            raise TooLarge("group of order %d exceeds the table limit %d" % (n, TABLE_LIMIT))
        self.table = T.astype(np.int32)
        self.order = n
        if p is None:
            p = prime_of(n) if n > 1 else 3
        self.p = p
        if n > 1 and prime_of(n) != p:
            raise ValueError("order %d is not a power of %d" % (n, p))
        if not (np.array_equal(self.table[0], np.arange(n)) and np.array_equal(self.table[:, 0], np.arange(n))):
            raise ValueError("element 0 is not the identity")
        inv = np.argmax(self.table == 0, axis=1)
        if not np.all(self.table[np.arange(n), inv] == 0):
            raise ValueError("some element has no inverse")
        self.inv = inv.astype(np.int32)
        self.labels = labels
        self.kind = kind
        self.info = info or {}
        self.name = name
        self.coords = None
        self.moduli = None
        self._orders = None
        self._index = None

    def __repr__(self):
        return "Group(%s, order=%d)" % (self.name or self.kind, self.order)

    def __len__(self):
        return self.order

    def mul(self, a, b):
        return int(self.table[a, b])

    def inverse(self, a):
        return int(self.inv[a])

    def power(self, a, k):
        k %= self.order_of(a)
        r, base = 0, int(a)
        while k:
            if k & 1:
                r = int(self.table[r, base])
            base = int(self.table[base, base])
            k >>= 1
        return r

    def powers_all(self, k):
        """Array x -> x^k for every element."""
        out = np.zeros(self.order, dtype=np.int64)
        base = np.arange(self.order)
        while k:
            if k & 1:
                out = self.table[out, base]
            base = self.table[base, base]
            k >>= 1
        return out.astype(np.int64)

    def commutator(self, a, b):
        """a^-1 b^-1 a b."""
        T = self.table
        return int(T[T[self.inv[a], self.inv[b]], T[a, b]])

    def commutator_table(self):
        T = self.table
        return T[T[self.inv[:, None], self.inv[None, :]], T]

    @property
    def element_orders(self):
        if self._orders is None:
            n = self.order
            orders = np.zeros(n, dtype=np.int64)
            cur = np.arange(n)
            k = 1
            while (orders == 0).any():
                hit = (cur == 0) & (orders == 0)
                orders[hit] = k
                cur = self.table[cur, np.arange(n)]
                k += 1
                if k > n + 1:
                    raise ValueError("element order computation diverged")
            self._orders = orders
        return self._orders

    def order_of(self, a):
        return int(self.element_orders[a])

    @property
    def exponent(self):
        return int(self.element_orders.max())

    def is_abelian(self):
        return bool(np.array_equal(self.table, self.table.T))

    def index_of(self, label):
        if self._index is None:
            self._index = {lab: i for i, lab in enumerate(self.labels)}
        return self._index[label]

    def closure(self, gens):
        """Sorted element array of the subgroup generated by `gens`."""
        return closure(self.table, gens)

    def generating_set(self):
        """A small generating set, greedily by decreasing element order."""
        order = sorted(range(self.order), key=lambda x: (-int(self.element_orders[x]), x))
        gens = []
        have = np.zeros(self.order, dtype=bool)
        have[0] = True
        for x in order:
            if not have[x]:
                gens.append(x)
                have[:] = False
                have[self.closure(gens)] = True
                if have.all():
                    break
        return gens

    def check_axioms(self):
        """Identity, inverses and associativity.

        Associativity uses Light's test: if (xg)y = x(gy) for every g in a
        generating set then the set of such g is closed under products and so
        is everything.  This is exhaustive, not sampled.
        """
        T = self.table
        n = self.order
        if not (np.array_equal(T[0], np.arange(n)) and np.array_equal(T[:, 0], np.arange(n))):
            return False
        if not np.all(T[np.arange(n), self.inv] == 0):
            return False
        for row in T:
            if len(np.unique(row)) != n:
                return False
        gens = _magma_generators(T)
        for g in gens:
            lhs = T[T[:, g][:, None], np.arange(n)[None, :]]
            rhs = T[np.arange(n)[:, None], T[g][None, :]]
            if not np.array_equal(lhs, rhs):
                return False
        return True


def _magma_generators(T):
    n = T.shape[0]
    have = np.zeros(n, dtype=bool)
    have[0] = True
    gens = []
    for x in range(n):
        if not have[x]:
            gens.append(x)
            S = closure(T, gens)
            have[:] = False
            have[S] = True
    return gens


def closure(table, gens):
    n = table.shape[0]
    have = np.zeros(n, dtype=bool)
    have[0] = True
    gens = np.asarray(sorted(set(int(g) for g in gens)), dtype=np.int64)
    if len(gens) == 0:
        return np.array([0], dtype=np.int64)
    frontier = np.array([0], dtype=np.int64)
    while len(frontier):
        new = np.unique(table[frontier][:, gens].ravel())
        new = new[~have[new]]
        have[new] = True
        frontier = new
    return np.nonzero(have)[0].astype(np.int64)


# ---------------------------------------------------------------- abelian

def _abelian_table(moduli):
    moduli = list(moduli)
    n = int(np.prod(moduli)) if moduli else 1
    coords = np.array(list(itertools.product(*[range(m) for m in moduli])), dtype=np.int64).reshape(n, len(moduli))
    return coords, n


def encode_coords(coords, moduli):
    """Mixed-radix index of coordinate rows (first coordinate most significant)."""
    coords = np.asarray(coords, dtype=np.int64)
    idx = np.zeros(coords.shape[:-1], dtype=np.int64)
    for j, m in enumerate(moduli):
        idx = idx * m + (coords[..., j] % m)
    return idx


def build_abelian(exponents, p=None):
    exps = [int(e) for e in exponents]
    if not exps:
        raise BadExponent("need at least one cyclic factor")
    primes = {prime_of(e) for e in exps}
    if None in primes or len(primes) != 1:
        raise BadExponent("exponents %s are not powers of a single prime" % (exps,))
    q = primes.pop()
    if p is not None and p != q:
        raise BadExponent("exponents are powers of %d, not %d" % (q, p))
    if q == 2 and any(e <= 2 for e in exps):
        raise BadExponent("factors of order 2 are rejected at p = 2")
    coords, n = _abelian_table(exps)
    if n > TABLE_LIMIT:
        raise TooLarge("abelian group of order %d exceeds the table limit" % n)
    mod = np.array(exps, dtype=np.int64)
    s = (coords[:, None, :] + coords[None, :, :]) % mod
    table = encode_coords(s, exps)
    G = Group(table, q, labels=[tuple(c) for c in coords.tolist()], kind="abelian",
              info={"exponents": exps}, name="ab(%s)" % ",".join(map(str, exps)))
    G.coords = coords
    G.moduli = mod
    return G


def cyclic(n):
    return build_abelian([n])


class AlternatingForm:
    """Biadditive alternating map A x A -> B between abelian groups.

    Stored by its values on pairs of standard generators: values[i, j] is the
    coordinate vector of lambda(e_i, e_j) in B.
    """

    def __init__(self, domain_moduli, codomain_moduli, values):
        self.dom = np.array(domain_moduli, dtype=np.int64)
        self.cod = np.array(codomain_moduli, dtype=np.int64)
        d, e = len(self.dom), len(self.cod)
        V = np.zeros((d, d, e), dtype=np.int64)
        if isinstance(values, dict):
            for (i, j), v in values.items():
                V[i, j] = v
                V[j, i] = -np.asarray(v)
        else:
            V[:] = np.asarray(values, dtype=np.int64).reshape(d, d, e)
        self.values = V % self.cod
        self.check()

    @classmethod
    def zero(cls, moduli):
        d = len(moduli)
        return cls(moduli, moduli, np.zeros((d, d, d), dtype=np.int64))

    def check(self):
        V = self.values
        d = len(self.dom)
        for i in range(d):
            if (V[i, i] % self.cod).any():
                raise InvalidForm("lambda(e_%d, e_%d) is not zero" % (i + 1, i + 1))
            for j in range(d):
                if ((V[i, j] + V[j, i]) % self.cod).any():
                    raise InvalidForm("lambda is not antisymmetric on (e_%d, e_%d)" % (i + 1, j + 1))
                if ((self.dom[i] * V[i, j]) % self.cod).any():
                    raise InvalidForm("lambda(e_%d, -) is not killed by the order of e_%d" % (i + 1, i + 1))

    def __call__(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return np.einsum("...i,...j,ijk->...k", a, b, self.values) % self.cod

    def is_zero(self):
        return not self.values.any()

    def image_generators(self):
        d = len(self.dom)
        return [self.values[i, j] for i in range(d) for j in range(i + 1, d)]

    def radical_mask(self, coords):
        """Boolean mask of elements (given by coordinate rows) in Rad(lambda)."""
        d = len(self.dom)
        eye = np.eye(d, dtype=np.int64)
        out = np.ones(len(coords), dtype=bool)
        for k in range(d):
            out &= ~(self(coords, eye[k]) % self.cod).any(axis=1)
        return out

    def image_in_radical(self):
        d = len(self.dom)
        eye = np.eye(d, dtype=np.int64)
        for v in self.image_generators():
            for k in range(d):
                if (self(v, eye[k]) % self.cod).any():
                    return False
        return True

    def is_equivariant(self, matrices):
        """p * lambda(a, b) = lambda(p * a, p * b) on generators, for each matrix."""
        d = len(self.dom)
        eye = np.eye(d, dtype=np.int64)
        for A in matrices:
            A = np.asarray(A, dtype=np.int64)
            for i in range(d):
                for j in range(d):
                    lhs = (A @ self.values[i, j]) % self.cod
                    rhs = self(A @ eye[i] % self.dom, A @ eye[j] % self.dom)
                    if ((lhs - rhs) % self.cod).any():
                        return False
        return True

    def to_json(self):
        return {"domain": self.dom.tolist(), "codomain": self.cod.tolist(), "values": self.values.tolist()}


def build_twisted(A, lam):
    """The set of A with a +_lambda b = a + b + lambda(a, b) / 2."""
    if A.kind != "abelian" and A.coords is None:
        raise ValueError("twisting needs an abelian group with coordinates")
    if A.p == 2:
        raise EvenPrime("A_lambda needs an odd prime")
    mod = A.moduli
    if not (np.array_equal(lam.dom, mod) and np.array_equal(lam.cod, mod)):
        raise InvalidForm("lambda must map A x A to A")
    if not lam.image_in_radical():
        raise TwistConditionViolated("Im(lambda) is not contained in Rad(lambda)")
    half = (mod + 1) // 2
    C = A.coords
    lv = lam(C[:, None, :], C[None, :, :])
    s = (C[:, None, :] + C[None, :, :] + half * lv) % mod
    table = encode_coords(s, list(mod))
    G = Group(table, A.p, labels=A.labels, kind="twisted",
              info={"base": A, "form": lam}, name="tw(%s)" % (A.name,))
    G.coords = C
    G.moduli = mod
    return G


# ----------------------------------------------------------------- actions

class ActionHom:
    """A left action of P on K by automorphisms, one permutation per element."""

    def __init__(self, P, K, gen_images, matrices=None):
        self.P = P
        self.K = K
        self.gen_images = {int(g): np.asarray(v, dtype=np.int64) for g, v in gen_images.items()}
        self.matrices = matrices
        self.perms = self._extend()

    @classmethod
    def trivial(cls, P, K):
        return cls(P, K, {g: np.arange(K.order) for g in P.generating_set()})

    @classmethod
    def from_matrices(cls, P, K, mats):
        """Action through integer matrices on the coordinates of an abelian K."""
        from .lattices import hillar_rhea_reduce
        images = {}
        for g, A in mats.items():
            images[g] = hillar_rhea_reduce(A, list(K.moduli)).permutation(K)
        return cls(P, K, images, matrices={int(g): np.asarray(A, dtype=np.int64) for g, A in mats.items()})

    def _extend(self):
        P, K = self.P, self.K
        gens = sorted(self.gen_images)
        nK = K.order
        for g in gens:
            perm = self.gen_images[g]
            if sorted(perm.tolist()) != list(range(nK)):
                raise InvalidAction("image of %d is not a bijection" % g)
            lhs = perm[K.table]
            rhs = K.table[perm[:, None], perm[None, :]]
            if not np.array_equal(lhs, rhs):
                raise InvalidAction("image of %d is not an automorphism" % g)
        perms = np.full((P.order, nK), -1, dtype=np.int64)
        perms[0] = np.arange(nK)
        frontier = [0]
        seen = {0}
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(P.table[x, g])
                    img = perms[x][self.gen_images[g]]
                    if y in seen:
                        if not np.array_equal(perms[y], img):
                            raise InvalidAction("generator images do not define a homomorphism")
                    else:
                        perms[y] = img
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        if len(seen) != P.order:
            raise InvalidAction("given generators do not generate P")
        return perms

    def act(self, q, k):
        return self.perms[q][k]

    def is_trivial(self):
        return bool(np.all(self.perms == np.arange(self.K.order)))


def build_semidirect(K, P, act):
    """(n1, p1)(n2, p2) = (n1 (p1 . n2), p1 p2), encoded n + |K| p."""
    if act.P is not P and not np.array_equal(act.P.table, P.table):
        raise InvalidAction("action is for a different acting group")
    if act.K is not K and not np.array_equal(act.K.table, K.table):
        raise InvalidAction("action is on a different group")
    nK, nP = K.order, P.order
    if nK * nP > TABLE_LIMIT:
        raise TooLarge("semidirect product of order %d exceeds the table limit" % (nK * nP))
    idx = np.arange(nK * nP)
    k, q = idx % nK, idx // nK
    kk = act.perms[q[:, None], k[None, :]]
    newk = K.table[k[:, None], kk]
    newq = P.table[q[:, None], q[None, :]]
    table = newk + nK * newq
    labels = None
    return Group(table, K.p, labels=labels, kind="semidirect",
                 info={"K": K, "P": P, "act": act}, name="sd(%s,%s)" % (K.name, P.name))


# ------------------------------------------------------------- permutations

def perm_closure(perms, n):
    """All elements of the permutation group generated by `perms` (tuples)."""
    ident = tuple(range(n))
    gens = []
    for s in perms:
        s = tuple(int(x) for x in s)
        if sorted(s) != list(range(n)):
            raise NotAPermutationGroup("%r is not a permutation of %d points" % (s, n))
        gens.append(s)
    elems = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = tuple(a[g[i]] for i in range(n))
                if c not in seen:
                    seen.add(c)
                    elems.append(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(elems)


def perm_compose(s, t):
    """(s t)(i) = s(t(i))."""
    return tuple(s[t[i]] for i in range(len(s)))


def perm_inverse(s):
    out = [0] * len(s)
    for i, j in enumerate(s):
        out[j] = i
    return tuple(out)


def perm_group(perms, n):
    elems = perm_closure(perms, n)
    ix = {e: i for i, e in enumerate(elems)}
    m = len(elems)
    table = np.array([[ix[perm_compose(a, b)] for b in elems] for a in elems], dtype=np.int64)
    p = prime_of(m) if m > 1 else None
    if m > 1 and p is None:
        raise NotAPermutationGroup("permutation group of order %d is not a p-group" % m)
    return Group(table, p, labels=elems, kind="permutation", name="perm")


def build_wreath(G, n, perms):
    """G wr S with (f, s)(f', t) = (f . s(f'), s t), s(f')_i = f'_{s^-1(i)}.

    Elements are encoded as base + |G|^n * s with the base coordinates mixed
    radix in |G| (first coordinate most significant).
    """
    elems = perm_closure(perms or [tuple(range(n))], n)
    m = len(elems)
    g = G.order
    nb = g ** n
    if nb * m > TABLE_LIMIT:
        raise TooLarge("wreath product of order %d exceeds the table limit" % (nb * m))
    ix = {e: i for i, e in enumerate(elems)}
    base = np.array(list(itertools.product(range(g), repeat=n)), dtype=np.int64).reshape(nb, n)
    radix = [g] * n
    total = nb * m
    table = np.zeros((total, total), dtype=np.int64)
    comp = np.array([[ix[perm_compose(a, b)] for b in elems] for a in elems], dtype=np.int64)
    for si, s in enumerate(elems):
        sinv = perm_inverse(s)
        moved = base[:, list(sinv)]
        prod = G.table[base[:, None, :], moved[None, :, :]]
        bidx = encode_coords(prod, radix)
        for ti in range(m):
            rows = np.arange(nb) + nb * si
            cols = np.arange(nb) + nb * ti
            table[np.ix_(rows, cols)] = bidx + nb * comp[si, ti]
    p = G.p
    W = Group(table, p, kind="wreath", info={"G": G, "n": n, "S": elems},
              name="wr(%s,%d)" % (G.name, n))
    return W


# -------------------------------------------------------------- extensions

def build_extension(Q, Z, act, cocycle, check=True):
    """Z x Q with (z1, q1)(z2, q2) = (z1 + q1.z2 + theta(q1, q2), q1 q2), encoded z + |Z| q."""
    if not Z.is_abelian():
        raise ValueError("kernel must be abelian")
    nQ, nZ = Q.order, Z.order
    if nQ * nZ > TABLE_LIMIT:
        raise TooLarge("extension of order %d exceeds the table limit" % (nQ * nZ))
    if act is None:
        act = ActionHom.trivial(Q, Z)
    th = np.asarray(cocycle, dtype=np.int64)
    if th.shape != (nQ, nQ):
        raise CocycleIdentityFails("cocycle table must be |Q| x |Q|")
    if check:
        if th[0].any() or th[:, 0].any():
            raise CocycleIdentityFails("cocycle is not normalized")
        T, ZT, A = Q.table, Z.table, act.perms
        for q1 in range(nQ):
            lhs = ZT[A[q1][th], th[q1][T]]
            rhs = ZT[th[q1][:, None], th[T[q1]]]
            if not np.array_equal(lhs, rhs):
                bad = np.argwhere(lhs != rhs)[0]
                raise CocycleIdentityFails("cocycle identity fails at (%d, %d, %d)" % (q1, bad[0], bad[1]))
    idx = np.arange(nQ * nZ)
    z, q = idx % nZ, idx // nZ
    z2 = act.perms[q[:, None], z[None, :]]
    newz = Z.table[Z.table[z[:, None], z2], th[q[:, None], q[None, :]]]
    newq = Q.table[q[:, None], q[None, :]]
    table = newz + nZ * newq
    return Group(table, Q.p, kind="extension", info={"Q": Q, "Z": Z, "act": act, "cocycle": th},
                 name="ext(%s,%s)" % (Q.name, Z.name))


def baer_sum(E1, E2):
    """Extension whose cocycle is the sum of the two cocycles."""
    if E1.kind != "extension" or E2.kind != "extension":
        raise MismatchedExtensions("both groups must come from build_extension")
    a, b = E1.info, E2.info
    if not np.array_equal(a["Q"].table, b["Q"].table) or not np.array_equal(a["Z"].table, b["Z"].table):
        raise MismatchedExtensions("kernels or quotients differ")
    if not np.array_equal(a["act"].perms, b["act"].perms):
        raise MismatchedExtensions("actions on the kernel differ")
    Z = a["Z"]
    th = Z.table[a["cocycle"], b["cocycle"]]
    return build_extension(a["Q"], Z, a["act"], th)


def extension_cocycle(G, N, proj, section, Q):
    """Cocycle of G as an extension of Q by the normal abelian subgroup N.

    `proj` maps G onto Q (array), `section` maps Q back into G with
    section[0] = 0.  Returns (kernel group, action, cocycle table), the
    kernel relabelled by position in the sorted array N.
    """
    N = np.asarray(sorted(int(x) for x in N))
    pos = -np.ones(G.order, dtype=np.int64)
    pos[N] = np.arange(len(N))
    Zt = pos[G.table[np.ix_(N, N)]]
    Z = Group(Zt, G.p, kind="table", name="kernel")
    T = G.table
    s = np.asarray(section)
    images = {}
    for g in Q.generating_set():
        sg = s[g]
        conj = T[T[sg, N], G.inv[sg]]
        images[g] = pos[conj]
    act = ActionHom(Q, Z, images)
    prod = T[s[:, None], s[None, :]]
    back = G.inv[s[Q.table]]
    th = pos[T[prod, back]]
    if (th < 0).any():
        raise ValueError("section does not give values in N")
    return Z, act, th


# -------------------------------------------------------------- subgroups

def subgroup(G, elems):
    """The subgroup on a sorted element array, relabelled 0..|H|-1."""
    H = np.asarray(sorted(int(x) for x in elems))
    pos = -np.ones(G.order, dtype=np.int64)
    pos[H] = np.arange(len(H))
    t = pos[G.table[np.ix_(H, H)]]
    if (t < 0).any():
        raise ValueError("element set is not closed")
    S = Group(t, G.p, kind="subgroup", info={"parent": G, "elements": H}, name="sub")
    return S


def is_normal(G, H):
    H = np.asarray(H)
    mask = np.zeros(G.order, dtype=bool)
    mask[H] = True
    T = G.table
    for g in G.generating_set():
        conj = T[T[g, H], G.inv[g]]
        if not mask[conj].all():
            return False
    return True


def quotient_group(G, N):
    """G/N with the projection array; cosets are labelled by their least element."""
    N = np.asarray(sorted(int(x) for x in N))
    if not is_normal(G, N):
        raise ValueError("subgroup is not normal")
    cos = G.table[:, N].min(axis=1)
    reps = np.unique(cos)
    pos = -np.ones(G.order, dtype=np.int64)
    pos[reps] = np.arange(len(reps))
    proj = pos[cos]
    qt = proj[G.table[np.ix_(reps, reps)]]
    Qg = Group(qt, G.p, kind="quotient", info={"parent": G, "N": N}, name="quot")
    return Qg, proj


def omega1(G):
    small = np.nonzero(G.powers_all(G.p) == 0)[0]
    return G.closure(small)


def power_subgroup(G, k=None):
    k = G.p if k is None else k
    return G.closure(np.unique(G.powers_all(k)))


def derived_subgroup(G):
    return G.closure(np.unique(G.commutator_table()))


def center(G):
    T = G.table
    return np.nonzero(np.all(T == T.T, axis=1))[0]


def commutator_subgroup(G, A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    T = G.table
    c = T[T[G.inv[A][:, None], G.inv[B][None, :]], T[A[:, None], B[None, :]]]
    return G.closure(np.unique(c))


def lower_central_series(G):
    series = [np.arange(G.order)]
    allg = np.arange(G.order)
    while len(series[-1]) > 1:
        nxt = commutator_subgroup(G, series[-1], allg)
        if len(nxt) == len(series[-1]):
            raise ValueError("group is not nilpotent")
        series.append(nxt)
    return series


def nilpotency_class(G):
    return len(lower_central_series(G)) - 1


def _subset(a, b):
    return bool(np.isin(a, b).all())


def is_powerful(G):
    if G.p == 2:
        raise EvenPrime("powerful is defined here for odd primes")
    return _subset(derived_subgroup(G), power_subgroup(G))


def is_pcentral(G):
    return _subset(omega1(G), center(G))


def frattini(G, H=None):
    """Phi(H) = H^p [H, H] as an element array of G."""
    if H is None:
        H = np.arange(G.order)
    H = np.asarray(H)
    pw = G.powers_all(G.p)[H]
    comm = commutator_subgroup(G, H, H)
    return G.closure(np.concatenate([pw, comm]))


def generator_rank(G, H=None):
    """d(H) = dim H / Phi(H)."""
    if H is None:
        H = np.arange(G.order)
    return _ilog(len(H) // len(frattini(G, H)), G.p)


def all_subgroups(G):
    """Every subgroup, each extended from an index-p normal subgroup."""
    T = G.table
    pw = G.powers_all(G.p)
    start = np.array([0], dtype=np.int64)
    seen = {start.tobytes(): start}
    layer = [start]
    out = [start]
    while layer:
        nxt = []
        for S in layer:
            mask = np.zeros(G.order, dtype=bool)
            mask[S] = True
            for g in range(G.order):
                if mask[g] or not mask[pw[g]]:
                    continue
                conj = T[T[g, S], G.inv[g]]
                if not mask[conj].all():
                    continue
                parts = [S]
                x = g
                while x != 0:
                    parts.append(T[x, S])
                    x = int(T[x, g])
                H = np.unique(np.concatenate(parts))
                key = H.tobytes()
                if key not in seen:
                    seen[key] = H
                    nxt.append(H)
                    out.append(H)
        layer = nxt
    return out


def sectional_rank(G, bound=SECTIONAL_BOUND):
    if G.order > bound:
        raise TooLarge("sectional rank enumeration is limited to order %d (got %d)" % (bound, G.order))
    return max(generator_rank(G, H) for H in all_subgroups(G))


def build_regular_subgroup(G, proj, Q, A, rank=None):
    """B = (pi^-1(A))^{p^2}, the subgroup generated by p^2-th powers.

    Returns (B, certificate).  The certificate records the powerful,
    p-central and class conditions on B and the index bound; ΩEP is not
    certified.
    """
    p = G.p
    if p == 2:
        raise EvenPrime("the construction needs an odd prime")
    proj = np.asarray(proj)
    ker = np.nonzero(proj == 0)[0]
    if len(ker) != p:
        raise PreconditionFail("kernel of the quotient map has order %d, not %d" % (len(ker), p))
    T = G.table
    if not np.array_equal(proj[T], Q.table[proj[:, None], proj[None, :]]):
        raise PreconditionFail("the quotient map is not a homomorphism")
    A = np.asarray(sorted(int(x) for x in A))
    if nilpotency_class(subgroup(Q, A)) > 2:
        raise PreconditionFail("A has nilpotency class above 2")
    pre = np.nonzero(np.isin(proj, A))[0]
    B = G.closure(np.unique(G.powers_all(p * p)[pre]))
    HB = subgroup(G, B)
    if rank is None:
        rank = sectional_rank(G, bound=max(SECTIONAL_BOUND, G.order))
    index = G.order // len(B)
    bound = p ** (4 * rank) * (Q.order // len(A))
    cert = {
        "order": len(B),
        "powerful": is_powerful(HB),
        "pcentral": is_pcentral(HB),
        "class": nilpotency_class(HB),
        "index": index,
        "index_bound": bound,
        "index_ok": index <= bound,
        "sectional_rank": rank,
        "omega_ep": "not certified",
    }
    return B, cert


# ------------------------------------------------------------- isomorphism

def invariants(G):
    o = G.element_orders
    prof = tuple(sorted(np.unique(o, return_counts=True)[1].tolist()))
    vals = tuple(np.unique(o).tolist())
    return (G.order, vals, prof, len(center(G)), len(derived_subgroup(G)), G.exponent,
            G.is_abelian(), len(omega1(G)), len(frattini(G)))


def _word_values(G, imgs, words):
    """Evaluate words (tuples of signed generator positions) on candidate images."""
    T = G.table
    out = []
    for w in words:
        cur = np.zeros(imgs.shape[0], dtype=np.int64)
        for s in w:
            g = imgs[:, abs(s) - 1]
            if s < 0:
                g = G.inv[g]
            cur = T[cur, g]
        out.append(cur)
    return out


def _extend_hom(T1, T2, gens1, imgs, n):
    phi = -np.ones(n, dtype=np.int64)
    phi[0] = 0
    frontier = np.array([0], dtype=np.int64)
    gens1 = np.asarray(gens1)
    imgs = np.asarray(imgs)
    while len(frontier):
        new_src = T1[frontier][:, gens1].ravel()
        new_img = T2[phi[frontier]][:, imgs].ravel()
        known = phi[new_src] >= 0
        if (phi[new_src[known]] != new_img[known]).any():
            return None
        fresh_src, first = np.unique(new_src[~known], return_index=True)
        fresh_img = new_img[~known][first]
        # the same new element reached twice in this layer must agree
        chk_src = new_src[~known]
        chk_img = new_img[~known]
        lookup = -np.ones(n, dtype=np.int64)
        lookup[fresh_src] = fresh_img
        if (lookup[chk_src] != chk_img).any():
            return None
        phi[fresh_src] = fresh_img
        frontier = fresh_src
    return phi


def find_isomorphism(G1, G2, bound=ISO_BOUND):
    """An isomorphism G1 -> G2 as an element array, or None."""
    if G1.order != G2.order:
        return None
    if G1.order > bound:
        raise TooLarge("isomorphism search limited to order %d (got %d)" % (bound, G1.order))
    if invariants(G1) != invariants(G2):
        return None
    n = G1.order
    gens = G1.generating_set()
    k = len(gens)
    o1, o2 = G1.element_orders, G2.element_orders
    c1 = np.array([np.count_nonzero(G1.table[x] == G1.table[:, x]) for x in range(n)])
    c2 = np.array([np.count_nonzero(G2.table[x] == G2.table[:, x]) for x in range(n)])
    cand = [np.nonzero((o2 == o1[g]) & (c2 == c1[g]))[0] for g in gens]
    letters = list(range(1, k + 1)) + [-i for i in range(1, k + 1)]
    words = [w for L in (2, 3) for w in itertools.product(letters, repeat=L)]
    gimg = np.array([gens], dtype=np.int64)
    target = [int(o1[v[0]]) for v in _word_values(G1, gimg, words)]

    def rec(level, chosen):
        if level == k:
            phi = _extend_hom(G1.table, G2.table, gens, chosen, n)
            if phi is not None and (phi >= 0).all() and len(np.unique(phi)) == n:
                return phi
            return None
        cands = cand[level]
        imgs = np.zeros((len(cands), k), dtype=np.int64)
        imgs[:, :level] = chosen
        imgs[:, level] = cands
        mask = np.ones(len(cands), dtype=bool)
        for w, t in zip(words, target):
            if max(abs(s) for s in w) != level + 1:
                continue
            v = _word_values(G2, imgs, [w])[0]
            mask &= o2[v] == t
        for c in cands[mask].tolist():
            res = rec(level + 1, chosen + [c])
            if res is not None:
                return res
        return None

    return rec(0, [])


def brute_force_isomorphic(G1, G2, bound=ISO_BOUND):
    return find_isomorphism(G1, G2, bound) is not None


def is_homomorphism(G1, G2, phi):
    phi = np.asarray(phi)
    return bool(np.array_equal(phi[G1.table], G2.table[phi[:, None], phi[None, :]]))


def is_isomorphism(G1, G2, phi):
    phi = np.asarray(phi)
    return len(np.unique(phi)) == G1.order == G2.order and is_homomorphism(G1, G2, phi)


# ------------------------------------------------------------ matrix groups

def matrix_group(gens, modulus, limit=TABLE_LIMIT):
    """The group generated by integer matrices mod `modulus`, elements labelled by matrices."""
    gens = [np.asarray(g, dtype=np.int64) % modulus for g in gens]
    d = gens[0].shape[0]
    ident = np.eye(d, dtype=np.int64)
    key = lambda a: tuple(a.ravel().tolist())
    elems = [ident]
    ix = {key(ident): 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = (a @ g) % modulus
                kc = key(c)
                if kc not in ix:
                    ix[kc] = len(elems)
                    elems.append(c)
                    nxt.append(c)
                    if len(elems) > limit:
                        raise TooLarge("matrix group exceeds %d elements" % limit)
        frontier = nxt
    n = len(elems)
    table = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            table[i, j] = ix[key((a @ b) % modulus)]
    G = Group(table, prime_of(n) if n > 1 else None, labels=[key(a) for a in elems], kind="matrix",
              info={"matrices": elems, "modulus": modulus, "generators": [ix[key(g)] for g in gens]},
              name="matgrp")
    return G


def cyclic_matrix_group(M, modulus):
    """Cyclic group generated by M, with element k labelled M^k."""
    M = np.asarray(M, dtype=np.int64) % modulus
    d = M.shape[0]
    mats = [np.eye(d, dtype=np.int64)]
    while True:
        nxt = (mats[-1] @ M) % modulus
        if np.array_equal(nxt, mats[0]):
            break
        mats.append(nxt)
        if len(mats) > TABLE_LIMIT:
            raise TooLarge("matrix has huge order")
    n = len(mats)
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    G = Group(table, prime_of(n) if n > 1 else None, labels=list(range(n)), kind="abelian",
              info={"exponents": [n], "matrices": mats, "generators": [1 % n]}, name="C%d" % n)
    G.coords = np.arange(n).reshape(n, 1)
    G.moduli = np.array([n])
    return G, mats


def build_constructible(datum):
    """The two split constructible groups; see artifact.constructible."""
    from .constructible import build_constructible as _bc
    return _bc(datum)


# ------------------------------------------------------- random twists

def random_twist(rng, p=3, max_log=6, max_rank=3, tries=5000):
    """A random (A, lambda) with Im(lambda) <= Rad(lambda) and |A| <= p^max_log.

    Values of lambda on generator pairs are drawn from the multiples allowed
    by the orders of the two generators, then rejected until the image lies
    in the radical.  Some pairs are left zero so that non-powerful and
    non-p-central examples show up too.
    """
    for _ in range(tries):
        d = 1 if max_rank == 1 or rng.random() < 0.1 else int(rng.integers(2, max_rank + 1))
        exps = []
        for i in range(d):
            room = max_log - sum(exps) - (d - i - 1)
            if room < 1:
                break
            exps.append(int(rng.integers(1, min(3, room) + 1)))
        mod = [p ** e for e in exps]
        d = len(mod)
        values = {}
        for i in range(d):
            for j in range(i + 1, d):
                if rng.random() < 0.25:
                    continue
                m = min(mod[i], mod[j])
                v = []
                for n in mod:
                    step = n // math.gcd(n, m)
                    v.append(int(step * rng.integers(0, n // step)))
                values[(i, j)] = v
        lam = AlternatingForm(mod, mod, values)
        if lam.is_zero() and rng.random() < 0.9:
            continue
        if lam.image_in_radical():
            return build_abelian(mod), lam
    raise PreconditionFail("no admissible twist found in %d tries" % tries)


def _image_subgroup(A, lam):
    gens = [encode_coords(np.asarray(v) % A.moduli, list(A.moduli)) for v in lam.image_generators()]
    return A.closure([int(g) for g in gens])


def _same_subgroup_tables(G1, G2, R):
    R = np.asarray(R)
    return bool(np.array_equal(G1.table[np.ix_(R, R)], G2.table[np.ix_(R, R)]))


def twist_properties(A, lam, rng=None, samples=4):
    """Exhaustive checks of the basic properties of A_lambda against A.

    Returns a dict of booleans; every entry should be True.
    """
    Al = build_twisted(A, lam)
    p = A.p
    out = {}
    out["axioms"] = Al.check_axioms()
    out["omega1_equal"] = bool(np.array_equal(omega1(A), omega1(Al)))
    out["same_powers"] = all(np.array_equal(A.powers_all(k), Al.powers_all(k)) for k in range(1, A.exponent + 1))
    out["class_at_most_2"] = nilpotency_class(Al) <= 2
    rad = np.nonzero(lam.radical_mask(A.coords))[0]
    out["radical_is_center"] = bool(np.array_equal(rad, center(Al)))
    # subsets of the radical: subgroup in one iff in the other, identity is an isomorphism
    rng = rng if rng is not None else np.random.default_rng(0)
    sub_ok = True
    for _ in range(samples):
        k = int(rng.integers(1, min(4, len(rad)) + 1))
        pick = rng.choice(rad, size=k, replace=False)
        S = A.closure([int(x) for x in pick])
        S2 = Al.closure([int(x) for x in pick])
        sub_ok &= bool(np.array_equal(S, S2)) and _same_subgroup_tables(A, Al, S)
        subset = np.unique(np.concatenate([[0], pick]))
        closed_A = np.isin(A.table[np.ix_(subset, subset)], subset).all()
        closed_Al = np.isin(Al.table[np.ix_(subset, subset)], subset).all()
        sub_ok &= bool(closed_A == closed_Al)
    out["radical_subgroups"] = sub_ok
    # quotients by Im <= R <= Rad
    quot_ok = True
    for R in (_image_subgroup(A, lam), rad):
        cen = center(Al)
        quot_ok &= bool(np.isin(R, cen).all())
        Q1, pr1 = quotient_group(A, R)
        Q2, pr2 = quotient_group(Al, R)
        quot_ok &= bool(np.array_equal(pr1, pr2) and np.array_equal(Q1.table, Q2.table))
    out["quotient_identity"] = quot_ok
    # the iff conditions, each side computed independently
    img = np.array(lam.image_generators()).reshape(-1, len(A.moduli))
    in_pA = bool((img % p == 0).all())
    out["powerful_iff"] = is_powerful(Al) == in_pA
    om_in_rad = bool(np.isin(omega1(A), rad).all())
    out["pcentral_iff"] = is_pcentral(Al) == om_in_rad
    out["_powerful"] = in_pA
    out["_pcentral"] = om_in_rad
    return out
