"""Finite-precision p-adic lattices and integral actions.

A sublattice L of T_0 = Z_p^d is stored at precision a, meaning
p^a T_0 <= L, through its row Hermite form: an upper triangular integer
matrix H with p-power pivots and entries above each pivot reduced modulo it.
The row span of H plus p^a Z^d is L, and H is unique, so equality of
lattices is equality of these matrices.
"""
import numpy as np

from .errors import DivisibilityViolated, EvenPrime, NotUniserial, PrecisionExceeded
from .fplinalg import kernel_matrix, FpMatrix


def companion_matrix(p):
    """Companion matrix of 1 + y + ... + y^{p-1}."""
    d = p - 1
    M = np.zeros((d, d), dtype=np.int64)
    for i in range(1, d):
        M[i, i - 1] = 1
    M[:, d - 1] = -1
    return M


def sylow_permutations(p, m):
    """Generators of the Sylow p-subgroup of Sym(p^m) (iterated wreath product)."""
    n = p ** m
    gens = []
    for j in range(m):
        step, block = p ** j, p ** (j + 1)
        perm = list(range(n))
        for i in range(block):
            perm[i] = (i + step) % block
        gens.append(tuple(perm))
    return gens


def block_permutation_matrix(perm, b):
    """Moves coordinate block j to block perm[j]; blocks have size b."""
    n = len(perm)
    P = np.zeros((n * b, n * b), dtype=np.int64)
    for j, i in enumerate(perm):
        P[i * b:(i + 1) * b, j * b:(j + 1) * b] = np.eye(b, dtype=np.int64)
    return P


def standard_action(p, x):
    """Generators of the point group W(x) acting on Z_p^{d_x}, d_x = p^{x-1}(p-1).

    The first generator is M on the first block of coordinates and the
    identity elsewhere; the rest permute the p^{x-1} blocks by generators of
    the Sylow p-subgroup of Sym(p^{x-1}).  Together they generate the full
    wreath product C_p wr (C_p wr ... wr C_p).
    """
    if p == 2:
        raise EvenPrime("p = 2 point groups are out of scope")
    if x < 1:
        raise ValueError("x must be at least 1")
    M = companion_matrix(p)
    b = p - 1
    nblocks = p ** (x - 1)
    first = np.eye(nblocks * b, dtype=np.int64)
    first[:b, :b] = M
    gens = [first]
    for perm in sylow_permutations(p, x - 1):
        gens.append(block_permutation_matrix(perm, b))
    return gens


def matrix_order(A, modulus, limit=10 ** 6):
    A = np.asarray(A, dtype=np.int64) % modulus
    ident = np.eye(A.shape[0], dtype=np.int64)
    cur, k = A.copy(), 1
    while not np.array_equal(cur, ident):
        cur = (cur @ A) % modulus
        k += 1
        if k > limit:
            raise ValueError("matrix order exceeds limit")
    return k


def int_det(A):
    """Exact integer determinant by fraction-free elimination (Bareiss)."""
    M = [[int(v) for v in row] for row in np.asarray(A)]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


def row_hermite(vectors, d, modulus):
    """Row Hermite form of span(vectors) + modulus * Z^d (Python integers)."""
    rows = [[int(v) % modulus for v in vec] for vec in vectors]
    rows += [[modulus if i == j else 0 for j in range(d)] for i in range(d)]
    rows = [r for r in rows if any(r)]
    H = []
    for col in range(d):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r2 = [a - q * b for a, b in zip(r, piv)]
                if r2[col] != 0:
                    nxt.append(r2)
                elif any(r2):
                    rest.append(r2)
            active = nxt
        piv = active[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        H.append(piv)
        rows = rest
    for i in range(d):
        for k in range(i):
            q = H[k][i] // H[i][i]
            if q:
                H[k] = [a - q * b for a, b in zip(H[k], H[i])]
    return H


def _vp(n, p):
    k = 0
    while n % p == 0 and n > 1:
        n //= p
        k += 1
    return k


class LatticeQuotient:
    """A sublattice L with p^a T_0 <= L <= T_0 = Z_p^d."""

    def __init__(self, p, d, a, generators):
        self.p, self.d, self.a = int(p), int(d), int(a)
        self.modulus = self.p ** self.a
        gens = np.asarray(generators, dtype=object).reshape(-1, d) if len(generators) else []
        self.H = row_hermite([list(g) for g in gens], d, self.modulus)

    @classmethod
    def full(cls, p, d, a):
        return cls(p, d, a, np.eye(d, dtype=np.int64))

    @classmethod
    def scaled(cls, p, d, a, k):
        """p^k T_0."""
        if k > a:
            raise PrecisionExceeded("p^%d T_0 does not contain p^%d T_0" % (k, a))
        return cls(p, d, a, (p ** k) * np.eye(d, dtype=np.int64))

    @property
    def hermite(self):
        return np.array(self.H, dtype=np.int64)

    @property
    def basis(self):
        """Generators as columns."""
        return self.hermite.T

    @property
    def diagonal(self):
        return [self.H[i][i] for i in range(self.d)]

    @property
    def index_exponent(self):
        return sum(_vp(x, self.p) for x in self.diagonal)

    @property
    def index(self):
        return self.p ** self.index_exponent

    def __eq__(self, other):
        return (isinstance(other, LatticeQuotient) and self.p == other.p and self.d == other.d
                and self.a == other.a and self.H == other.H)

    def __hash__(self):
        return hash((self.p, self.d, self.a, tuple(map(tuple, self.H))))

    def __repr__(self):
        return "LatticeQuotient(p=%d, d=%d, a=%d, H=%s)" % (self.p, self.d, self.a, self.H)

    def reduce(self, v):
        """Canonical representative of v + L: digits 0 <= v_i < H[i][i]."""
        v = np.array(v, dtype=np.int64)
        one = v.ndim == 1
        V = v.reshape(1, -1) if one else v.copy()
        H = self.hermite
        for i in range(self.d):
            q = np.floor_divide(V[:, i], H[i, i])
            V = V - q[:, None] * H[i][None, :]
        return V[0] if one else V

    def contains(self, v):
        return not np.any(self.reduce(v))

    def contains_lattice(self, other):
        return all(self.contains(row) for row in other.H)

    def coordinates(self, v):
        """Integer coefficients c with c @ H = v, or None when v is not in L."""
        v = [int(x) for x in v]
        c = []
        for i in range(self.d):
            if v[i] % self.H[i][i]:
                return None
            q = v[i] // self.H[i][i]
            c.append(q)
            v = [a - q * b for a, b in zip(v, self.H[i])]
        return c if not any(v) else None

    def is_invariant(self, matrices):
        for A in matrices:
            A = np.asarray(A, dtype=np.int64)
            for h in self.H:
                if not self.contains(A @ np.array(h, dtype=np.int64)):
                    return False
        return True

    def scale(self, s):
        """p^s L; fails if the result no longer contains p^a T_0."""
        out = LatticeQuotient(self.p, self.d, self.a, [[x * self.p ** s for x in h] for h in self.H])
        if out.index_exponent != self.index_exponent + s * self.d:
            raise PrecisionExceeded("p^%d L drops below p^%d T_0" % (s, self.a))
        return out

    def representatives(self):
        """All canonical coset representatives of T_0/L, mixed radix over the diagonal."""
        import itertools
        diag = self.diagonal
        return np.array(list(itertools.product(*[range(x) for x in diag])), dtype=np.int64).reshape(-1, self.d)

    def encode(self, reps):
        """Index of canonical representatives (inverse of representatives())."""
        reps = np.asarray(reps, dtype=np.int64)
        idx = np.zeros(reps.shape[:-1], dtype=np.int64)
        for j, m in enumerate(self.diagonal):
            idx = idx * m + reps[..., j]
        return idx

    def to_json(self):
        return {"p": self.p, "d": self.d, "precision": self.a, "hermite": self.H}


def _action_on_layer(L, matrices):
    """Matrices of the action on L/pL in the Hermite basis (row vectors)."""
    p = L.p
    out = []
    for A in matrices:
        A = np.asarray(A, dtype=np.int64)
        B = np.zeros((L.d, L.d), dtype=np.int64)
        for r, h in enumerate(L.H):
            img = [int(x) for x in A @ np.array(h, dtype=np.int64)]
            c = L.coordinates(img)
            if c is None:
                c = L.coordinates([x % L.modulus for x in img])
            if c is None:
                raise NotUniserial("lattice is not invariant under the action")
            B[r] = [x % p for x in c]
        out.append(B)
    return out


def maximal_invariant_sublattices(L, matrices):
    """Functionals cutting out the invariant hyperplanes of L/pL (as columns)."""
    p = L.p
    Bs = _action_on_layer(L, matrices)
    stack = np.concatenate([(B - np.eye(L.d, dtype=np.int64)) % p for B in Bs], axis=0) if Bs else np.zeros((0, L.d), dtype=np.int64)
    return kernel_matrix(FpMatrix.from_dense(stack, p))


def next_invariant(L, matrices):
    K = maximal_invariant_sublattices(L, matrices)
    if K.shape[1] != 1:
        raise NotUniserial("%d invariant hyperplanes below index %d" % (
            (L.p ** K.shape[1] - 1) // (L.p - 1), L.index))
    f = K[:, 0]
    # coefficient vectors c with c . f = 0 mod p
    sol = kernel_matrix(FpMatrix.from_dense(f.reshape(1, -1), L.p))
    H = np.array(L.H, dtype=object)
    gens = [list(L.p * H[i]) for i in range(L.d)]
    for k in range(sol.shape[1]):
        c = sol[:, k]
        gens.append([int(sum(int(c[r]) * int(H[r][j]) for r in range(L.d))) for j in range(L.d)])
    return LatticeQuotient(L.p, L.d, L.a, gens)


def uniserial_filtration(matrices, a, i, p=None, d=None):
    """The unique invariant sublattice of index p^i, or a list when i is a range end."""
    mats = [np.asarray(A, dtype=np.int64) for A in matrices]
    if d is None:
        d = mats[0].shape[0]
    if p is None:
        raise ValueError("prime required")
    if i > a * d:
        raise PrecisionExceeded("index p^%d needs precision above p^%d in dimension %d" % (i, a, d))
    L = LatticeQuotient.full(p, d, a)
    for _ in range(i):
        L = next_invariant(L, mats)
    return L


def uniserial_chain(matrices, a, p, upto=None):
    mats = [np.asarray(A, dtype=np.int64) for A in matrices]
    d = mats[0].shape[0]
    upto = a * d if upto is None else upto
    if upto > a * d:
        raise PrecisionExceeded("chain to index p^%d needs more precision" % upto)
    chain = [LatticeQuotient.full(p, d, a)]
    for _ in range(upto):
        chain.append(next_invariant(chain[-1], mats))
    return chain


# ------------------------------------------------------------ Hillar-Rhea

class Endomorphism:
    """k -> A k on K = (+) Z/n_i, well defined by the divisibility constraints."""

    def __init__(self, A, moduli):
        self.A = np.asarray(A, dtype=np.int64)
        self.moduli = np.asarray(moduli, dtype=np.int64)

    def apply(self, coords):
        c = np.asarray(coords, dtype=np.int64)
        return (c @ self.A.T) % self.moduli

    def permutation(self, K):
        """Image of every element of an abelian group with matching coordinates."""
        from .groups import encode_coords
        return encode_coords(self.apply(K.coords), list(self.moduli))

    def __eq__(self, other):
        return np.array_equal((self.A.T % self.moduli).T % self.moduli[:, None],
                              (other.A.T % other.moduli).T % other.moduli[:, None])


def check_divisibility(A, moduli):
    A = np.asarray(A, dtype=np.int64)
    mod = [int(m) for m in moduli]
    for n in range(len(mod)):
        for m in range(len(mod)):
            need = max(mod[n] // mod[m], 1)
            if A[n, m] % need:
                return (n, m, need)
    return None


def hillar_rhea_reduce(A, moduli):
    """w(A): coordinate n goes to sum_m a_{n,m} k_m mod n_n."""
    A = np.asarray(A, dtype=np.int64)
    bad = check_divisibility(A, moduli)
    if bad is not None:
        n, m, need = bad
        raise DivisibilityViolated("entry (%d, %d) = %d is not divisible by %d" % (n + 1, m + 1, A[n, m], need))
    return Endomorphism(A, moduli)


class IntegralLifting:
    """Integer matrices for generators of P, reducing to the action on K."""

    def __init__(self, matrices):
        self.matrices = {int(g): np.asarray(A, dtype=np.int64) for g, A in matrices.items()}

    def __getitem__(self, g):
        return self.matrices[g]

    def generators(self):
        return sorted(self.matrices)


def check_integral_lifting(act, lift):
    """True iff w(lift(g)) is the given automorphism for every generator g."""
    K = act.K
    for g, A in lift.matrices.items():
        try:
            w = hillar_rhea_reduce(A, list(K.moduli))
        except DivisibilityViolated:
            return False
        if not np.array_equal(w.permutation(K), act.perms[g]):
            return False
    gens = set(lift.matrices)
    from .groups import closure
    return len(closure(act.P.table, sorted(gens))) == act.P.order
