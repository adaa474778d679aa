"""Split constructible groups and twisted lattice quotients.

A datum is a point group P acting on T_0 = Z_p^d by integer matrices,
P-invariant lattices U <= V <= T_0 given at a finite precision, and an
alternating P-equivariant form gamma on T_0/V with values in V/U, stored by
its values on pairs of standard basis vectors.

Two routes to the split group are built.  The first Baer-sums the extension
cocycles of X x| P and of R_0/U = (T_0/U) x| P over (T_0/V) x| P; the second
twists T_0/U by lambda = inclusion . gamma . projection and takes the
semidirect product with P.  The map (z, x, p) -> (z + s(x), p), with s the
digit-preserving lift T_0/V -> T_0/U, is then checked to be an isomorphism.
"""
import numpy as np

from .errors import (EvenPrime, InvalidForm, NotEquivariant, PreconditionFail)
from .groups import (ActionHom, Group, baer_sum, build_extension, build_semidirect,
                     center, find_isomorphism, is_isomorphism, is_pcentral, is_powerful,
                     matrix_group, omega1, quotient_group, subgroup)
from .lattices import LatticeQuotient


class ConstructibleDatum:
    def __init__(self, p, matrices, V, U, gamma):
        self.p = int(p)
        self.matrices = [np.asarray(A, dtype=np.int64) for A in matrices]
        self.V = V
        self.U = U
        self.d = U.d
        G = np.zeros((self.d, self.d, self.d), dtype=np.int64)
        if isinstance(gamma, dict):
            for (i, j), v in gamma.items():
                G[i, j] = v
                G[j, i] = -np.asarray(v, dtype=np.int64)
        elif gamma is not None:
            G[:] = np.asarray(gamma, dtype=np.int64)
        self.gamma = G

    def gamma_eval(self, X, Y):
        """gamma(x, y) in T_0 coordinates (not reduced)."""
        return np.einsum("...i,...j,ijk->...k", np.asarray(X, dtype=np.int64),
                         np.asarray(Y, dtype=np.int64), self.gamma)

    def is_zero(self):
        return all(self.U.contains(self.gamma[i, j]) for i in range(self.d) for j in range(self.d))

    def validate(self):
        U, V, d = self.U, self.V, self.d
        if U.d != V.d or U.a != V.a or U.p != V.p:
            raise PreconditionFail("U and V live in different ambient lattices")
        if not V.contains_lattice(U):
            raise PreconditionFail("U is not contained in V")
        for name, L in (("U", U), ("V", V)):
            if not L.is_invariant(self.matrices):
                raise PreconditionFail("%s is not invariant under the point group" % name)
        eye = np.eye(d, dtype=np.int64)
        for i in range(d):
            if not U.contains(self.gamma[i, i]):
                raise InvalidForm("gamma(e_%d, e_%d) is not zero" % (i + 1, i + 1))
            for j in range(d):
                if not V.contains(self.gamma[i, j]):
                    raise InvalidForm("gamma(e_%d, e_%d) does not lie in V" % (i + 1, j + 1))
                if not U.contains(self.gamma[i, j] + self.gamma[j, i]):
                    raise InvalidForm("gamma is not alternating")
        for h in V.H:
            for j in range(d):
                if not U.contains(self.gamma_eval(np.array(h, dtype=np.int64), eye[j])):
                    raise InvalidForm("gamma does not vanish on V x T_0 modulo U")
        if not self.is_zero() and self.p == 2:
            raise EvenPrime("twisting needs an odd prime")
        for k, A in enumerate(self.matrices):
            for i in range(d):
                for j in range(d):
                    lhs = A @ self.gamma[i, j]
                    rhs = self.gamma_eval(A @ eye[i], A @ eye[j])
                    if not U.contains(lhs - rhs):
                        raise NotEquivariant(
                            "gamma is not equivariant: generator %d moves gamma(e_%d, e_%d) = %s to %s, "
                            "but gamma(g e_%d, g e_%d) = %s (mod U)" % (
                                k, i + 1, j + 1, U.reduce(self.gamma[i, j]).tolist(), U.reduce(lhs).tolist(),
                                i + 1, j + 1, U.reduce(rhs).tolist()))
        return True


def lattice_group(L):
    """T_0/L as an abelian group on canonical representatives."""
    reps = L.representatives()
    table = L.encode(L.reduce((reps[:, None, :] + reps[None, :, :]).reshape(-1, L.d))).reshape(len(reps), len(reps))
    G = Group(table, L.p, kind="lattice_quotient", info={"lattice": L}, name="T0/L")
    G.coords = reps
    return G


def twisted_lattice_group(L, gamma_eval, half):
    """(T_0/L, +_lambda) with lambda(x, y) = gamma(x, y) reduced mod L."""
    reps = L.representatives()
    n = len(reps)
    g = gamma_eval(reps[:, None, :], reps[None, :, :])
    s = reps[:, None, :] + reps[None, :, :] + half * g
    table = L.encode(L.reduce(s.reshape(-1, L.d))).reshape(n, n)
    G = Group(table, L.p, kind="twisted", info={"lattice": L}, name="(T0/L,+lambda)")
    G.coords = reps
    return G


def _matrix_perms(L, mats):
    reps = L.representatives()
    return [L.encode(L.reduce(reps @ np.asarray(A, dtype=np.int64).T)) for A in mats]


def _point_group(datum):
    P = matrix_group(datum.matrices, datum.U.modulus)
    return P, P.info["matrices"], P.info["generators"]


def _cocycle(E, section, zinv, Q):
    T = E.table
    s = np.asarray(section)
    prod = T[s[:, None], s[None, :]]
    back = E.inv[s[Q.table]]
    th = zinv[T[prod, back]]
    if (th < 0).any():
        raise ValueError("section values do not differ by kernel elements")
    return th


def _kernel_action(E, section, zemb, zinv, Q):
    T = E.table
    images = {}
    for g in Q.generating_set():
        sg = section[g]
        images[g] = zinv[T[T[sg, zemb], E.inv[sg]]]
    return images


class ConstructiblePair:
    def __init__(self, via_baer, via_twist, bijection, parts):
        self.via_baer = via_baer
        self.via_twist = via_twist
        self.bijection = bijection
        self.parts = parts

    def verify_bijection(self):
        return is_isomorphism(self.via_baer, self.via_twist, self.bijection)


def build_constructible(datum):
    datum.validate()
    p, U, V, d = datum.p, datum.U, datum.V, datum.d
    modulus = U.modulus
    half = (modulus + 1) // 2 if p != 2 else 0
    P, Pmats, Pgens = _point_group(datum)

    # route 2: (T_0/U, +_lambda) x| P
    Atw = twisted_lattice_group(U, datum.gamma_eval, half)
    permsU = _matrix_perms(U, Pmats)
    act_tw = ActionHom(P, Atw, {g: permsU[g] for g in Pgens})
    G_twist = build_semidirect(Atw, P, act_tw)

    # route 1: Baer sum over Q = (T_0/V) x| P with kernel V/U
    A0 = lattice_group(U)
    repsU = A0.coords
    TV = lattice_group(V)
    repsV = TV.coords
    nU, nV = A0.order, TV.order
    permsV = _matrix_perms(V, Pmats)
    Q = build_semidirect(TV, P, ActionHom(P, TV, {g: permsV[g] for g in Pgens}))
    zmask = ~np.any(V.reduce(repsU), axis=1)
    zelems = np.nonzero(zmask)[0]
    Z = subgroup(A0, zelems)
    nZ = Z.order
    zpos = -np.ones(nU, dtype=np.int64)
    zpos[zelems] = np.arange(nZ)
    zvec = repsU[zelems]

    # X = V/U x T_0/V with (z1, x1)(z2, x2) = (z1 + z2 + gamma(x1, x2)/2, x1 + x2)
    nX = nZ * nV
    idx = np.arange(nX)
    xz, xx = idx % nZ, idx // nZ
    gz = datum.gamma_eval(repsV[xx][:, None, :], repsV[xx][None, :, :])
    zs = zvec[xz][:, None, :] + zvec[xz][None, :, :] + half * gz
    zsum = zpos[U.encode(U.reduce(zs.reshape(-1, d)))].reshape(nX, nX)
    xsum = TV.table[xx[:, None], xx[None, :]]
    X = Group(zsum + nZ * xsum, p, kind="table", name="X")
    permsX = {}
    for g in Pgens:
        A = Pmats[g]
        zi = zpos[U.encode(U.reduce(zvec[xz] @ A.T))]
        xi = V.encode(V.reduce(repsV[xx] @ A.T))
        permsX[g] = zi + nZ * xi
    E1 = build_semidirect(X, P, ActionHom(P, X, permsX))
    E2 = build_semidirect(A0, P, ActionHom(P, A0, {g: permsU[g] for g in Pgens}))

    qx, qp = np.arange(Q.order) % nV, np.arange(Q.order) // nV
    sec1 = nZ * qx + nX * qp
    zinv1 = -np.ones(E1.order, dtype=np.int64)
    zinv1[np.arange(nZ)] = np.arange(nZ)
    lift = U.encode(U.reduce(repsV))
    sec2 = lift[qx] + nU * qp
    zemb2 = zelems
    zinv2 = -np.ones(E2.order, dtype=np.int64)
    zinv2[zemb2] = np.arange(nZ)
    act1 = _kernel_action(E1, sec1, np.arange(nZ), zinv1, Q)
    act2 = _kernel_action(E2, sec2, zemb2, zinv2, Q)
    for g in act1:
        if not np.array_equal(act1[g], act2[g]):
            raise PreconditionFail("the two extensions induce different actions on V/U")
    act = ActionHom(Q, Z, act1)
    th1 = _cocycle(E1, sec1, zinv1, Q)
    th2 = _cocycle(E2, sec2, zinv2, Q)
    ext1 = build_extension(Q, Z, act, th1)
    ext2 = build_extension(Q, Z, act, th2)
    G_baer = baer_sum(ext1, ext2)

    # (z, x, p) -> (z + s(x), p)
    gi = np.arange(G_baer.order)
    z, q = gi % nZ, gi // nZ
    x, pp = q % nV, q // nV
    y = U.encode(U.reduce(zvec[z] + repsV[x]))
    phi = y + nU * pp
    parts = {"P": P, "Q": Q, "Z": Z, "X": X, "E1": E1, "E2": E2, "A_lambda": Atw,
             "ext1": ext1, "ext2": ext2}
    return ConstructiblePair(G_baer, G_twist, phi, parts)


# ------------------------------------------------------------------ ΩEP

class OmegaCover:
    def __init__(self, G, H, proj, report):
        self.G = G
        self.H = H
        self.proj = proj
        self.report = report

    @property
    def ok(self):
        return all(v for k, v in self.report.items() if isinstance(v, bool))


def verify_omega_ep_cover(G, H, proj=None, bound=3 ** 6):
    """Check that H is p-central and H / Omega_1(H) is isomorphic to G.

    With `proj` (an array H -> G) the check is exact: proj must be a
    surjective homomorphism with kernel Omega_1(H).  Without it the quotient
    is compared by brute-force isomorphism search.
    """
    report = {}
    report["H_pcentral"] = is_pcentral(H)
    om = omega1(H)
    report["omega1_order"] = len(om)
    if proj is not None:
        proj = np.asarray(proj)
        hom = np.array_equal(proj[H.table], G.table[proj[:, None], proj[None, :]])
        report["projection_homomorphism"] = bool(hom)
        report["projection_surjective"] = len(np.unique(proj)) == G.order
        report["kernel_is_omega1"] = bool(np.array_equal(np.nonzero(proj == 0)[0], om))
    else:
        Qh, _ = quotient_group(H, om)
        report["quotient_isomorphic"] = Qh.order == G.order and find_isomorphism(Qh, G, bound) is not None
    return OmegaCover(G, H, proj, report)


def omega_ep_cover_from_lattices(p, matrices, V, W, gamma):
    """Cover of (T_0/W, +_lambda') by (T_0/pW, +_lambda'') as in the lattice construction.

    Needs V <= p T_0 and W <= p V with W invariant; gamma is the alternating
    form on T_0/V with values in V (the caller's U is irrelevant here, only
    the values of gamma modulo W and pW are used).
    """
    d = W.d
    if not LatticeQuotient.scaled(p, d, V.a, 1).contains_lattice(V):
        raise PreconditionFail("V is not contained in p T_0")
    pV = V.scale(1)
    if not pV.contains_lattice(W):
        raise PreconditionFail("W is not contained in p V")
    if not W.is_invariant(matrices):
        raise PreconditionFail("W is not invariant")
    Wp = W.scale(1)
    datum_A = ConstructibleDatum(p, matrices, V, W, gamma)
    datum_A.validate()
    datum_H = ConstructibleDatum(p, matrices, V, Wp, gamma)
    datum_H.validate()
    halfA = (W.modulus + 1) // 2
    halfH = (Wp.modulus + 1) // 2
    A = twisted_lattice_group(W, datum_A.gamma_eval, halfA)
    H = twisted_lattice_group(Wp, datum_H.gamma_eval, halfH)
    proj = W.encode(W.reduce(H.coords))
    cov = verify_omega_ep_cover(A, H, proj)
    cov.report["A_powerful"] = is_powerful(A)
    cov.report["A_pcentral"] = is_pcentral(A)
    cov.report["H_powerful"] = is_powerful(H)
    return cov


def metacyclic_group(m, n, r):
    """C_m x| C_n with the generator of C_n acting by multiplication by r."""
    from .groups import cyclic
    K = cyclic(m)
    P = cyclic(n)
    perm = (np.arange(m) * r) % m
    return build_semidirect(K, P, ActionHom(P, K, {1: perm}))
