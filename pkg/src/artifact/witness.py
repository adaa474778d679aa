"""Zig-zag witnesses between C^*(A) and C^*(A_lambda), and their checker.

A witness is a chain of complexes U_0 = C^*(A), U_1, .., U_r = C^*(A_lambda)
with one cochain map per consecutive pair, pointing either way.  The checker
verifies, for every map and every degree up to N: commutation with the
differentials, bijectivity on cohomology, compatibility with products of
cohomology classes, and commutation with the P-action.  It also compares the
E_infinity bigraded dims of Hom(B(P), -) applied to both ends.

The search below only tries a few natural candidates; it never claims that
no zig-zag exists.
"""
import json

import numpy as np

from .collapse import DEFAULT_BUDGET
from .errors import ArtifactError, MalformedWitness
from .fplinalg import FpMatrix, kernel_matrix, image_basis, rank, subquotient
from .groups import (ActionHom, AlternatingForm, build_abelian, build_twisted, cyclic,
                     is_pcentral, is_powerful)
from .homalg import BarCochains, semidirect_reduction
from .lattices import IntegralLifting, check_integral_lifting
from .zigzag import (Carry, Coordinate, Cup, Dense, UniversalModel, all_cocycles, cup_all,
                     materialize, phi, phi_o_image)

SCHEMA = "artifact.witness/1"


# ------------------------------------------------------------- complexes

class ExplicitComplex:
    """Finite complex given by matrices; products as bilinear tables on cochains."""

    kind = "explicit"

    def __init__(self, p, dims, d=None, products=None, actions=None, name=""):
        self.p = p
        self.dims = [int(x) for x in dims]
        self.d = {int(t): np.asarray(M, dtype=np.int64) % p for t, M in (d or {}).items()}
        self.products = {k: np.asarray(v, dtype=np.int64) % p for k, v in (products or {}).items()}
        self.actions = {int(g): {int(t): np.asarray(M, dtype=np.int64) % p for t, M in mats.items()}
                        for g, mats in (actions or {}).items()}
        self.name = name
        self._coh = {}

    def dim(self, t):
        return self.dims[t] if 0 <= t < len(self.dims) else 0

    def dmat(self, t):
        M = self.d.get(t)
        if M is None:
            return np.zeros((self.dim(t + 1), self.dim(t)), dtype=np.int64)
        return M

    def coboundary(self, V, t):
        """Columns of V are cochains of degree t."""
        return (self.dmat(t) @ V) % self.p

    def cohomology(self, t):
        if t not in self._coh:
            n = self.dim(t)
            D = self.dmat(t)
            Z = kernel_matrix(FpMatrix.from_dense(D, self.p), method="dense").T if D.shape[0] else np.eye(n, dtype=np.int64)
            B = image_basis(FpMatrix.from_dense(self.dmat(t - 1), self.p)) if t and self.dim(t - 1) else np.zeros((0, n), dtype=np.int64)
            self._coh[t] = subquotient(Z, B, self.p, ambient=n)
        return self._coh[t]

    def reps(self, t):
        return self.cohomology(t).reps.T

    def class_coords(self, V, t):
        return self.cohomology(t).coords(np.asarray(V).T)

    def product(self, U, a, V, b):
        """Columnwise products of cochains U (degree a) and V (degree b)."""
        T = self.products.get((a, b))
        if T is None:
            return np.zeros((self.dim(a + b), U.shape[1]), dtype=np.int64)
        return np.einsum("ik,jk,ijl->lk", U, V, T) % self.p

    def act(self, g, V, t):
        M = self.actions.get(g, {}).get(t)
        if M is None:
            return V % self.p
        return (M @ V) % self.p

    def to_json(self):
        return {"kind": "explicit", "name": self.name, "dims": self.dims,
                "differentials": {str(t): _sparse(M) for t, M in sorted(self.d.items()) if M.any()},
                "products": [[a, b, _sparse(T.reshape(T.shape[0], -1)), list(T.shape)]
                             for (a, b), T in sorted(self.products.items()) if T.any()],
                "actions": {str(g): {str(t): M.tolist() for t, M in sorted(m.items())}
                            for g, m in sorted(self.actions.items())}}


class BarEnd:
    """Bar cochains of an end group, with P acting through coordinate permutations."""

    kind = "bar"

    def __init__(self, G, which, N, act=None, budget=DEFAULT_BUDGET):
        self.G = G
        self.which = which
        self.p = G.p
        self.C = BarCochains(G, N + 1, budget=budget)
        self.act_hom = act
        self.name = which

    def dim(self, t):
        return self.G.order ** t

    def coboundary(self, V, t):
        return np.stack([self.C.coboundary(V[:, k], t) for k in range(V.shape[1])], axis=1) \
            if V.shape[1] else np.zeros((self.dim(t + 1), 0), dtype=np.int64)

    def reps(self, t):
        h = self.C.reduction.cohomology(t).dim
        cols = [self.C.representative(t, np.eye(h, dtype=np.int64)[k]) for k in range(h)]
        return np.stack(cols, axis=1) if cols else np.zeros((self.dim(t), 0), dtype=np.int64)

    def normalized(self, V, t):
        return all(self.C.is_normalized(V[:, k], t) for k in range(V.shape[1]))

    def class_coords(self, V, t):
        if not self.normalized(V, t):
            raise ArtifactError("cochains into bar complexes must be normalized")
        return self.C.class_coords(np.asarray(V).T, t)

    def product(self, U, a, V, b):
        return np.stack([self.C.cup(U[:, k], a, V[:, k], b) for k in range(U.shape[1])], axis=1) \
            if U.shape[1] else np.zeros((self.dim(a + b), 0), dtype=np.int64)

    def act(self, g, V, t):
        if self.act_hom is None:
            return V
        perm = self.act_hom.perms[int(self.act_hom.P.inv[g])]
        return np.stack([self.C.act(perm, V[:, k], t) for k in range(V.shape[1])], axis=1) \
            if V.shape[1] else V

    def to_json(self):
        return {"kind": "bar", "group": self.which}


def _sparse(M):
    M = np.asarray(M)
    r, c = np.nonzero(M)
    return {"shape": list(M.shape), "entries": [[int(i), int(j), int(M[i, j])] for i, j in zip(r, c)]}


def _dense(obj):
    if isinstance(obj, dict) and "shape" in obj:
        M = np.zeros(obj["shape"], dtype=np.int64)
        for i, j, v in obj["entries"]:
            M[i, j] = v
        return M
    return np.asarray(obj, dtype=np.int64)


# ---------------------------------------------------------------- witness

class ZigEdge:
    def __init__(self, src, tgt, matrices, identity=False):
        self.src = int(src)
        self.tgt = int(tgt)
        self.matrices = {int(t): np.asarray(M, dtype=np.int64) for t, M in (matrices or {}).items()}
        self.identity = identity

    def matrix(self, t, S, T):
        if self.identity:
            if S.dim(t) != T.dim(t):
                raise MalformedWitness("identity edge between complexes of different size")
            return np.eye(S.dim(t), dtype=np.int64)
        if t not in self.matrices:
            raise MalformedWitness("edge %d -> %d has no matrix in degree %d" % (self.src, self.tgt, t))
        M = self.matrices[t]
        if M.shape != (T.dim(t), S.dim(t)):
            raise MalformedWitness("edge %d -> %d, degree %d: shape %s, expected %s"
                                   % (self.src, self.tgt, t, M.shape, (T.dim(t), S.dim(t))))
        return M % S.p

    def to_json(self):
        if self.identity:
            return {"from": self.src, "to": self.tgt, "identity": True}
        return {"from": self.src, "to": self.tgt,
                "matrices": {str(t): _sparse(M) for t, M in sorted(self.matrices.items())}}


class ConjectureWitness:
    def __init__(self, p, moduli, lam_values, complexes, edges, P_order=1, lifting=None,
                 omega_ep="unverified", note=""):
        self.p = p
        self.moduli = [int(m) for m in moduli]
        self.lam_values = {tuple(k): list(v) for k, v in lam_values.items()}
        self.complexes = complexes
        self.edges = edges
        self.P_order = int(P_order)
        self.lifting = {int(g): np.asarray(A, dtype=np.int64) for g, A in (lifting or {}).items()}
        self.omega_ep = omega_ep
        self.note = note

    # groups and actions
    def groups(self):
        A = build_abelian(self.moduli)
        lam = AlternatingForm(self.moduli, self.moduli, {k: v for k, v in self.lam_values.items()})
        Al = build_twisted(A, lam)
        return A, lam, Al

    def acting(self, A, Al):
        if self.P_order == 1 or not self.lifting:
            return None, None, None
        P = cyclic(self.P_order)
        actA = ActionHom.from_matrices(P, A, self.lifting)
        actL = ActionHom(P, Al, dict(actA.gen_images))
        return P, actA, actL

    def to_json(self):
        return {"schema": SCHEMA, "p": self.p, "A": self.moduli,
                "lambda": [[i, j, list(map(int, v))] for (i, j), v in sorted(self.lam_values.items())],
                "P": {"cyclic": self.P_order,
                      "lifting": {str(g): A.tolist() for g, A in sorted(self.lifting.items())}},
                "omega_ep": self.omega_ep, "note": self.note,
                "complexes": [{"kind": "bar", "group": c[1]} if isinstance(c, tuple) else c.to_json()
                              for c in self.complexes],
                "maps": [e.to_json() for e in self.edges]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data, N=None, budget=DEFAULT_BUDGET):
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("schema") != SCHEMA:
            raise MalformedWitness("unknown witness schema %r" % data.get("schema"))
        try:
            p = int(data["p"])
            moduli = data["A"]
            lam = {(int(i), int(j)): v for i, j, v in data.get("lambda", [])}
            Pd = data.get("P") or {}
            w = cls(p, moduli, lam, [], [], P_order=Pd.get("cyclic", 1),
                    lifting={int(g): A for g, A in (Pd.get("lifting") or {}).items()},
                    omega_ep=data.get("omega_ep", "unverified"), note=data.get("note", ""))
            raw = data["complexes"]
            w._raw_complexes = raw
            for c in raw:
                if c["kind"] == "bar":
                    w.complexes.append(("bar", c["group"]))
                elif c["kind"] == "explicit":
                    prods = {}
                    for a, b, sp, shape in c.get("products", []):
                        prods[(int(a), int(b))] = _dense(sp).reshape(shape)
                    w.complexes.append(ExplicitComplex(
                        p, c["dims"], {int(t): _dense(M) for t, M in c.get("differentials", {}).items()},
                        prods, {int(g): {int(t): M for t, M in m.items()} for g, m in c.get("actions", {}).items()},
                        name=c.get("name", "")))
                else:
                    raise MalformedWitness("unknown complex kind %r" % c["kind"])
            for e in data["maps"]:
                if e.get("identity"):
                    w.edges.append(ZigEdge(e["from"], e["to"], None, identity=True))
                else:
                    w.edges.append(ZigEdge(e["from"], e["to"], {int(t): _dense(M) for t, M in e["matrices"].items()}))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedWitness("cannot read witness: %s" % exc)
        return w


def _resolve(w, N, budget):
    """Instantiate the complexes (bar ends get their groups) and validate the shape."""
    A, lam, Al = w.groups()
    P, actA, actL = w.acting(A, Al)
    out = []
    for c in w.complexes:
        if isinstance(c, tuple) or isinstance(c, BarEnd):
            which = c[1] if isinstance(c, tuple) else c.which
            if which == "A":
                out.append(BarEnd(A, "A", N, actA, budget))
            elif which == "A_lambda":
                out.append(BarEnd(Al, "A_lambda", N, actL, budget))
            else:
                raise MalformedWitness("bar complex of unknown group %r" % which)
        else:
            out.append(c)
    if len(out) < 2:
        raise MalformedWitness("a zig-zag needs at least two complexes")
    if not (out[0].kind == "bar" and out[0].which == "A"):
        raise MalformedWitness("the zig-zag must start at C^*(A)")
    if not (out[-1].kind == "bar" and out[-1].which == "A_lambda"):
        raise MalformedWitness("the zig-zag must end at C^*(A_lambda)")
    if len(w.edges) != len(out) - 1:
        raise MalformedWitness("%d complexes need %d maps, got %d" % (len(out), len(out) - 1, len(w.edges)))
    for i, e in enumerate(w.edges):
        if {e.src, e.tgt} != {i, i + 1}:
            raise MalformedWitness("map %d must connect complexes %d and %d" % (i, i, i + 1))
    return A, lam, Al, P, actA, actL, out


# ---------------------------------------------------------------- checks

def check_edge(S, T, e, N, P_gens=()):
    p = S.p
    M = {t: e.matrix(t, S, T) for t in range(N + 1)}
    rep = {}
    # cochain map
    cm = True
    for t in range(N + 1):
        if S.dim(t) == 0:
            continue
        if t < N:
            lhs = T.coboundary(M[t], t)
            rhs = (M[t + 1] @ S.coboundary(np.eye(S.dim(t), dtype=np.int64), t)) % p
            if ((lhs - rhs) % p).any():
                cm = False
        else:
            Z = S.cohomology(t).Z.T if isinstance(S, ExplicitComplex) else None
            if Z is not None and Z.size and T.coboundary((M[t] @ Z) % p, t).any():
                cm = False
    rep["cochain_map"] = cm
    # cohomology
    qi = {}
    H = {}
    try:
        for t in range(N + 1):
            R = S.reps(t)
            C = T.class_coords((M[t] @ R) % p, t) if R.shape[1] else np.zeros((0, 0), dtype=np.int64)
            ht = T.reps(t).shape[1]
            r = rank(FpMatrix.from_dense(C, p)) if C.size else 0
            qi[t] = bool(R.shape[1] == ht and r == ht)
            H[t] = (R, C)
        rep["quasi_iso"] = qi
        # products of classes
        fails = 0
        for a in range(1, N + 1):
            for b in range(1, N + 1 - a):
                Ra, Rb = H[a][0], H[b][0]
                if not Ra.shape[1] or not Rb.shape[1]:
                    continue
                I = [(i, j) for i in range(Ra.shape[1]) for j in range(Rb.shape[1])]
                U = Ra[:, [i for i, _ in I]]
                V = Rb[:, [j for _, j in I]]
                src_prod = S.product(U, a, V, b)
                left = T.class_coords((M[a + b] @ src_prod) % p, a + b)
                right = T.class_coords(T.product((M[a] @ U) % p, a, (M[b] @ V) % p, b), a + b)
                fails += int(((left - right) % p).any(axis=1).sum())
        rep["ring_iso"] = fails == 0 and all(qi.values())
        rep["ring_pairs_failed"] = fails
    except ArtifactError as exc:
        rep["quasi_iso"] = {"error": str(exc)}
        rep["ring_iso"] = False
    # P-invariance
    inv = True
    for g in P_gens:
        for t in range(N + 1):
            X = np.eye(S.dim(t), dtype=np.int64)
            if ((M[t] @ S.act(g, X, t) - T.act(g, M[t], t)) % p).any():
                inv = False
    rep["P_invariant"] = inv
    rep["ok"] = bool(rep["cochain_map"] and isinstance(rep["quasi_iso"], dict)
                     and all(v is True for v in rep["quasi_iso"].values())
                     and rep["ring_iso"] and rep["P_invariant"])
    return rep


def einfty_dims_end(G, P, act, N, budget=DEFAULT_BUDGET):
    """E_infinity bigraded dims of Hom(B(P), C^*(G)) up to total degree N."""
    from .spectra import filtered_from_reduction, spectral_sequence
    if P is None:
        from .collapse import bar_reduction
        dims = bar_reduction(G, budget).dims(N)
        return {(0, m): dims[m] for m in range(N + 1) if dims[m]}
    R = semidirect_reduction(G, P, act, budget)
    pages = spectral_sequence(filtered_from_reduction(R, N), Ntot=N)
    return {k: v for k, v in pages[-1].dims.items() if v and sum(k) <= N}


def verify_conjecture_witness(w, N=2, budget=DEFAULT_BUDGET, spectral=True):
    """Per-edge report and overall verdict (conjunction of all checks)."""
    A, lam, Al, P, actA, actL, cx = _resolve(w, N, budget)
    gens = sorted(w.lifting) if P is not None else []
    hyp = {"powerful": bool(is_powerful(Al)), "p_central": bool(is_pcentral(Al)),
           "lambda_equivariant": bool(lam.is_equivariant([w.lifting[g] for g in gens])) if gens else True,
           "lifting_valid": bool(check_integral_lifting(actA, IntegralLifting(w.lifting))) if gens else True,
           "omega_ep": w.omega_ep}
    edges = []
    for i, e in enumerate(w.edges):
        S, T = cx[e.src], cx[e.tgt]
        r = check_edge(S, T, e, N, gens)
        r["edge"] = "%d->%d" % (e.src, e.tgt)
        edges.append(r)
    out = {"schema": "artifact.witness-report/1", "N": N, "hypotheses": hyp, "edges": edges}
    ok = all(r["ok"] for r in edges)
    if spectral:
        e1 = einfty_dims_end(A, P, actA, N, budget)
        e2 = einfty_dims_end(Al, P, actL, N, budget)
        out["einfty_A"] = {str(k): v for k, v in sorted(e1.items())}
        out["einfty_A_lambda"] = {str(k): v for k, v in sorted(e2.items())}
        out["einfty_agree"] = e1 == e2
        ok = ok and e1 == e2
    out["ok"] = bool(ok)
    return out


# ---------------------------------------------------------------- search

def model_complex(U):
    """The model as an explicit complex (zero differential)."""
    ring = U.ring()
    acts = {g: {t: U.action_matrix(g, t) for t in range(U.N + 1)} for g in U.actions}
    return ExplicitComplex(U.p, U.dims, {}, ring.table, acts, name=U.name)


def _images_with_x(K, U, xs, t):
    """Monomial images with x_i -> xs[i] (lazy cochains) and antisymmetrized y's."""
    out = []
    for a, S in U.basis[t]:
        fs = []
        for i, e in enumerate(a):
            fs += [xs[i]] * e
        e_part = cup_all(fs, K.p)
        o_part = phi_o_image(K, S)
        out.append(o_part if e_part.degree == 0 else (e_part if o_part.degree == 0 else Cup(e_part, o_part)))
    return out


def _candidate_x(G, U, N, budget):
    """Candidate degree-2 images on a (possibly twisted) group with coordinates."""
    d = U.d
    yield "carry", [Carry(G, i) for i in range(d)]
    C = BarCochains(G, max(N, 2), budget=budget)
    R = C.reduction
    H2 = R.cohomology(2)
    ys = [Coordinate(G, i) for i in range(d)]
    dec = []
    for i in range(d):
        for j in range(i + 1, d):
            f = Cup(ys[i], ys[j])
            from .zigzag import evaluator
            dec.append(R.class_coords(2, evaluator([f], 2))[0])
    from .fplinalg import rref
    D = np.asarray(dec, dtype=np.int64).reshape(-1, H2.dim)
    piv = set(rref(D, G.p)[1]) if D.size else set()
    free = [k for k in range(H2.dim) if k not in piv][:d]
    if len(free) == d:
        reps = [Dense(C.representative(2, np.eye(H2.dim, dtype=np.int64)[k]), G.order, 2, G.p) for k in free]
        yield "reduced-complex representatives", reps


def search_witness(moduli, lam_values, N=2, P_order=1, lifting=None, budget=DEFAULT_BUDGET, omega_ep="unverified"):
    """C^*(A) <- U(p, d) -> C^*(A_lambda), trying a few choices for the x-images on A_lambda.

    Returns (witness, report) for the first candidate that passes, else the
    last one tried with its failing report.
    """
    A = build_abelian(moduli)
    p = A.p
    lam = AlternatingForm(moduli, moduli, dict(lam_values))
    Al = build_twisted(A, lam)
    d = len(moduli)
    P = cyclic(P_order) if P_order > 1 else None
    lift = IntegralLifting(lifting) if lifting else None
    actions = {}
    if lift is not None:
        from .zigzag import lifting_inverse_mod_p
        for g in lift.generators():
            actions[g] = lifting_inverse_mod_p(P, g, lift[g], p)
    U = UniversalModel(p, d, N, actions=actions)
    Ucx = model_complex(U)
    left = phi(A, N, U, budget=budget)
    mats_left = {t: materialize(left.images[t], A.order, t, budget) for t in range(N + 1)}
    last = None
    for label, xs in _candidate_x(Al, U, N, budget):
        if not all_cocycles(xs, Al, 2, budget):
            last = (None, {"candidate": label, "ok": False, "reason": "x-images are not cocycles"})
            continue
        mats_right = {t: materialize(_images_with_x(Al, U, xs, t), Al.order, t, budget) for t in range(N + 1)}
        w = ConjectureWitness(p, moduli, lam_values, [("bar", "A"), Ucx, ("bar", "A_lambda")],
                              [ZigEdge(1, 0, mats_left), ZigEdge(1, 2, mats_right)],
                              P_order=P_order, lifting=lifting, omega_ep=omega_ep,
                              note="x-images on A_lambda: %s" % label)
        rep = verify_conjecture_witness(w, N, budget)
        rep["candidate"] = label
        if rep["ok"]:
            return w, rep
        last = (w, rep)
    return last


def identity_witness(moduli, N=2):
    """lambda = 0: the one-step zig-zag C^*(A) = C^*(A)."""
    p = build_abelian(moduli).p
    return ConjectureWitness(p, moduli, {}, [("bar", "A"), ("bar", "A_lambda")],
                             [ZigEdge(0, 1, None, identity=True)])
