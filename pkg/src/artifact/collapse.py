"""Algebraic Morse reduction of bar-type complexes.

The normalized bar complex of a p-group is far too large to write down at
the degrees we care about, but most of it cancels.  Given a polycyclic
presentation (generators g_1..g_k with relative orders o_i and unique
normal forms g_1^{e_1} ... g_k^{e_k}) every cell [x_1|...|x_n] is classified
as essential, collapsible or redundant, the last two paired off by a
matching whose incidence numbers are +-1.  The essential cells span a much
smaller complex with the same cohomology.

The engine below is generic: a *scheme* supplies `classify`, `boundary` and
`essential(n)`; `MorseReduction` then computes projections onto essential
cells by following the flow (depth first, memoized, with cycle detection),
the reduced coboundaries, and the chain inclusion needed to pull cocycles
back.  Boundaries are signed so that (delta f)(c) = f(B c); the sign
conventions of the cochain complexes live entirely inside the schemes.
"""
import itertools

import numpy as np

from .errors import BudgetExceeded
from .fplinalg import FpMatrix, inv_mod, kernel_matrix, image_basis, subquotient, rref

ESS, COL, RED = 0, 1, 2
DEFAULT_BUDGET = 2 ** 26


# ------------------------------------------------------------ presentations

class PcPresentation:
    """Normal-form data for a group with a polycyclic generating sequence."""

    def __init__(self, G, gens, orders, exps, elem_of):
        self.G = G
        self.gens = list(gens)
        self.orders = list(orders)
        self.k = len(gens)
        self.exps = exps
        self.radix = list(orders)
        self.elem_of = elem_of
        n = G.order
        first = [-1] * n
        firstexp = [0] * n
        last = [-1] * n
        lastexp = [0] * n
        letter = [False] * n
        for x in range(n):
            e = exps[x]
            nz = [j for j in range(self.k) if e[j]]
            if nz:
                first[x], firstexp[x] = nz[0], int(e[nz[0]])
                last[x], lastexp[x] = nz[-1], int(e[nz[-1]])
                letter[x] = len(nz) == 1 and e[nz[0]] == 1
        self.first, self.firstexp = first, firstexp
        self.last, self.lastexp = last, lastexp
        self.is_letter = letter
        self.letters = [self.power_of_letter(j, 1) for j in range(self.k)]
        self.mul = G.table.tolist()

    def encode(self, e):
        idx = 0
        for v, m in zip(e, self.radix):
            idx = idx * m + int(v)
        return self.elem_of[idx]

    def power_of_letter(self, j, m):
        e = [0] * self.k
        e[j] = m
        return self.encode(e)

    def strip_prefix(self, x, j, m):
        """The element whose normal form is that of x with g_j^m removed from the front."""
        e = list(self.exps[x])
        e[j] -= m
        return self.encode(e)

    def check(self):
        """Normal forms multiply back to the elements they name."""
        T = self.G.table
        for x in range(self.G.order):
            acc = 0
            for j, m in enumerate(self.exps[x]):
                for _ in range(int(m)):
                    acc = int(T[acc, self.gens[j]])
            if acc != x:
                return False
        return True


def pc_presentation(G):
    """Cyclic-factor presentation for abelian groups, otherwise a pc sequence
    refining the lower exponent-p central series."""
    from .groups import closure
    n = G.order
    if G.kind == "abelian" and G.coords is not None and G.moduli is not None:
        k = G.coords.shape[1]
        exps = [tuple(int(v) for v in row) for row in G.coords]
        elem_of = list(range(n))
        gens = []
        for j in range(k):
            e = [0] * k
            e[j] = 1
            idx = 0
            for v, m in zip(e, G.moduli):
                idx = idx * int(m) + v
            gens.append(idx)
        return PcPresentation(G, gens, [int(m) for m in G.moduli], exps, elem_of)
    if n == 1:
        return PcPresentation(G, [], [], [()], [0])
    p = G.p
    T = G.table
    pw = G.powers_all(p)
    allg = np.arange(n)
    cur = allg
    gens = []
    while len(cur) > 1:
        comm = T[T[G.inv[cur][:, None], G.inv[allg][None, :]], T[cur[:, None], allg[None, :]]]
        nxt = closure(T, np.unique(np.concatenate([comm.ravel(), pw[cur]])))
        mask = np.zeros(n, dtype=bool)
        mask[nxt] = True
        chosen = []
        for a in cur.tolist():
            if not mask[a]:
                chosen.append(a)
                span = closure(T, np.concatenate([nxt, np.array(chosen)]))
                mask[:] = False
                mask[span] = True
        gens.extend(chosen)
        cur = nxt
    k = len(gens)
    vals = np.array([0], dtype=np.int64)
    for g in gens:
        pows = [0]
        for _ in range(p - 1):
            pows.append(int(T[pows[-1], g]))
        vals = np.stack([T[vals, q] for q in pows], axis=1).ravel()
    if len(np.unique(vals)) != n:
        raise ValueError("pc sequence does not give unique normal forms")
    elem_of = vals.tolist()
    exps = [None] * n
    for idx, x in enumerate(elem_of):
        e = []
        r = idx
        for _ in range(k):
            e.append(r % p)
            r //= p
        exps[x] = tuple(reversed(e))
    return PcPresentation(G, gens, [p] * k, exps, elem_of)


# ------------------------------------------------------------------ schemes

def classify_bar(pc, cell):
    """Brown's matching on a normalized bar cell (tuple of non-identity elements)."""
    if not cell:
        return ESS, None
    x1 = cell[0]
    if not pc.is_letter[x1]:
        f = pc.first[x1]
        a = pc.letters[f]
        u = pc.strip_prefix(x1, f, 1)
        return RED, (a, u) + cell[1:]
    first, firstexp, last, lastexp, orders = pc.first, pc.firstexp, pc.last, pc.lastexp, pc.orders
    for j in range(1, len(cell)):
        xp, x = cell[j - 1], cell[j]
        l, r = last[xp], lastexp[xp]
        f, ef = first[x], firstexp[x]
        if f < l:
            m = 1
        elif f == l and r + ef >= orders[f]:
            m = orders[f] - r
        else:
            return COL, None
        if f == last[x] and ef == m:
            continue
        u = pc.power_of_letter(f, m)
        v = pc.strip_prefix(x, f, m)
        return RED, cell[:j] + (u, v) + cell[j + 1:]
    return ESS, None


def essential_bar(pc, n):
    if n == 0:
        return [()]
    chains = [(a,) for a in pc.letters]
    for _ in range(n - 1):
        new = []
        for c in chains:
            xp = c[-1]
            l, r = pc.last[xp], pc.lastexp[xp]
            for f in range(l):
                new.append(c + (pc.letters[f],))
            new.append(c + (pc.power_of_letter(l, pc.orders[l] - r),))
        chains = new
    return sorted(chains)


class BarScheme:
    """Normalized inhomogeneous bar complex of G with the global sign (-1)^{n+1}.

    For a cell of length m the signed boundary is
    B = (-1)^m (face_0 + sum_j (-1)^j merge_j + (-1)^m face_m),
    so that (delta f)(cell) = f(B cell) for f of degree m - 1.
    """

    def __init__(self, G, pc=None):
        self.G = G
        self.p = G.p
        self.pc = pc or pc_presentation(G)
        self._mul = self.pc.mul

    def degree(self, cell):
        return len(cell)

    def classify(self, cell):
        return classify_bar(self.pc, cell)

    def essential(self, n):
        return essential_bar(self.pc, n)

    def boundary(self, cell):
        p = self.p
        m = len(cell)
        if m == 0:
            return []
        g = 1 if m % 2 == 0 else p - 1
        out = {}

        def add(c, v):
            out[c] = (out.get(c, 0) + v) % p

        add(cell[1:], g)
        mul = self._mul
        for j in range(m - 1):
            y = mul[cell[j]][cell[j + 1]]
            if y:
                add(cell[:j] + (y,) + cell[j + 2:], g if j % 2 else (p - g) % p)
        add(cell[:-1], g if m % 2 == 0 else (p - g) % p)
        return [(c, v) for c, v in out.items() if v]

    def splits(self, cell, a):
        """Front/back decompositions for the cup product (f1 deg a)."""
        b = len(cell) - a
        if a < 0 or b < 0:
            return []
        s = 1 if (a * b) % 2 == 0 else self.p - 1
        return [(cell[:a], cell[a:], s)]


class TotScheme:
    """Normalized-K total complex of Hom_P(B(P), C(K)) for K x| P.

    Cells are pairs (sigma, kappa) with sigma in P^n (unnormalized, so the
    columns have |P|^n cells) and kappa a normalized K-bar cell.  With
    trivial action and `normalize_P` set this is the tensor double complex
    of two groups.  The matching only reduces the K-part (or, with
    `match_P`, the P-part first), so the filtration by n is preserved.

    Signed boundary of a cell of bidegree (n, m) (cochain degree n+m-1):
      (-1)^{n+m} sum_i (-1)^i hface_i + (-1)^m sum_j (-1)^j (sigma, vface_j kappa)
    with hface_0 = (sigma[1:], p_1^{-1} . kappa).
    """

    def __init__(self, K, P, perms=None, pcK=None, pcP=None, normalize_P=False, match_P=False):
        self.K, self.P = K, P
        self.p = K.p
        self.pcK = pcK or pc_presentation(K)
        self.normalize_P = normalize_P
        self.match_P = match_P
        if match_P:
            if not normalize_P:
                raise ValueError("matching the P-part needs normalized P-cells")
            self.pcP = pcP or pc_presentation(P)
        if perms is None:
            perms = np.tile(np.arange(K.order), (P.order, 1))
        self.perms = np.asarray(perms)
        self.trivial = bool(np.all(self.perms == np.arange(K.order)))
        self._inv_perm = [self.perms[int(P.inv[q])].tolist() for q in range(P.order)]
        self._mulK = self.pcK.mul
        self._mulP = P.table.tolist()

    def degree(self, cell):
        return len(cell[0]) + len(cell[1])

    def column(self, cell):
        return len(cell[0])

    def classify(self, cell):
        sigma, kappa = cell
        if self.match_P:
            kind, partner = classify_bar(self.pcP, sigma)
            if kind == RED:
                return RED, (partner, kappa)
            if kind == COL:
                return COL, None
        kind, partner = classify_bar(self.pcK, kappa)
        if kind == RED:
            return RED, (sigma, partner)
        return kind, None

    def essential(self, n):
        if self.match_P:
            out = []
            for a in range(n + 1):
                for s in essential_bar(self.pcP, a):
                    for k in essential_bar(self.pcK, n - a):
                        out.append((s, k))
            return sorted(out, key=lambda c: (len(c[0]), c))
        out = []
        nP = self.P.order
        for a in range(n + 1):
            kap = essential_bar(self.pcK, n - a)
            rng = range(1, nP) if self.normalize_P else range(nP)
            for s in itertools.product(rng, repeat=a):
                for k in kap:
                    out.append((tuple(s), k))
        return sorted(out, key=lambda c: (len(c[0]), c))

    def act(self, q, kappa):
        """q^{-1} . kappa, entrywise."""
        ip = self._inv_perm[q]
        return tuple(ip[x] for x in kappa)

    def boundary(self, cell):
        p = self.p
        sigma, kappa = cell
        n, m = len(sigma), len(kappa)
        out = {}

        def add(c, v):
            out[c] = (out.get(c, 0) + v) % p

        if n:
            hs = 1 if (n + m) % 2 == 0 else p - 1
            add((sigma[1:], self.act(sigma[0], kappa)), hs)
            mulP = self._mulP
            for i in range(1, n):
                y = mulP[sigma[i - 1]][sigma[i]]
                if y == 0 and self.normalize_P:
                    continue
                add((sigma[:i - 1] + (y,) + sigma[i + 1:], kappa), hs if i % 2 == 0 else (p - hs) % p)
            add((sigma[:-1], kappa), hs if n % 2 == 0 else (p - hs) % p)
        if m:
            vs = 1 if m % 2 == 0 else p - 1
            add((sigma, kappa[1:]), vs)
            mulK = self._mulK
            for j in range(1, m):
                y = mulK[kappa[j - 1]][kappa[j]]
                if y:
                    add((sigma, kappa[:j - 1] + (y,) + kappa[j + 1:]), vs if j % 2 == 0 else (p - vs) % p)
            add((sigma, kappa[:-1]), vs if m % 2 == 0 else (p - vs) % p)
        return [(c, v) for c, v in out.items() if v]

    def splits(self, cell, a):
        """All (front, back, sign) with front of total degree a.

        (f1 u f2)(sigma; kappa) = eps f1(sigma_f; kappa_f) f2(sigma_b; q^{-1} kappa_b),
        q = product of sigma_f, eps = (-1)^{n1 (n2 + m2) + m1 m2}.
        """
        sigma, kappa = cell
        n, m = len(sigma), len(kappa)
        out = []
        mulP = self._mulP
        for n1 in range(0, min(a, n) + 1):
            m1 = a - n1
            if m1 > m:
                continue
            n2, m2 = n - n1, m - m1
            q = 0
            for x in sigma[:n1]:
                q = mulP[q][x]
            back_k = kappa[m1:] if q == 0 else self.act(q, kappa[m1:])
            e = (n1 * (n2 + m2) + m1 * m2) % 2
            out.append(((sigma[:n1], kappa[:m1]), (sigma[n1:], back_k), 1 if e == 0 else self.p - 1))
        return out


# ---------------------------------------------------------- Morse reduction

class MorseReduction:
    """Essential-cell complex of a scheme, with projections and inclusions."""

    def __init__(self, scheme, budget=DEFAULT_BUDGET):
        self.scheme = scheme
        self.p = scheme.p
        self.budget = budget
        self._ess = {}
        self._ess_index = {}
        self._proj = {}
        self._red = {}
        self._cob = {}
        self._coh = {}
        self._plans = {}

    # cells
    def essential(self, n):
        if n not in self._ess:
            cells = self.scheme.essential(n)
            if len(cells) > self.budget:
                raise BudgetExceeded("essential cells in degree %d" % n, len(cells), self.budget)
            self._ess[n] = cells
            self._ess_index[n] = {c: i for i, c in enumerate(cells)}
        return self._ess[n]

    def ess_index(self, cell):
        n = self.scheme.degree(cell)
        self.essential(n)
        return self._ess_index[n][cell]

    @property
    def cells_visited(self):
        return len(self._proj)

    def _check_budget(self):
        if len(self._proj) > self.budget:
            raise BudgetExceeded("cells visited by the reduction", len(self._proj), self.budget)

    def _red_info(self, c, partner):
        info = self._red.get(c)
        if info is None:
            p = self.p
            e = 0
            others = []
            for f, co in self.scheme.boundary(partner):
                if f == c:
                    e = (e + co) % p
                else:
                    others.append((f, co))
            if e == 0:
                raise ValueError("matching incidence is zero at %r" % (c,))
            info = (partner, inv_mod(e, p), others)
            self._red[c] = info
        return info

    def proj(self, cell):
        """Projection of a cell onto essential cells: dict index -> coefficient."""
        memo = self._proj
        if cell in memo:
            return memo[cell]
        p = self.p
        scheme = self.scheme
        stack = [cell]
        onstack = set()
        while stack:
            c = stack[-1]
            if c in memo:
                stack.pop()
                continue
            kind, partner = scheme.classify(c)
            if kind == ESS:
                memo[c] = {self.ess_index(c): 1}
                stack.pop()
                continue
            if kind == COL:
                memo[c] = {}
                stack.pop()
                continue
            _, einv, others = self._red_info(c, partner)
            pending = [f for f, _ in others if f not in memo]
            if pending:
                if c in onstack:
                    raise ValueError("the matching has a cycle through %r" % (c,))
                onstack.add(c)
                stack.extend(pending)
                continue
            onstack.discard(c)
            res = {}
            for f, co in others:
                t = (einv * co) % p
                for k, v in memo[f].items():
                    res[k] = (res.get(k, 0) - t * v) % p
            memo[c] = {k: v for k, v in res.items() if v}
            stack.pop()
            if len(memo) % 65536 == 0:
                self._check_budget()
        self._check_budget()
        return memo[cell]

    def proj_matrix(self, cells, n):
        """Dense (len(cells), |ess[n]|) array of projections."""
        ess = self.essential(n)
        out = np.zeros((len(cells), len(ess)), dtype=np.int64)
        for i, c in enumerate(cells):
            for k, v in self.proj(c).items():
                out[i, k] = v
        return out

    # reduced complex
    def coboundary(self, n):
        """delta^n of the reduced complex as an FpMatrix |ess[n+1]| x |ess[n]|."""
        if n not in self._cob:
            rows = self.essential(n + 1)
            cols = self.essential(n)
            p = self.p
            A = np.zeros((len(rows), len(cols)), dtype=np.int64)
            for i, c in enumerate(rows):
                for f, co in self.scheme.boundary(c):
                    for k, v in self.proj(f).items():
                        A[i, k] = (A[i, k] + co * v) % p
            self._cob[n] = FpMatrix.from_dense(A, p)
        return self._cob[n]

    def cohomology(self, n):
        """H^n of the reduced complex as a SubquotientBasis in essential coordinates."""
        if n not in self._coh:
            p = self.p
            dim = len(self.essential(n))
            Z = kernel_matrix(self.coboundary(n), method="dense").T
            if n == 0:
                B = np.zeros((0, dim), dtype=np.int64)
            else:
                B = image_basis(self.coboundary(n - 1))
            self._coh[n] = subquotient(Z, B, p, ambient=dim)
        return self._coh[n]

    def dims(self, N):
        return [self.cohomology(n).dim for n in range(N + 1)]

    # cochains
    def iota_plan(self, n):
        """Flow data for the inclusion of essential n-cells into the big complex."""
        if n in self._plans:
            return self._plans[n]
        ess = self.essential(n)
        face_terms = []
        for c in ess:
            terms = []
            for f, co in self.scheme.boundary(c):
                kind, partner = self.scheme.classify(f)
                if kind == RED:
                    self.proj(f)
                    terms.append((f, co))
            face_terms.append(terms)
        order = []
        seen = set()
        for terms in face_terms:
            for f, _ in terms:
                if f in seen:
                    continue
                stack = [(f, False)]
                while stack:
                    c, done = stack.pop()
                    if done:
                        order.append(c)
                        continue
                    if c in seen:
                        continue
                    seen.add(c)
                    stack.append((c, True))
                    for g, _ in self._red[c][2]:
                        if g in self._red and g not in seen:
                            stack.append((g, False))
        pos = {c: i for i, c in enumerate(order)}
        partners = [self._red[c][0] for c in order]
        einv = [self._red[c][1] for c in order]
        children = [[(pos[g], co) for g, co in self._red[c][2] if g in pos] for c in order]
        terms = [[(pos[f], co) for f, co in t] for t in face_terms]
        plan = (ess, partners, einv, children, terms)
        self._plans[n] = plan
        return plan

    def iota_values(self, n, evaluator):
        """Values f(iota(c)) for essential n-cells c, for a batch of cochains.

        `evaluator(cells)` returns an array (len(cells), k).
        """
        p = self.p
        ess, partners, einv, children, terms = self.iota_plan(n)
        base = np.asarray(evaluator(ess), dtype=np.int64).reshape(len(ess), -1) % p
        k = base.shape[1]
        if partners:
            vals = np.asarray(evaluator(partners), dtype=np.int64).reshape(len(partners), k) % p
        else:
            vals = np.zeros((0, k), dtype=np.int64)
        F = np.zeros((len(partners), k), dtype=np.int64)
        for i in range(len(partners)):
            acc = vals[i].copy()
            for j, co in children[i]:
                acc -= co * F[j]
            F[i] = (einv[i] * acc) % p
        out = base.copy()
        for i, t in enumerate(terms):
            for j, co in t:
                out[i] -= co * F[j]
        return out % p

    def class_coords(self, n, evaluator):
        """Cohomology coordinates of a batch of cocycles: array (k, dim H^n)."""
        v = self.iota_values(n, evaluator)
        return self.cohomology(n).coords(v.T)

    def iota_chain(self, c):
        """iota(c) as a dict cell -> coefficient (for tests on small cases)."""
        p = self.p
        n = self.scheme.degree(c)
        out = {c: 1}
        for f, co in self.scheme.boundary(c):
            kind, partner = self.scheme.classify(f)
            if kind == RED:
                for cell, v in self._flow_chain(f).items():
                    out[cell] = (out.get(cell, 0) - co * v) % p
        return {k: v for k, v in out.items() if v}

    def _flow_chain(self, tau, memo=None):
        memo = {} if memo is None else memo
        if tau in memo:
            return memo[tau]
        self.proj(tau)
        p = self.p
        partner, einv, others = self._red[tau]
        out = {partner: einv}
        for g, co in others:
            if g in self._red:
                for cell, v in self._flow_chain(g, memo).items():
                    out[cell] = (out.get(cell, 0) - einv * co * v) % p
        memo[tau] = {k: v for k, v in out.items() if v}
        return memo[tau]

    # representatives and products
    def representative_values(self, n, Z, cells):
        """Values of the cochains z o proj on the given n-cells; Z is (k, |ess[n]|)."""
        Pm = self.proj_matrix(cells, n)
        return (Pm @ np.asarray(Z, dtype=np.int64).T) % self.p

    def cup_evaluator(self, a, Za, b, Zb):
        """Evaluator for all products rep(u) u rep(v), u in rows of Za, v in rows of Zb.

        Output columns are ordered u-major.
        """
        p = self.p
        Za = np.asarray(Za, dtype=np.int64).reshape(-1, len(self.essential(a)))
        Zb = np.asarray(Zb, dtype=np.int64).reshape(-1, len(self.essential(b)))
        ka, kb = Za.shape[0], Zb.shape[0]

        def ev(cells):
            out = np.zeros((len(cells), ka * kb), dtype=np.int64)
            fronts, backs, where, signs = [], [], [], []
            for i, c in enumerate(cells):
                for fr, bk, s in self.scheme.splits(c, a):
                    fronts.append(fr)
                    backs.append(bk)
                    where.append(i)
                    signs.append(s)
            if not fronts:
                return out
            Fv = self.representative_values(a, Za, fronts)
            Bv = self.representative_values(b, Zb, backs)
            prod = (Fv[:, :, None] * Bv[:, None, :]).reshape(len(fronts), ka * kb)
            prod = (prod * np.asarray(signs)[:, None]) % p
            np.add.at(out, np.asarray(where), prod)
            return out % p

        return ev

    def cohomology_basis_cocycles(self, n):
        """Reduced cocycles representing the chosen basis of H^n (rows)."""
        return self.cohomology(n).reps


def bar_reduction(G, budget=DEFAULT_BUDGET):
    return MorseReduction(BarScheme(G), budget)
