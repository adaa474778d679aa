"""A small text language for describing finite p-groups.

Grammar (whitespace and `#` comments are ignored):

    program  := { NAME '=' group NEWLINE } group
    group    := 'ab' '(' INT { ',' INT } ')'
              | 'cyc' '(' INT ')'
              | 'sd' '(' group ',' group ',' matrices ')'
              | 'wr' '(' group ',' INT ',' perms ')'
              | 'tw' '(' group ',' form ')'
              | 'ext' '(' group ',' group ',' action ',' cocycle ')'
              | NAME
    matrices := '[' matrix { ',' matrix } ']'       one per generator of the acting group
    matrix   := '[' row { ',' row } ']'             rows of integers
    perms    := '[' perm { ',' perm } ']'           generators of S, as image lists
    perm     := '[' INT { ',' INT } ']'             0-based images
    form     := '{' pair ':' vector { ',' pair ':' vector } '}'
    pair     := '(' INT ',' INT ')'                 1-based generator indices i < j
    action   := 'triv' | matrices
    cocycle  := 'zero' | 'carry' '(' INT ')' | table
    table    := '[' vector { ',' vector } ']'       |Q| x |Q| kernel element indices

Matrices act on coordinates of the kernel, one per element of
`P.generating_set()`.  `carry(n)` is the carry cocycle of a cyclic quotient
of order n with values in the first generator of the kernel.

Examples: `ab(9,9)`, `sd(ab(3,3), cyc(3), [[[0,-1],[1,-1]]])`,
`wr(cyc(3), 3, [[1,2,0]])`, `tw(ab(9,9), {(1,2): [3,0]})`,
`ext(cyc(3), cyc(3), triv, carry(3))`.
"""
import re

import numpy as np

from .errors import ArtifactError, ParseError
from . import groups as G

TOKEN = re.compile(r"[ \t\r]*(?:(#[^\n]*)|(-?\d+)|([A-Za-z_]\w*)|(\n)|(.))")


class Token:
    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return "%s(%r)@%d:%d" % (self.kind, self.text, self.line, self.col)


def tokenize(text):
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if m is None:
            break
        comment, num, name, nl, other = m.groups()
        tpos = m.start(m.lastindex) if m.lastindex else m.end()
        col = tpos - start + 1
        if nl:
            out.append(Token("NL", "\n", line, col))
            line += 1
            start = m.end()
        elif num is not None:
            out.append(Token("INT", num, line, col))
        elif name is not None:
            out.append(Token("NAME", name, line, col))
        elif other is not None and not other.isspace():
            out.append(Token("SYM", other, line, col))
        pos = m.end()
    out.append(Token("EOF", "", line, len(text) - start + 1))
    return out


class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.env = {}

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def skip_nl(self):
        while self.tok.kind == "NL":
            self.i += 1

    def error(self, msg, tok=None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def expect(self, text):
        self.skip_nl_inside()
        if self.tok.text != text:
            self.error("expected %r, found %r" % (text, self.tok.text or "end of input"))
        self.i += 1

    def skip_nl_inside(self):
        # newlines are insignificant inside brackets
        if self.depth:
            self.skip_nl()

    depth = 0

    def accept(self, text):
        self.skip_nl_inside()
        if self.tok.text == text:
            self.i += 1
            return True
        return False

    def integer(self):
        self.skip_nl_inside()
        if self.tok.kind != "INT":
            self.error("expected an integer, found %r" % (self.tok.text or "end of input"))
        v = int(self.tok.text)
        self.i += 1
        return v

    def open(self, text):
        self.expect(text)
        self.depth += 1

    def close(self, text):
        self.expect(text)
        self.depth -= 1

    # grammar
    def program(self):
        self.skip_nl()
        result = None
        while self.tok.kind != "EOF":
            if self.tok.kind == "NAME" and self.toks[self.i + 1].text == "=":
                name = self.tok.text
                self.i += 2
                self.env[name] = self.group()
            else:
                result = self.group()
            if self.tok.kind not in ("NL", "EOF"):
                self.error("unexpected %r" % self.tok.text)
            self.skip_nl()
        if result is None:
            self.error("no group expression")
        return result

    def group(self):
        self.skip_nl_inside()
        t = self.tok
        if t.kind != "NAME":
            self.error("expected a group, found %r" % (t.text or "end of input"))
        self.i += 1
        try:
            if t.text == "ab":
                self.open("(")
                exps = [self.integer()]
                while self.accept(","):
                    exps.append(self.integer())
                self.close(")")
                return G.build_abelian(exps)
            if t.text == "cyc":
                self.open("(")
                n = self.integer()
                self.close(")")
                return G.cyclic(n)
            if t.text == "sd":
                self.open("(")
                K = self.group()
                self.expect(",")
                P = self.group()
                self.expect(",")
                mats = self.matrices()
                self.close(")")
                return _semidirect(K, P, mats)
            if t.text == "wr":
                self.open("(")
                H = self.group()
                self.expect(",")
                n = self.integer()
                self.expect(",")
                perms = self.int_lists()
                self.close(")")
                return G.build_wreath(H, n, [tuple(x) for x in perms])
            if t.text == "tw":
                self.open("(")
                A = self.group()
                self.expect(",")
                form = self.form(A)
                self.close(")")
                lam = G.AlternatingForm(list(A.moduli), list(A.moduli), form)
                return G.build_twisted(A, lam)
            if t.text == "ext":
                self.open("(")
                Q = self.group()
                self.expect(",")
                Z = self.group()
                self.expect(",")
                if self.accept("triv"):
                    act = G.ActionHom.trivial(Q, Z)
                else:
                    act = _action(Q, Z, self.matrices())
                self.expect(",")
                theta = self.cocycle(Q, Z)
                self.close(")")
                return G.build_extension(Q, Z, act, theta)
        except ParseError:
            raise
        except ArtifactError as exc:
            raise ParseError("%s: %s" % (type(exc).__name__, exc), t.line, t.col)
        except (ValueError, IndexError) as exc:
            raise ParseError("invalid arguments to %s: %s" % (t.text, exc), t.line, t.col)
        if t.text in self.env:
            return self.env[t.text]
        raise ParseError("unknown group constructor or name %r" % t.text, t.line, t.col)

    def int_list(self):
        self.open("[")
        out = [self.integer()]
        while self.accept(","):
            out.append(self.integer())
        self.close("]")
        return out

    def int_lists(self):
        self.open("[")
        out = [self.int_list()]
        while self.accept(","):
            out.append(self.int_list())
        self.close("]")
        return out

    def matrix(self):
        tok = self.tok
        rows = self.int_lists()
        if len({len(r) for r in rows}) != 1:
            self.error("rows of a matrix must have equal length", tok)
        return np.array(rows, dtype=np.int64)

    def matrices(self):
        self.open("[")
        out = [self.matrix()]
        while self.accept(","):
            out.append(self.matrix())
        self.close("]")
        return out

    def form(self, A):
        self.open("{")
        out = {}
        while True:
            self.open("(")
            i = self.integer()
            self.expect(",")
            j = self.integer()
            self.close(")")
            self.expect(":")
            tok = self.tok
            v = self.int_list()
            d = len(A.moduli)
            if not (1 <= i <= d and 1 <= j <= d) or i == j:
                self.error("generator pair (%d, %d) out of range" % (i, j), tok)
            out[(i - 1, j - 1)] = v
            if not self.accept(","):
                break
        self.close("}")
        return out

    def cocycle(self, Q, Z):
        self.skip_nl_inside()
        if self.accept("zero"):
            return np.zeros((Q.order, Q.order), dtype=np.int64)
        if self.accept("carry"):
            self.open("(")
            n = self.integer()
            self.close(")")
            if Q.order != n:
                self.error("carry(%d) needs a cyclic quotient of order %d" % (n, n))
            gen = Z.generating_set()[0]
            a = np.arange(n)
            c = (a[:, None] + a[None, :]) // n
            return np.array([[Z.power(gen, int(k)) for k in row] for row in c], dtype=np.int64)
        return np.array(self.int_lists(), dtype=np.int64)


def _action(P, K, mats):
    gens = P.generating_set()
    if len(mats) != len(gens):
        raise ValueError("%d matrices for %d generators of the acting group" % (len(mats), len(gens)))
    return G.ActionHom.from_matrices(P, K, {g: M for g, M in zip(gens, mats)})


def _semidirect(K, P, mats):
    act = _action(P, K, mats)
    return G.build_semidirect(K, P, act)


def parse_group(text):
    """Parse a DSL program and return the group of its final expression."""
    return Parser(text).program()
