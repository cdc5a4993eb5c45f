"""Symbolic ladder-operator polynomials and a normal-ordering rewriter.

Grammar of the text format (whitespace is ignored)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := coeff? ('*'? factor)*
    factor := ('a' | 'ad') '(' int ')' ('^' nat)*
    coeff  := decimal | '(' decimal ',' decimal ')'

``a(i)`` is the canonical annihilator of mode i, ``ad(i)`` its adjoint, with
[a_i, ad_j] = delta_ij.  The matrix realization builds its own elementary
ladder matrices so it stays independent of :mod:`genfield.fock`.
"""
from __future__ import annotations

import math
import re
from collections import defaultdict
from functools import lru_cache

import numpy as np

from .fock import FockBasis

Symbol = tuple[int, bool]  # (mode, dagger)
Word = tuple[Symbol, ...]


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _fsum_complex(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


class LadderExpression:
    """Finite sum of coefficient * word, kept in canonical form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict[Word, list] = defaultdict(list)
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for word, c in items:
                acc[tuple((int(m), bool(d)) for m, d in word)].append(complex(c))
        merged = {w: _fsum_complex(cs) for w, cs in acc.items()}
        self.terms: dict[Word, complex] = {
            w: merged[w] for w in sorted(merged) if merged[w] != 0
        }

    # construction helpers -------------------------------------------------
    @classmethod
    def scalar(cls, c: complex) -> "LadderExpression":
        return cls({(): c})

    @classmethod
    def symbol(cls, mode: int, dagger: bool) -> "LadderExpression":
        return cls({((mode, dagger),): 1.0})

    # algebra ---------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        return LadderExpression(list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return LadderExpression({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, LadderExpression):
            return LadderExpression(
                [(w1 + w2, c1 * c2) for w1, c1 in self.terms.items() for w2, c2 in other.terms.items()]
            )
        return LadderExpression({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        out = LadderExpression.scalar(1.0)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, LadderExpression):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def constant(self) -> complex:
        return self.terms.get((), 0j)

    def without_constant(self) -> "LadderExpression":
        return LadderExpression({w: c for w, c in self.terms.items() if w})

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def modes(self) -> set[int]:
        return {m for w in self.terms for m, _ in w}

    def is_normal(self) -> bool:
        return all(_first_misordered(w) < 0 for w in self.terms)

    def __repr__(self):
        return f"LadderExpression({format_expression(self)!r})"

    def __str__(self):
        return format_expression(self)


def _coerce(x) -> LadderExpression:
    return x if isinstance(x, LadderExpression) else LadderExpression.scalar(x)


def a(i: int) -> LadderExpression:
    return LadderExpression.symbol(i, False)


def ad(i: int) -> LadderExpression:
    return LadderExpression.symbol(i, True)


# ---------------------------------------------------------------------------
# printing / parsing
# ---------------------------------------------------------------------------

def _format_word(word: Word) -> str:
    parts = []
    k = 0
    while k < len(word):
        j = k
        while j + 1 < len(word) and word[j + 1] == word[k]:
            j += 1
        mode, dag = word[k]
        s = f"{'ad' if dag else 'a'}({mode})"
        if j > k:
            s += f"^{j - k + 1}"
        parts.append(s)
        k = j + 1
    return "*".join(parts)


def format_expression(e: LadderExpression) -> str:
    if not e.terms:
        return "0"
    out = []
    for word, c in e.terms.items():
        if c.imag == 0:
            sign = "-" if math.copysign(1.0, c.real) < 0 else "+"
            coeff = repr(abs(c.real))
        else:
            sign = "+"
            coeff = f"({c.real!r},{c.imag!r})"
        body = coeff + ("*" + _format_word(word) if word else "")
        if not out:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>ad|a)|(?P<op>[-+*^(),]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self, kind=None, value=None):
        tok = self.toks[self.k]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", tok[2])
        self.k += 1
        return tok

    def signed_number(self) -> float:
        sign = 1.0
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.k += 1
            sign = -1.0 if tok[1] == "-" else 1.0
        return sign * float(self.take("num")[1])

    def coeff(self):
        tok = self.peek()
        if tok[0] == "num":
            self.k += 1
            return complex(float(tok[1]))
        if tok == ("op", "(", tok[2]):
            self.k += 1
            re_ = self.signed_number()
            self.take("op", ",")
            im = self.signed_number()
            self.take("op", ")")
            return complex(re_, im)
        return None

    def factor(self) -> Word:
        name = self.take("name")[1]
        self.take("op", "(")
        idx = int(self.take("num")[1]) if self.peek()[1].isdigit() else None
        if idx is None:
            raise ParseError("expected non-negative integer mode index", self.peek()[2])
        self.take("op", ")")
        word: Word = ((idx, name == "ad"),)
        while self.peek()[1] == "^":
            self.k += 1
            tok = self.take("num")
            if not tok[1].isdigit():
                raise ParseError("exponent must be a natural number", tok[2])
            word = word * int(tok[1])
        return word

    def term(self):
        start = self.peek()[2]
        c = self.coeff()
        word: Word = ()
        seen = c is not None
        while True:
            tok = self.peek()
            if tok[1] == "*" and seen:
                self.k += 1
                if self.peek()[0] != "name":
                    raise ParseError("expected a(..) or ad(..) after '*'", self.peek()[2])
                continue
            if tok[0] == "name":
                word = word + self.factor()
                seen = True
                continue
            break
        if not seen:
            raise ParseError("expected a term", start)
        return word, (1.0 if c is None else c)

    def expr(self) -> LadderExpression:
        terms = []
        sign = 1.0
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.k += 1
            sign = -1.0 if tok[1] == "-" else 1.0
        while True:
            word, c = self.term()
            terms.append((word, sign * c))
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.k += 1
                sign = -1.0 if tok[1] == "-" else 1.0
                continue
            break
        self.take("end")
        return LadderExpression(terms)


def parse(text: str) -> LadderExpression:
    return _Parser(text).expr()


# ---------------------------------------------------------------------------
# normal ordering
# ---------------------------------------------------------------------------

def _first_misordered(word: Word) -> int:
    for k in range(len(word) - 1):
        if not word[k][1] and word[k + 1][1]:
            return k
    return -1


def _sort_blocks(word: Word) -> Word:
    creators = sorted(s for s in word if s[1])
    annihilators = sorted(s for s in word if not s[1])
    return tuple(creators) + tuple(annihilators)


def normal_order(e: LadderExpression) -> LadderExpression:
    """Rewrite a_i ad_j -> ad_j a_i + delta_ij, leftmost pair first, to a fixpoint."""
    out: list = []
    work = list(e.terms.items())
    while work:
        word, c = work.pop()
        k = _first_misordered(word)
        if k < 0:
            out.append((_sort_blocks(word), c))
            continue
        left, (mi, _), (mj, _), right = word[:k], word[k], word[k + 1], word[k + 2:]
        work.append((left + ((mj, True), (mi, False)) + right, c))
        if mi == mj:
            work.append((left + right, c))
    return LadderExpression(out)


# ---------------------------------------------------------------------------
# matrix realization
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _elementary(n_modes: int, n_max: int) -> tuple:
    basis = FockBasis(n_modes, n_max)
    index = {tuple(int(v) for v in s): k for k, s in enumerate(basis.states)}
    mats = []
    for mode in range(n_modes):
        m = np.zeros((basis.dim, basis.dim))
        for col, s in enumerate(basis.states):
            n = int(s[mode])
            if n:
                lowered = list(int(v) for v in s)
                lowered[mode] -= 1
                m[index[tuple(lowered)], col] = math.sqrt(n)
        m.setflags(write=False)
        mats.append(m)
    return basis.dim, tuple(mats)


def ladder_matrix(mode: int, dagger: bool, n_modes: int, n_max: int) -> np.ndarray:
    dim, mats = _elementary(n_modes, n_max)
    if not 0 <= mode < n_modes:
        raise IndexError(f"mode index {mode} out of range for {n_modes} modes")
    return mats[mode].T if dagger else mats[mode]


def to_matrix(e: LadderExpression, n_modes: int, n_max: int) -> np.ndarray:
    """Sum of coefficient * (product of truncated elementary matrices)."""
    bad = [m for m in e.modes() if m >= n_modes]
    if bad:
        raise IndexError(f"mode index {max(bad)} out of range for {n_modes} modes")
    dim, mats = _elementary(n_modes, n_max)
    out = np.zeros((dim, dim), dtype=complex)
    for word, c in e.terms.items():
        if not word:
            out += c * np.eye(dim)
            continue
        prod = None
        for mode, dag in word:
            m = mats[mode].T if dag else mats[mode]
            prod = m if prod is None else prod @ m
        out += c * prod
    return out


def random_expression(rng: np.random.Generator, n_modes: int = 2, max_degree: int = 4,
                      n_terms: int = 4, complex_coeffs: bool = True) -> LadderExpression:
    """Random polynomial for property checks."""
    terms = []
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        word = tuple((int(rng.integers(0, n_modes)), bool(rng.integers(0, 2))) for _ in range(deg))
        c = complex(np.round(rng.standard_normal(), 6))
        if complex_coeffs and rng.random() < 0.5:
            c += 1j * np.round(rng.standard_normal(), 6)
        terms.append((word, c))
    return LadderExpression(terms)
