"""Exact coefficient arithmetic.

Two fields are supported: prime fields F_p (elements are plain ints in
[0, p)) and the rational-function field F_2(u, v) (elements are Frac2
fractions).  Bivariate polynomials over F_2 are represented as frozensets
of (deg_u, deg_v) exponent pairs, since every nonzero coefficient is 1.

Fractions are never reduced to lowest terms; equality is decided by
cross-multiplication.  A cheap common-monomial strip keeps representations
bounded, but no correctness depends on it.
"""

from __future__ import annotations

import random

from .errors import NotASquare, UnsupportedField, ZeroInversion

MAX_PRIME = 1 << 16


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# bivariate polynomials over F_2

P2_ZERO = frozenset()
P2_ONE = frozenset({(0, 0)})


def p2_monomial(i, j):
    return frozenset({(i, j)})


def p2_add(f, g):
    return frozenset(f ^ g)


def p2_mul(f, g):
    acc = set()
    for a, b in f:
        for c, d in g:
            m = (a + c, b + d)
            if m in acc:
                acc.discard(m)
            else:
                acc.add(m)
    return frozenset(acc)


def p2_is_even(f):
    return all(i % 2 == 0 and j % 2 == 0 for i, j in f)


def p2_sqrt(f):
    # valid only when every exponent is even; Frobenius is injective in char 2
    return frozenset((i // 2, j // 2) for i, j in f)


def _mono_str(i, j):
    parts = []
    if i == 1:
        parts.append("u")
    elif i > 1:
        parts.append("u^%d" % i)
    if j == 1:
        parts.append("v")
    elif j > 1:
        parts.append("v^%d" % j)
    if not parts:
        return "1"
    return "*".join(parts)


def p2_to_str(f):
    if not f:
        return "0"
    monos = sorted(f, key=lambda m: (-m[0], -m[1]))
    return " + ".join(_mono_str(i, j) for i, j in monos)


def p2_from_str(s):
    s = s.strip()
    if s in ("", "0"):
        return P2_ZERO
    acc = P2_ZERO
    for term in s.split("+"):
        term = term.strip()
        i = j = 0
        if term != "1":
            for factor in term.split("*"):
                factor = factor.strip()
                if factor.startswith("u"):
                    i = int(factor[2:]) if "^" in factor else 1
                elif factor.startswith("v"):
                    j = int(factor[2:]) if "^" in factor else 1
                elif factor == "1":
                    pass
                else:
                    raise ValueError("bad monomial %r" % term)
        acc = p2_add(acc, p2_monomial(i, j))
    return acc


class Frac2:
    """A fraction of bivariate F_2-polynomials, not in lowest terms."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=P2_ONE):
        if not den:
            raise ZeroInversion("fraction with zero denominator")
        if num == den:
            num = den = P2_ONE
        elif num and len(num) + len(den) > 2:
            # strip a common monomial factor; pure size control
            ui = min(min(i for i, _ in num), min(i for i, _ in den))
            vj = min(min(j for _, j in num), min(j for _, j in den))
            if ui or vj:
                num = frozenset((i - ui, j - vj) for i, j in num)
                den = frozenset((i - ui, j - vj) for i, j in den)
        self.num = num
        self.den = den

    def __add__(self, other):
        if self.den == other.den:
            return Frac2(p2_add(self.num, other.num), self.den)
        return Frac2(
            p2_add(p2_mul(self.num, other.den), p2_mul(other.num, self.den)),
            p2_mul(self.den, other.den),
        )

    __sub__ = __add__  # characteristic 2

    def __neg__(self):
        return self

    def __mul__(self, other):
        if not self.num or not other.num:
            return FRAC2_ZERO
        return Frac2(p2_mul(self.num, other.num), p2_mul(self.den, other.den))

    def inv(self):
        if not self.num:
            raise ZeroInversion("inverse of zero in F_2(u,v)")
        return Frac2(self.den, self.num)

    def is_zero(self):
        return not self.num

    def __eq__(self, other):
        if not isinstance(other, Frac2):
            return NotImplemented
        return p2_mul(self.num, other.den) == p2_mul(other.num, self.den)

    __hash__ = None

    def __repr__(self):
        return "Frac2(%s / %s)" % (p2_to_str(self.num), p2_to_str(self.den))


FRAC2_ZERO = Frac2(P2_ZERO)
FRAC2_ONE = Frac2(P2_ONE)


# ---------------------------------------------------------------------------
# field objects


class PrimeField:
    """F_p with elements stored as ints in [0, p)."""

    kind = "prime"

    def __init__(self, p):
        if not _is_prime(p):
            raise ValueError("p = %d is not prime" % p)
        if p >= MAX_PRIME:
            raise ValueError("p = %d exceeds the supported bound 2^16" % p)
        self.p = p
        self.char = p
        self.size = p

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, c):
        return c % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroInversion("inverse of 0 in F_%d" % self.p)
        return pow(a, self.p - 2, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def eq(self, a, b):
        return (a - b) % self.p == 0

    def is_zero(self, a):
        return a % self.p == 0

    def elements(self):
        return range(self.p)

    def random_element(self, rng):
        return rng.randrange(self.p)

    def elem_to_json(self, a):
        return int(a % self.p)

    def elem_from_json(self, obj):
        return int(obj) % self.p

    def elem_to_str(self, a):
        return str(int(a % self.p))

    def elem_from_str(self, s):
        return int(s) % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __repr__(self):
        return "PrimeField(%d)" % self.p


class RatFun2:
    """The rational-function field F_2(u, v)."""

    kind = "ratfun2"

    def __init__(self):
        self.char = 2
        self.size = None
        self.u = Frac2(p2_monomial(1, 0))
        self.v = Frac2(p2_monomial(0, 1))

    def zero(self):
        return FRAC2_ZERO

    def one(self):
        return FRAC2_ONE

    def from_int(self, c):
        return FRAC2_ONE if c % 2 else FRAC2_ZERO

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a + b

    def neg(self, a):
        return a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inv()

    def div(self, a, b):
        return a * b.inv()

    def eq(self, a, b):
        return a == b

    def is_zero(self, a):
        return a.is_zero()

    def sample_elements(self):
        # default parameter pool for constructions over an infinite field
        u, v = self.u, self.v
        return [FRAC2_ZERO, FRAC2_ONE, u, v, u + v, u * v]

    def random_element(self, rng, max_terms=2, max_deg=2):
        num = P2_ZERO
        for _ in range(rng.randint(1, max_terms)):
            num = p2_add(num, p2_monomial(rng.randint(0, max_deg), rng.randint(0, max_deg)))
        den = P2_ZERO
        while not den:
            den = P2_ZERO
            for _ in range(rng.randint(1, max_terms)):
                den = p2_add(den, p2_monomial(rng.randint(0, max_deg), rng.randint(0, max_deg)))
        return Frac2(num, den)

    def elem_to_json(self, a):
        return self.elem_to_str(a)

    def elem_from_json(self, obj):
        return self.elem_from_str(obj)

    def elem_to_str(self, a):
        return "%s/%s" % (p2_to_str(a.num), p2_to_str(a.den))

    def elem_from_str(self, s):
        if "/" in s:
            num, den = s.split("/")
            return Frac2(p2_from_str(num), p2_from_str(den))
        return Frac2(p2_from_str(s))

    def __eq__(self, other):
        return isinstance(other, RatFun2)

    def __repr__(self):
        return "RatFun2()"


def field_to_json(field):
    if field.kind == "prime":
        return {"kind": "prime", "p": field.p}
    return {"kind": "ratfun2"}


def field_from_json(obj):
    if obj["kind"] == "prime":
        return PrimeField(obj["p"])
    if obj["kind"] == "ratfun2":
        return RatFun2()
    raise ValueError("unknown field kind %r" % obj.get("kind"))


def fe_inv(field, x):
    """Multiplicative inverse; raises ZeroInversion on 0."""
    return field.inv(x)


def fe_sqrt_char2(field, x):
    """The unique square root in F_2(u,v), when one exists.

    x = num/den equals (num*den)/den^2, and den^2 has only even exponents,
    so x is a square exactly when num*den has only even exponents.
    """
    if field.kind != "ratfun2":
        raise UnsupportedField("square roots are implemented only over F_2(u,v)")
    w = p2_mul(x.num, x.den)
    if not p2_is_even(w):
        raise NotASquare("element is not in F_2(u^2, v^2)")
    return Frac2(p2_sqrt(w), x.den)


# ---------------------------------------------------------------------------
# univariate polynomials over F_p: ascending coefficient lists, trimmed


def poly_trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_deg(f):
    return len(f) - 1


def poly_add(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return poly_trim(out)


def poly_sub(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] - c) % p
    return poly_trim(out)


def poly_scale(f, c, p):
    c %= p
    return poly_trim([(a * c) % p for a in f])


def poly_mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return poly_trim(out)


def poly_divmod(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    q = [0] * max(len(f) - len(g) + 1, 0)
    inv_lead = pow(g[-1], p - 2, p)
    while len(f) >= len(g) and f:
        c = (f[-1] * inv_lead) % p
        d = len(f) - len(g)
        q[d] = c
        for i, b in enumerate(g):
            f[d + i] = (f[d + i] - c * b) % p
        poly_trim(f)
    return poly_trim(q), f


def poly_mod(f, g, p):
    return poly_divmod(f, g, p)[1]


def poly_monic(f, p):
    if not f:
        return []
    return poly_scale(f, pow(f[-1], p - 2, p), p)


def poly_gcd(f, g, p):
    a, b = list(f), list(g)
    while b:
        a, b = b, poly_mod(a, b, p)
    return poly_monic(a, p)


def poly_pow_mod(f, e, mod, p):
    result = [1]
    base = poly_mod(f, mod, p)
    while e > 0:
        if e & 1:
            result = poly_mod(poly_mul(result, base, p), mod, p)
        base = poly_mod(poly_mul(base, base, p), mod, p)
        e >>= 1
    return result


def poly_deriv(f, p):
    return poly_trim([(i * c) % p for i, c in enumerate(f)][1:])


def poly_eval(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def poly_pth_root(f, p):
    # f must involve only exponents divisible by p; coefficients are fixed by
    # Frobenius on the prime field
    out = [0] * ((len(f) + p - 1) // p)
    for i, c in enumerate(f):
        if c:
            if i % p:
                raise ValueError("polynomial is not a p-th power")
            out[i // p] = c
    return poly_trim(out)


def _squarefree_parts(f, p):
    """Yield (squarefree factor, multiplicity) pairs for monic f."""
    out = []
    d = poly_deriv(f, p)
    if not d:
        root = poly_pth_root(f, p)
        for g, m in _squarefree_parts(root, p):
            out.append((g, m * p))
        return out
    c = poly_gcd(f, d, p)
    w = poly_divmod(f, c, p)[0]
    i = 1
    while poly_deg(w) > 0:
        y = poly_gcd(w, c, p)
        fac = poly_divmod(w, y, p)[0]
        if poly_deg(fac) > 0:
            out.append((fac, i))
        w = y
        c = poly_divmod(c, y, p)[0]
        i += 1
    if poly_deg(c) > 0:
        root = poly_pth_root(c, p)
        for g, m in _squarefree_parts(root, p):
            out.append((g, m * p))
    return out


def _distinct_degree(f, p):
    """Split squarefree monic f into (product-of-degree-d factors, d) parts."""
    out = []
    rem = list(f)
    h = [0, 1]  # x
    d = 0
    while poly_deg(rem) >= 2 * (d + 1):
        d += 1
        h = poly_pow_mod(h, p, rem, p)
        g = poly_gcd(poly_sub(h, [0, 1], p), rem, p)
        if poly_deg(g) > 0:
            out.append((g, d))
            rem = poly_divmod(rem, g, p)[0]
            h = poly_mod(h, rem, p)
    if poly_deg(rem) > 0:
        out.append((rem, poly_deg(rem)))
    return out


def _equal_degree(f, d, p, rng):
    """Cantor-Zassenhaus splitting of squarefree f with all factors of degree d."""
    n = poly_deg(f)
    if n == d:
        return [f]
    while True:
        r = [rng.randrange(p) for _ in range(n)]
        poly_trim(r)
        if poly_deg(r) < 1:
            continue
        if p == 2:
            # trace map over F_{2^d}
            s = list(r)
            acc = list(r)
            for _ in range(d - 1):
                s = poly_mod(poly_mul(s, s, p), f, p)
                acc = poly_add(acc, s, p)
            g = poly_gcd(acc, f, p)
        else:
            s = poly_pow_mod(r, (p ** d - 1) // 2, f, p)
            g = poly_gcd(poly_sub(s, [1], p), f, p)
        if 0 < poly_deg(g) < n:
            left = _equal_degree(g, d, p, rng)
            right = _equal_degree(poly_divmod(f, g, p)[0], d, p, rng)
            return left + right


def factor_univariate(field, f, _degree_cap=64):
    """Factor a univariate polynomial over F_p into monic irreducibles.

    Returns a list of (factor, multiplicity) pairs sorted by (degree,
    coefficients); the product of the factors re-multiplies to f up to the
    leading unit.
    """
    if field.kind != "prime":
        raise UnsupportedField("factorization is implemented over prime fields only")
    f = poly_trim([c % field.p for c in f])
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    if poly_deg(f) > _degree_cap:
        raise ValueError("degree %d exceeds cap %d" % (poly_deg(f), _degree_cap))
    p = field.p
    f = poly_monic(f, p)
    rng = random.Random((p, tuple(f)).__repr__())
    found = {}
    for sf, mult in _squarefree_parts(f, p):
        for block, d in _distinct_degree(sf, p):
            for irr in _equal_degree(block, d, p, rng):
                key = tuple(irr)
                found[key] = found.get(key, 0) + mult
    out = [(list(k), m) for k, m in found.items()]
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out
