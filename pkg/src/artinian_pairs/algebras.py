"""Finite-dimensional associative unital algebras by structure constants.

An Algebra stores a dense multiplication table over its coefficient field
plus optional product-decomposition bounds.  On top of that sit the
constructors (truncated polynomial rings, monomial quotients, products,
generated subalgebras, quotients), the radical, the locality decision
ladder, and the witness-case classifier used by the module constructions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .errors import (
    DimensionTooSmall,
    InfiniteDimension,
    MixedFields,
    NotAnIdeal,
    NotAProduct,
    UnsupportedField,
)
from .fields import (
    factor_univariate,
    poly_eval,
    poly_mod,
    poly_mul,
    poly_sub,
    poly_divmod,
    poly_monic,
)

MAX_DIM = 256
ASSOC_CHECK_LIMIT = 40


class Algebra:
    """Associative unital k-algebra given by a dense multiplication table.

    mul[i][j] is the coordinate vector of (basis_i * basis_j).
    """

    def __init__(self, field, dim, labels, mul, one, component_bounds=None,
                 check=True):
        if dim > MAX_DIM:
            raise ValueError("algebra dimension %d exceeds cap %d" % (dim, MAX_DIM))
        self.field = field
        self.dim = dim
        self.labels = list(labels)
        self.mul = mul
        self.one = list(one)
        self.component_bounds = (
            [tuple(b) for b in component_bounds] if component_bounds else None
        )
        self._tensor = None
        self._sparse = None
        if check:
            self._check_axioms()

    # -- caches ------------------------------------------------------------

    @property
    def tensor(self):
        if self._tensor is None:
            if self.field.kind != "prime":
                raise UnsupportedField("dense tensor cache is prime-field only")
            self._tensor = np.array(self.mul, dtype=np.int64) % self.field.p
        return self._tensor

    @property
    def sparse(self):
        if self._sparse is None:
            f = self.field
            table = {}
            for i in range(self.dim):
                for j in range(self.dim):
                    entries = [
                        (m, c)
                        for m, c in enumerate(self.mul[i][j])
                        if not f.is_zero(c)
                    ]
                    if entries:
                        table[(i, j)] = entries
            self._sparse = table
        return self._sparse

    # -- axioms ------------------------------------------------------------

    def _check_axioms(self):
        f = self.field
        for j in range(self.dim):
            bj = [f.one() if m == j else f.zero() for m in range(self.dim)]
            if self.mul_coords(self.one, bj) != bj or self.mul_coords(bj, self.one) != bj:
                raise ValueError("unit axiom fails on basis element %d" % j)
        if self.dim <= ASSOC_CHECK_LIMIT:
            self._check_associativity()
        if self.component_bounds:
            total = sum(l for _, l in self.component_bounds)
            if total != self.dim:
                raise ValueError("component bounds do not tile the algebra")

    def _check_associativity(self):
        if self.field.kind == "prime":
            T = self.tensor
            p = self.field.p
            lhs = np.tensordot(T, T, axes=([2], [0])) % p
            rhs = np.tensordot(T, T, axes=([2], [1])).transpose(2, 0, 1, 3) % p
            if not np.array_equal(lhs, rhs):
                raise ValueError("associativity fails")
            return
        f = self.field
        basis = [self.basis_coords(i) for i in range(self.dim)]
        for i in range(self.dim):
            for j in range(self.dim):
                ij = self.mul_coords(basis[i], basis[j])
                for k in range(self.dim):
                    left = self.mul_coords(ij, basis[k])
                    right = self.mul_coords(basis[i], self.mul_coords(basis[j], basis[k]))
                    if left != right:
                        raise ValueError("associativity fails at (%d,%d,%d)" % (i, j, k))

    # -- arithmetic --------------------------------------------------------

    def zero_coords(self):
        return [self.field.zero()] * self.dim

    def basis_coords(self, i):
        v = self.zero_coords()
        v[i] = self.field.one()
        return v

    def mul_coords(self, x, y):
        if self.field.kind == "prime":
            p = self.field.p
            vx = np.asarray(x, dtype=np.int64)
            vy = np.asarray(y, dtype=np.int64)
            out = np.einsum("i,j,ijm->m", vx % p, vy % p, self.tensor) % p
            return [int(c) for c in out]
        f = self.field
        out = self.zero_coords()
        for (i, j), entries in self.sparse.items():
            c = f.mul(x[i], y[j])
            if not f.is_zero(c):
                for m, s in entries:
                    out[m] = f.add(out[m], f.mul(c, s))
        return out

    def lmul_matrix(self, x):
        """Matrix of left multiplication by x; rows are output coordinates."""
        if self.field.kind == "prime":
            p = self.field.p
            vx = np.asarray(x, dtype=np.int64) % p
            a = np.einsum("i,ijm->jm", vx, self.tensor) % p
            return [[int(c) for c in row] for row in a.T]
        cols = [self.mul_coords(x, self.basis_coords(j)) for j in range(self.dim)]
        return [[cols[j][m] for j in range(len(cols))] for m in range(self.dim)]

    def pow_coords(self, x, e):
        result = list(self.one)
        base = list(x)
        while e > 0:
            if e & 1:
                result = self.mul_coords(result, base)
            base = self.mul_coords(base, base)
            e >>= 1
        return result

    def poly_at(self, coeffs, x):
        """Evaluate a polynomial (ascending field coefficients) at x."""
        f = self.field
        acc = self.zero_coords()
        for c in reversed(coeffs):
            acc = self.mul_coords(acc, x)
            if not f.is_zero(c):
                acc = [f.add(a, f.mul(c, o)) for a, o in zip(acc, self.one)]
        return acc

    def elem(self, coords):
        return AlgElem(self, list(coords))

    def one_elem(self):
        return AlgElem(self, list(self.one))

    def basis_elem(self, i):
        return AlgElem(self, self.basis_coords(i))

    def is_commutative(self):
        if self.field.kind == "prime":
            T = self.tensor
            return np.array_equal(T, T.transpose(1, 0, 2))
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                bi, bj = self.basis_coords(i), self.basis_coords(j)
                if self.mul_coords(bi, bj) != self.mul_coords(bj, bi):
                    return False
        return True

    # -- components ----------------------------------------------------

    def n_components(self):
        if self.component_bounds is None:
            raise NotAProduct("algebra has no recorded product decomposition")
        return len(self.component_bounds)

    def component_algebra(self, idx, check=False):
        off, length = self.component_bounds[idx]
        mul = [
            [self.mul[off + i][off + j][off:off + length] for j in range(length)]
            for i in range(length)
        ]
        return Algebra(
            self.field,
            length,
            self.labels[off:off + length],
            mul,
            self.one[off:off + length],
            check=check,
        )

    def __eq__(self, other):
        if not isinstance(other, Algebra):
            return NotImplemented
        return (
            self.field == other.field
            and self.dim == other.dim
            and self.one == other.one
            and self.mul == other.mul
            and self.component_bounds == other.component_bounds
        )

    __hash__ = None

    def __repr__(self):
        return "Algebra(dim=%d over %r)" % (self.dim, self.field)


class AlgElem:
    __slots__ = ("algebra", "coords")

    def __init__(self, algebra, coords):
        if len(coords) != algebra.dim:
            raise ValueError("coordinate length mismatch")
        self.algebra = algebra
        self.coords = list(coords)

    def _f(self):
        return self.algebra.field

    def __add__(self, other):
        f = self._f()
        return AlgElem(self.algebra, [f.add(a, b) for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        f = self._f()
        return AlgElem(self.algebra, [f.sub(a, b) for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        f = self._f()
        return AlgElem(self.algebra, [f.neg(a) for a in self.coords])

    def __mul__(self, other):
        if isinstance(other, AlgElem):
            return AlgElem(self.algebra, self.algebra.mul_coords(self.coords, other.coords))
        return self.scale(other)

    def scale(self, c):
        f = self._f()
        return AlgElem(self.algebra, [f.mul(c, a) for a in self.coords])

    def __pow__(self, e):
        return AlgElem(self.algebra, self.algebra.pow_coords(self.coords, e))

    def is_zero(self):
        f = self._f()
        return all(f.is_zero(a) for a in self.coords)

    def __eq__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        f = self._f()
        return all(f.eq(a, b) for a, b in zip(self.coords, other.coords))

    __hash__ = None

    def __repr__(self):
        f = self._f()
        terms = [
            "%s*%s" % (f.elem_to_str(c), lbl)
            for c, lbl in zip(self.coords, self.algebra.labels)
            if not f.is_zero(c)
        ]
        return " + ".join(terms) if terms else "0"


class SubspaceBasis:
    """A subspace of an algebra, stored as a canonical reduced echelon basis."""

    def __init__(self, algebra, vectors):
        self.algebra = algebra
        self.rows, self.pivots = linalg.rref(algebra.field, [list(v) for v in vectors])

    @property
    def dim(self):
        return len(self.rows)

    def contains(self, v):
        return linalg.in_span(self.algebra.field, self.rows, self.pivots, v)

    def __eq__(self, other):
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return self.algebra == other.algebra and self.rows == other.rows

    __hash__ = None

    def __repr__(self):
        return "SubspaceBasis(dim=%d of %r)" % (self.dim, self.algebra)


# ---------------------------------------------------------------------------
# constructors


def make_truncated_poly_algebra(field, n, var="t"):
    """k[var]/(var^n) with monomial basis 1, var, ..., var^(n-1)."""
    if n < 1:
        raise ValueError("truncation order must be positive")
    zero, one = field.zero(), field.one()
    labels = ["1"] + [var if e == 1 else "%s^%d" % (var, e) for e in range(1, n)]
    mul = [
        [
            [one if (m == i + j and i + j < n) else zero for m in range(n)]
            for j in range(n)
        ]
        for i in range(n)
    ]
    unit = [one] + [zero] * (n - 1)
    return Algebra(field, n, labels, mul, unit)


def _mono_label(i, j):
    parts = []
    if i:
        parts.append("X" if i == 1 else "X^%d" % i)
    if j:
        parts.append("Y" if j == 1 else "Y^%d" % j)
    return "*".join(parts) if parts else "1"


def make_monomial_quotient(field, gens):
    """k[X,Y] modulo the monomial ideal generated by gens.

    gens is a list of (deg_X, deg_Y) pairs; pure powers of both variables
    must appear for the quotient to be finite-dimensional.
    """
    gens = [tuple(g) for g in gens]
    if not any(j == 0 for _, j in gens) or not any(i == 0 for i, _ in gens):
        raise InfiniteDimension("monomial ideal must contain pure powers of X and Y")
    xcap = min(i for i, j in gens if j == 0)
    ycap = min(j for i, j in gens if i == 0)

    def in_ideal(i, j):
        return any(i >= gi and j >= gj for gi, gj in gens)

    basis = [
        (i, j)
        for i in range(xcap)
        for j in range(ycap)
        if not in_ideal(i, j)
    ]
    basis.sort(key=lambda m: (m[0] + m[1], m[0]))
    index = {m: c for c, m in enumerate(basis)}
    n = len(basis)
    zero, one = field.zero(), field.one()
    mul = []
    for (i1, j1) in basis:
        row = []
        for (i2, j2) in basis:
            prod = (i1 + i2, j1 + j2)
            v = [zero] * n
            if not in_ideal(*prod) and prod in index:
                v[index[prod]] = one
            row.append(v)
        mul.append(row)
    unit = [zero] * n
    unit[index[(0, 0)]] = one
    return Algebra(field, n, [_mono_label(i, j) for i, j in basis], mul, unit)


def product_algebra(factors):
    """Direct product with componentwise multiplication and recorded bounds."""
    if not factors:
        raise ValueError("empty product")
    fld = factors[0].field
    if any(a.field != fld for a in factors):
        raise MixedFields("product factors live over different fields")
    dim = sum(a.dim for a in factors)
    zero = fld.zero()
    offsets = []
    off = 0
    for a in factors:
        offsets.append(off)
        off += a.dim
    labels = []
    for idx, a in enumerate(factors):
        labels.extend("c%d:%s" % (idx, lbl) for lbl in a.labels)
    mul = [[[zero] * dim for _ in range(dim)] for _ in range(dim)]
    one = [zero] * dim
    for idx, a in enumerate(factors):
        o = offsets[idx]
        for i in range(a.dim):
            one[o + i] = a.one[i]
            for j in range(a.dim):
                coords = a.mul[i][j]
                for m in range(a.dim):
                    mul[o + i][o + j][o + m] = coords[m]
    bounds = [(offsets[i], factors[i].dim) for i in range(len(factors))]
    return Algebra(fld, dim, labels, mul, one, component_bounds=bounds)


def component_idempotents(B):
    """The orthogonal idempotents cutting out the recorded components."""
    if B.component_bounds is None:
        raise NotAProduct("algebra has no recorded product decomposition")
    out = []
    zero = B.field.zero()
    for off, length in B.component_bounds:
        v = [zero] * B.dim
        v[off:off + length] = B.one[off:off + length]
        out.append(B.elem(v))
    return out


def subalgebra_generated(B, gens):
    """Smallest unital subalgebra containing the generators.

    Returns (A, inclusion) where inclusion has shape dim(A) x dim(B) and its
    rows are the canonical basis of A inside B.
    """
    f = B.field
    gen_coords = [g.coords if isinstance(g, AlgElem) else list(g) for g in gens]
    rows, piv = linalg.rref(f, [list(B.one)] + gen_coords)
    while True:
        products = [B.mul_coords(v, w) for v in rows for w in rows]
        new_rows, new_piv = linalg.rref(f, rows + products)
        if len(new_rows) == len(rows):
            break
        rows, piv = new_rows, new_piv
    return _algebra_on_subspace(B, rows, piv, label_prefix="a"), rows


def _algebra_on_subspace(B, rows, pivots, unit=None, label_prefix="s", check=False):
    """Structure constants of a multiplicatively closed subspace of B.

    unit defaults to B's unit and must lie in the subspace.
    """
    f = B.field
    n = len(rows)
    unit = list(B.one) if unit is None else list(unit)
    mul = []
    for i in range(n):
        mrow = []
        for j in range(n):
            prod = B.mul_coords(rows[i], rows[j])
            coords = linalg.coords_in_rows(f, rows, pivots, prod)
            if coords is None:
                raise ValueError("subspace is not multiplicatively closed")
            mrow.append(coords)
        mul.append(mrow)
    one_coords = linalg.coords_in_rows(f, rows, pivots, unit)
    if one_coords is None:
        raise ValueError("unit does not lie in the subspace")
    labels = ["%s%d" % (label_prefix, i) for i in range(n)]
    return Algebra(f, n, labels, mul, one_coords, check=check)


def quotient_by_ideal(E, ideal):
    """Quotient by a two-sided ideal.

    Returns (Q, projection) with projection of shape dim(Q) x dim(E); the
    quotient basis is the set of non-pivot standard coordinates, so quotients
    of monomial algebras stay monomial on the nose.
    """
    f = E.field
    if isinstance(ideal, SubspaceBasis):
        rows, piv = ideal.rows, ideal.pivots
    else:
        rows, piv = linalg.rref(f, [list(v) for v in ideal])
    for b in range(E.dim):
        bc = E.basis_coords(b)
        for v in rows:
            if not linalg.in_span(f, rows, piv, E.mul_coords(bc, v)):
                raise NotAnIdeal("subspace is not a left ideal")
            if not linalg.in_span(f, rows, piv, E.mul_coords(v, bc)):
                raise NotAnIdeal("subspace is not a right ideal")
    proj, free = linalg.complement_projector(f, rows, piv, E.dim)
    n = len(free)
    labels = [E.labels[c] for c in free]

    def project(v):
        return linalg.mat_vec(f, proj, v)

    mul = []
    for a in range(n):
        row = []
        ea = E.basis_coords(free[a])
        for b in range(n):
            eb = E.basis_coords(free[b])
            row.append(project(E.mul_coords(ea, eb)))
        mul.append(row)
    Q = Algebra(f, n, labels, mul, project(E.one), check=False)
    return Q, proj


def min_poly(elem):
    """Monic least-degree polynomial killing the element (ascending coeffs)."""
    A = elem.algebra
    f = A.field
    powers = [list(A.one)]
    cur = list(A.one)
    for k in range(1, A.dim + 2):
        cur = A.mul_coords(cur, elem.coords)
        cols = [[powers[i][m] for i in range(len(powers))] for m in range(A.dim)]
        combo = linalg.solve(f, cols, cur)
        if combo is not None:
            return [f.neg(c) for c in combo] + [f.one()]
        powers.append(list(cur))
    raise RuntimeError("no minimal polynomial found (broken algebra)")


def check_linear_independence(elems):
    coords = [e.coords if isinstance(e, AlgElem) else list(e) for e in elems]
    if not coords:
        return True
    field = elems[0].algebra.field if isinstance(elems[0], AlgElem) else None
    if field is None:
        raise ValueError("pass AlgElem values")
    return linalg.rank(field, coords) == len(coords)


# ---------------------------------------------------------------------------
# radical


def _charpoly_modp(mat, p):
    """Characteristic polynomial mod p (ascending coeffs) via Hessenberg form."""
    h = np.array(mat, dtype=np.int64) % p
    n = h.shape[0]
    if n == 0:
        return [1]
    for j in range(n - 2):
        nz = np.nonzero(h[j + 1:, j])[0]
        if len(nz) == 0:
            continue
        i = j + 1 + int(nz[0])
        if i != j + 1:
            h[[j + 1, i]] = h[[i, j + 1]]
            h[:, [j + 1, i]] = h[:, [i, j + 1]]
        inv = pow(int(h[j + 1, j]), p - 2, p)
        for k in range(j + 2, n):
            if h[k, j]:
                fct = (int(h[k, j]) * inv) % p
                h[k] = (h[k] - fct * h[j + 1]) % p
                h[:, j + 1] = (h[:, j + 1] + fct * h[:, k]) % p
    polys = [[1]]
    for m in range(1, n + 1):
        d = int(h[m - 1, m - 1]) % p
        prev = polys[m - 1]
        cur = [0] * (len(prev) + 1)
        for idx, c in enumerate(prev):
            cur[idx + 1] = (cur[idx + 1] + c) % p
            cur[idx] = (cur[idx] - d * c) % p
        prod = 1
        for i0 in range(m - 2, -1, -1):
            prod = (prod * int(h[i0 + 1, i0])) % p
            coef = (int(h[i0, m - 1]) * prod) % p
            if coef:
                for idx, c in enumerate(polys[i0]):
                    cur[idx] = (cur[idx] - coef * c) % p
        polys.append(cur)
    return [c % p for c in polys[n]]


def _trace_gram(E):
    T = E.tensor
    p = E.field.p
    tvec = np.einsum("kmm->k", T) % p
    return np.einsum("ijk,k->ij", T, tvec) % p


def is_ideal(E, rows, pivots):
    f = E.field
    for b in range(E.dim):
        bc = E.basis_coords(b)
        for v in rows:
            if not linalg.in_span(f, rows, pivots, E.mul_coords(bc, v)):
                return False
            if not linalg.in_span(f, rows, pivots, E.mul_coords(v, bc)):
                return False
    return True


def is_nilpotent_subspace(E, rows):
    """True iff the span's power chain reaches zero within dim steps."""
    f = E.field
    base, _ = linalg.rref(f, [list(r) for r in rows])
    cur = base
    for _ in range(E.dim + 2):
        if not cur:
            return True
        products = [E.mul_coords(a, b) for a in cur for b in base]
        nxt, _ = linalg.rref(f, products)
        if nxt == cur:
            return False
        cur = nxt
    return False


def radical(E):
    """The Jacobson radical as a SubspaceBasis.

    Over F_p with p > dim the kernel of the trace form suffices; for small p
    that kernel is refined by a descending chain cutting with the p^i-th
    characteristic coefficients of left-multiplication maps.
    """
    if E.field.kind != "prime":
        raise UnsupportedField("radical is computed over prime fields only")
    f = E.field
    p, n = f.p, E.dim
    G = _trace_gram(E)
    k0 = linalg.kernel_basis(f, [[int(c) for c in row] for row in G], ncols=n)
    rows, piv = linalg.rref(f, k0)
    if p > n:
        return SubspaceBasis(E, rows)
    level = 1
    while p ** level <= n:
        if is_ideal(E, rows, piv) and is_nilpotent_subspace(E, rows):
            return SubspaceBasis(E, rows)
        if not rows:
            return SubspaceBasis(E, [])
        k = p ** level
        constraint = []
        for y in rows:
            crow = []
            for x in rows:
                z = E.mul_coords(x, y)
                cp = _charpoly_modp(E.lmul_matrix(z), p)
                crow.append(cp[n - k] if n - k < len(cp) else 0)
            constraint.append(crow)
        ker = linalg.kernel_basis(f, constraint, ncols=len(rows))
        new_vectors = []
        for combo in ker:
            vec = [f.zero()] * n
            for c, basis_vec in zip(combo, rows):
                if not f.is_zero(c):
                    vec = [f.add(a, f.mul(c, b)) for a, b in zip(vec, basis_vec)]
            new_vectors.append(vec)
        rows, piv = linalg.rref(f, new_vectors)
        level += 1
    if not (is_ideal(E, rows, piv) and is_nilpotent_subspace(E, rows)):
        raise RuntimeError("radical chain did not terminate on a nilpotent ideal")
    return SubspaceBasis(E, rows)


# ---------------------------------------------------------------------------
# nilpotents over F_2(u,v)


def _sqrt_components(w):
    """Write a Frac2 w as sum over (e1,e2) of u^e1 v^e2 * t_{e}^2; return the t_e."""
    from .fields import Frac2, p2_mul, p2_sqrt

    q = p2_mul(w.num, w.den)
    parts = {(0, 0): set(), (1, 0): set(), (0, 1): set(), (1, 1): set()}
    for (i, j) in q:
        parts[(i % 2, j % 2)].add((i, j))
    out = {}
    for eps, monos in parts.items():
        shifted = frozenset((i - eps[0], j - eps[1]) for i, j in monos)
        out[eps] = Frac2(p2_sqrt(shifted), w.den) if shifted else Frac2(frozenset())
    return out


def _semilinear_kernel(field, mat_rows, ncols):
    """Solve sum_i xi_i^2 * M[:, i] = 0 over F_2(u,v); returns kernel basis."""
    stacked = []
    for row in mat_rows:
        comp_rows = {eps: [] for eps in ((0, 0), (1, 0), (0, 1), (1, 1))}
        for w in row:
            parts = _sqrt_components(w)
            for eps in comp_rows:
                comp_rows[eps].append(parts[eps])
        for eps in ((0, 0), (1, 0), (0, 1), (1, 1)):
            if any(not c.is_zero() for c in comp_rows[eps]):
                stacked.append(comp_rows[eps])
    return linalg.kernel_basis(field, stacked, ncols=ncols)


def nilpotents_ratfun2(E):
    """Nilpotent subspace of a commutative algebra over F_2(u,v)."""
    if E.field.kind != "ratfun2":
        raise UnsupportedField("this path is specific to F_2(u,v)")
    f = E.field
    n = E.dim
    squares = [E.mul_coords(E.basis_coords(i), E.basis_coords(i)) for i in range(n)]
    rows, piv = [], []
    while True:
        proj, _ = linalg.complement_projector(f, rows, piv, n)
        mat = [[None] * n for _ in range(len(proj))]
        for i in range(n):
            img = linalg.mat_vec(f, proj, squares[i]) if proj else []
            for r in range(len(proj)):
                mat[r][i] = img[r]
        ker = _semilinear_kernel(f, mat, n) if proj else linalg.identity(f, n)
        new_rows, new_piv = linalg.rref(f, ker)
        if len(new_rows) == len(rows):
            return SubspaceBasis(E, new_rows)
        rows, piv = new_rows, new_piv


def nilradical(E):
    """Nilpotent radical for the fields we support (commutative use)."""
    if E.field.kind == "prime":
        return radical(E)
    return nilpotents_ratfun2(E)


# ---------------------------------------------------------------------------
# locality ladder


@dataclass
class LocalityResult:
    verdict: str                 # "local" | "notlocal" | "undecided"
    rung: str                    # "L1" | "L2" | "L3"
    witness: list = None         # idempotent coords when verdict == "notlocal"
    detail: str = ""

    @property
    def is_local(self):
        return self.verdict == "local"


def _scan_idempotents_exhaustive(E):
    """Full scan over all elements; returns a nontrivial idempotent or None."""
    f = E.field
    p = f.p if f.kind == "prime" else None
    d = E.dim
    if p is None:
        raise UnsupportedField("exhaustive scan needs a finite field")
    T = E.tensor
    one = np.array(E.one, dtype=np.int64) % p
    total = p ** d
    chunk = 1 << 12
    start = 0
    weights = np.array([p ** k for k in range(d)], dtype=np.int64)
    while start < total:
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        X = (idx[:, None] // weights[None, :]) % p
        S = np.einsum("ni,nj,ijm->nm", X, X, T) % p
        hits = np.all(S == X, axis=1)
        if hits.any():
            for r in np.nonzero(hits)[0]:
                v = X[r]
                if v.any() and not np.array_equal(v, one):
                    return [int(c) for c in v]
        start = stop
    return None


def _crt_idempotent_from_minpoly(A, x_coords, mp):
    """Nontrivial idempotent in k[x] from a min poly with >= 2 coprime parts.

    Splits off either a distinct irreducible factor or the pure power-of-x
    part; returns coords or None when the min poly gives no split.
    """
    f = A.field
    if f.kind == "prime":
        p = f.p
        facs = factor_univariate(f, mp)
        if len(facs) < 2:
            return None
        f1, e1 = facs[0]
        part = [1]
        for _ in range(e1):
            part = poly_mul(part, f1, p)
        g = poly_divmod(mp, part, p)[0]
        # s*g = 1 mod part
        s = _poly_inverse_mod(g, part, p)
        if s is None:
            return None
        h = poly_mod(poly_mul(s, g, p), mp, p)
        e = A.poly_at([c % p for c in h], x_coords)
    else:
        # only the x^a-vs-rest split is available without factorization
        a = 0
        while a < len(mp) and f.is_zero(mp[a]):
            a += 1
        if a == 0 or a >= len(mp) - 1:
            return None
        g = mp[a:]
        part = [f.zero()] * a + [f.one()]
        s = _poly_inverse_mod_generic(f, g, part)
        if s is None:
            return None
        h = _poly_mod_generic(f, _poly_mul_generic(f, s, g), mp)
        e = A.poly_at(h, x_coords)
    ee = A.mul_coords(e, e)
    if ee != e:
        return None
    if all(f.is_zero(c) for c in e):
        return None
    if all(f.eq(a_, b_) for a_, b_ in zip(e, A.one)):
        return None
    return e


def _poly_inverse_mod(g, m, p):
    """Inverse of g modulo m over F_p via extended Euclid, or None."""
    r0, r1 = list(m), poly_mod(g, m, p)
    s0, s1 = [], [1]
    while r1:
        q, r = poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, poly_sub(s0, poly_mul(q, s1, p), p)
    if len(r0) != 1:
        return None
    inv = pow(r0[0], p - 2, p)
    return poly_mod([(c * inv) % p for c in s0], m, p)


def _poly_mul_generic(f, a, b):
    if not a or not b:
        return []
    out = [f.zero()] * (len(a) + len(b) - 1)
    for i, c in enumerate(a):
        if not f.is_zero(c):
            for j, d in enumerate(b):
                out[i + j] = f.add(out[i + j], f.mul(c, d))
    while out and f.is_zero(out[-1]):
        out.pop()
    return out


def _poly_divmod_generic(f, a, b):
    a = list(a)
    q = [f.zero()] * max(len(a) - len(b) + 1, 0)
    inv = f.inv(b[-1])
    while len(a) >= len(b) and a:
        c = f.mul(a[-1], inv)
        d = len(a) - len(b)
        q[d] = c
        for i, bc in enumerate(b):
            a[d + i] = f.sub(a[d + i], f.mul(c, bc))
        while a and f.is_zero(a[-1]):
            a.pop()
    return q, a


def _poly_mod_generic(f, a, b):
    return _poly_divmod_generic(f, a, b)[1]


def _poly_inverse_mod_generic(f, g, m):
    r0, r1 = list(m), _poly_mod_generic(f, g, m)
    s0, s1 = [], [f.one()]
    while r1:
        q, r = _poly_divmod_generic(f, r0, r1)
        r0, r1 = r1, r
        prod = _poly_mul_generic(f, q, s1)
        n = max(len(s0), len(prod))
        new = [f.zero()] * n
        for i, c in enumerate(s0):
            new[i] = c
        for i, c in enumerate(prod):
            new[i] = f.sub(new[i], c)
        while new and f.is_zero(new[-1]):
            new.pop()
        s0, s1 = s1, new
    if len(r0) != 1:
        return None
    inv = f.inv(r0[0])
    return _poly_mod_generic(f, [f.mul(c, inv) for c in s0], m)


def lift_idempotent(E, e0):
    """Lift an idempotent-mod-nilpotents to an honest idempotent via e^(p^m)."""
    p = E.field.char
    e = list(e0)
    m = 0
    target = 1
    while target < E.dim + 1:
        target *= p
        m += 1
    for _ in range(m):
        e = E.pow_coords(e, p)
    if E.mul_coords(e, e) != e:
        return None
    return e


def _hunt_split_idempotent(E, seed, tries=64, candidates=None):
    """Search for a nontrivial idempotent via min-poly splitting in k[x]."""
    f = E.field
    rng = random.Random(seed)
    pool = []
    if candidates is not None:
        pool.extend(candidates)
    else:
        pool.extend(E.basis_coords(i) for i in range(E.dim))
        for _ in range(tries):
            pool.append([f.random_element(rng) for _ in range(E.dim)])
    for x in pool:
        try:
            mp = min_poly(E.elem(x))
        except Exception:
            continue
        e = _crt_idempotent_from_minpoly(E, x, mp)
        if e is not None:
            return e
    return None


def _frobenius_matrix(S):
    cols = [S.pow_coords(S.basis_coords(i), S.field.char) for i in range(S.dim)]
    return [[cols[j][m] for j in range(S.dim)] for m in range(S.dim)]


def _fixed_space(S):
    """Basis of {x : x^p = x} in a commutative algebra over F_p."""
    f = S.field
    F = _frobenius_matrix(S)
    rows = [
        [f.sub(F[m][j], f.one() if m == j else f.zero()) for j in range(S.dim)]
        for m in range(S.dim)
    ]
    return linalg.kernel_basis(f, rows, ncols=S.dim)


def _center_basis(S):
    f = S.field
    rows = []
    for b in range(S.dim):
        L = S.lmul_matrix(S.basis_coords(b))
        cols = [S.mul_coords(S.basis_coords(j), S.basis_coords(b)) for j in range(S.dim)]
        R = [[cols[j][m] for j in range(S.dim)] for m in range(S.dim)]
        for m in range(S.dim):
            rows.append([f.sub(L[m][j], R[m][j]) for j in range(S.dim)])
    return linalg.kernel_basis(f, rows, ncols=S.dim)


def _nontrivial_idempotent_in_semisimple(S, seed):
    """Idempotent of a semisimple non-local algebra over F_p, or None."""
    f = S.field
    if S.is_commutative():
        fixed = _fixed_space(S)
        for w in fixed:
            if linalg.rank(f, [list(S.one), w]) == 2:
                mp = min_poly(S.elem(w))
                e = _crt_idempotent_from_minpoly(S, w, mp)
                if e is not None:
                    return e
        return None
    # try central idempotents first, then zero-divisor hunting
    Z = _center_basis(S)
    if len(Z) >= 2:
        zc = _algebra_on_subspace(S, *linalg.rref(f, Z))
        zrows = linalg.rref(f, Z)[0]
        ez = _nontrivial_idempotent_in_semisimple(zc, seed)
        if ez is not None:
            v = [f.zero()] * S.dim
            for c, b in zip(ez, zrows):
                if not f.is_zero(c):
                    v = [f.add(a, f.mul(c, x)) for a, x in zip(v, b)]
            return v
    rng = random.Random(seed)
    pool = [S.basis_coords(i) for i in range(S.dim)]
    for i in range(S.dim):
        for j in range(i + 1, S.dim):
            pool.append([f.add(a, b) for a, b in zip(pool[i], pool[j])])
    for _ in range(256):
        pool.append([f.random_element(rng) for _ in range(S.dim)])
    for x in pool:
        mp = min_poly(S.elem(x))
        e = _crt_idempotent_from_minpoly(S, x, mp)
        if e is not None:
            return e
        # repeated irreducible factor gives a nilpotent, hence a proper
        # left ideal with an idempotent right identity
        facs = factor_univariate(f, mp)
        if len(facs) == 1 and facs[0][1] >= 2:
            y = S.poly_at([c % f.p for c in facs[0][0]], x)
            if any(not f.is_zero(c) for c in y):
                e = _idempotent_from_left_ideal(S, y)
                if e is not None:
                    return e
    return None


def _idempotent_from_left_ideal(S, y):
    """Right identity of the left ideal S*y (semisimple S); an idempotent."""
    f = S.field
    gens = [S.mul_coords(S.basis_coords(i), y) for i in range(S.dim)]
    rows, piv = linalg.rref(f, gens)
    if not rows:
        return None
    # z in span(rows) with z*v = v for each basis v of the ideal
    cols = []
    rhs = []
    for v in rows:
        for m in range(S.dim):
            cols.append([S.mul_coords(r, v)[m] for r in rows])
            rhs.append(v[m])
    combo = linalg.solve(f, cols, rhs)
    if combo is None:
        return None
    z = [f.zero()] * S.dim
    for c, r in zip(combo, rows):
        if not f.is_zero(c):
            z = [f.add(a, f.mul(c, b)) for a, b in zip(z, r)]
    if S.mul_coords(z, z) != z or all(f.is_zero(c) for c in z) or z == list(S.one):
        return None
    return z


def is_local_exhaustive(E):
    """Rung L1: exact scan of every element for a nontrivial idempotent."""
    w = _scan_idempotents_exhaustive(E)
    if w is None:
        return LocalityResult("local", "L1")
    return LocalityResult("notlocal", "L1", witness=w)


def is_local_structural(E, seed=0):
    """Rungs L2/L3: radical quotient analysis without exhaustive scans."""
    f = E.field
    if f.kind == "prime":
        quick = _hunt_split_idempotent(E, seed, tries=16)
        if quick is not None:
            return LocalityResult("notlocal", "L2", witness=quick, detail="minpoly split")
        R = radical(E)
        if R.dim == E.dim - 1:
            return LocalityResult("local", "L2", detail="codim-1 radical")
        S, _proj = quotient_by_ideal(E, R)
        if S.dim == 1:
            return LocalityResult("local", "L2")
        section = _section_through_quotient(E, R)
        if S.is_commutative():
            fixed = _fixed_space(S)
            if len(fixed) == 1:
                return LocalityResult("local", "L2", detail="residue field")
            eS = _nontrivial_idempotent_in_semisimple(S, seed)
        else:
            eS = _nontrivial_idempotent_in_semisimple(S, seed)
            if eS is None:
                return LocalityResult(
                    "notlocal", "L2", witness=None,
                    detail="noncommutative semisimple quotient; witness search exhausted",
                )
        if eS is None:
            return LocalityResult("undecided", "L2", detail="no splitting idempotent found")
        e = lift_idempotent(E, section(eS))
        if e is None or e == list(E.one) or all(f.is_zero(c) for c in e):
            return LocalityResult("undecided", "L2", detail="idempotent lifting failed")
        return LocalityResult("notlocal", "L2", witness=e)
    # ratfun2
    if not E.is_commutative():
        return LocalityResult("undecided", "L3", detail="noncommutative over F_2(u,v)")
    N = nilpotents_ratfun2(E)
    S, _proj = quotient_by_ideal(E, N)
    if S.dim == 1:
        return LocalityResult("local", "L3")
    if _all_squares_scalar(S):
        return LocalityResult("local", "L3", detail="purely inseparable residue field")
    e = _hunt_split_idempotent(S, seed, tries=0,
                               candidates=[S.basis_coords(i) for i in range(S.dim)])
    if e is not None:
        section = _section_through_quotient(E, N)
        lifted = lift_idempotent(E, section(e))
        if lifted is not None and lifted != list(E.one) and any(
            not f.is_zero(c) for c in lifted
        ):
            return LocalityResult("notlocal", "L3", witness=lifted)
    return LocalityResult("undecided", "L3")


def _all_squares_scalar(S):
    f = S.field
    one_rows, one_piv = linalg.rref(f, [list(S.one)])
    for i in range(S.dim):
        sq = S.mul_coords(S.basis_coords(i), S.basis_coords(i))
        if not linalg.in_span(f, one_rows, one_piv, sq):
            return False
    return True


def _section_through_quotient(E, ideal):
    """Coordinate section of E -> E/ideal using the non-pivot coordinates."""
    pivset = set(ideal.pivots)
    free = [c for c in range(E.dim) if c not in pivset]

    def section(q_coords):
        v = [E.field.zero()] * E.dim
        for c, pos in zip(q_coords, free):
            v[pos] = c
        return v

    return section


def is_local(E, budget=2 ** 20, seed=0):
    """Decide whether E is local; Undecided is a first-class outcome.

    L1 scans every element when the field is finite and |k|^dim fits the
    budget; L2 handles prime fields through the radical quotient; L3 covers
    commutative algebras over F_2(u,v) through the nilpotent kernel.
    """
    if E.dim == 1:
        return LocalityResult("local", "L1", detail="dimension one")
    if E.field.size is not None and E.field.size ** E.dim <= budget:
        return is_local_exhaustive(E)
    return is_local_structural(E, seed=seed)


# ---------------------------------------------------------------------------
# case classifier


@dataclass
class CaseResult:
    label: str                   # dim3 | case1 | case2a | case2b | case2c | case2d | undecided
    witnesses: dict = dc_field(default_factory=dict)


def _witness_candidates(D, seed, enum_budget=2 ** 20, random_draws=10 ** 4):
    f = D.field
    for i in range(D.dim):
        yield D.basis_coords(i)
    for i in range(D.dim):
        for j in range(i + 1, D.dim):
            bi, bj = D.basis_coords(i), D.basis_coords(j)
            yield [f.add(a, b) for a, b in zip(bi, bj)]
    if f.size is not None and f.size ** D.dim <= enum_budget:
        for idx in range(f.size ** D.dim):
            v = []
            r = idx
            for _ in range(D.dim):
                v.append(f.from_int(r % f.size))
                r //= f.size
            yield v
        return
    rng = random.Random(seed)
    for _ in range(random_draws):
        yield [f.random_element(rng) for _ in range(D.dim)]


def _candidate_list(D, seed, cap):
    out = []
    for v in _witness_candidates(D, seed):
        out.append(v)
        if len(out) >= cap:
            break
    return out


def _indep(D, vectors):
    return linalg.rank(D.field, vectors) == len(vectors)


def _primitive_components(D, seed=0):
    """Primitive idempotent decomposition of a commutative algebra over F_p.

    Returns a list of (subspace rows, unit coords); each block is local.
    """
    f = D.field
    out = []
    full_rows, full_piv = linalg.rref(f, linalg.identity(f, D.dim))
    stack = [(full_rows, full_piv, list(D.one))]
    while stack:
        rows, piv, unit = stack.pop()
        sub = _algebra_on_subspace(D, rows, piv, unit=unit)
        fixed = _fixed_space(sub)
        if len(fixed) == 1:
            out.append((rows, unit))
            continue
        e_sub = None
        for w in fixed:
            if linalg.rank(f, [sub.one, w]) == 2:
                mp = min_poly(sub.elem(w))
                e_sub = _crt_idempotent_from_minpoly(sub, w, mp)
                if e_sub is not None:
                    break
        if e_sub is None:
            out.append((rows, unit))
            continue
        e1 = [f.zero()] * D.dim
        for c, b in zip(e_sub, rows):
            if not f.is_zero(c):
                e1 = [f.add(a, f.mul(c, x)) for a, x in zip(e1, b)]
        e2 = [f.sub(a, b) for a, b in zip(unit, e1)]
        for e in (e1, e2):
            prods = [D.mul_coords(e, v) for v in rows]
            r2, p2 = linalg.rref(f, prods)
            stack.append((r2, p2, e))
    out.sort(key=lambda t: t[0])
    return out


def _check_case2c(D, seed):
    f = D.field
    if f.char != 2 or D.dim < 4 or not D.is_commutative():
        return None
    N = nilradical(D)
    if N.dim:
        K, proj = quotient_by_ideal(D, N)
    else:
        K, proj = D, linalg.identity(f, D.dim)
    if K.dim < 4 or not _all_squares_scalar(K):
        return None
    one_rows, one_piv = linalg.rref(f, [list(K.one)])
    cands = _candidate_list(K, seed, 1024)
    for a in cands:
        if linalg.in_span(f, one_rows, one_piv, a):
            continue
        for b in cands:
            ab = K.mul_coords(a, b)
            if _indep(K, [list(K.one), a, ab, b]):
                return {"K": K, "proj": proj, "a": a, "b": b}
    return None


def _check_case2d(D, seed):
    f = D.field
    if f.size != 2 or not D.is_commutative():
        return None
    comps = _primitive_components(D, seed)
    if len(comps) < 4:
        return None
    blocks = []
    for rows, unit in comps:
        sub = _algebra_on_subspace(D, *linalg.rref(f, rows), unit=unit)
        rad = radical(sub)
        if sub.dim - rad.dim != 1:
            return None
        blocks.append({"rows": rows, "unit": unit})
    return {"factors": blocks}


def classify_case(D, budget=2 ** 20, seed=0):
    """Witness-case classification of an algebra of dimension >= 3.

    Cases are tested in the fixed order dim3 (dimension 3 only), case1,
    case2b, case2a, case2c, case2d; the first witness found in the
    documented candidate order wins, so results are reproducible.
    """
    f = D.field
    if D.dim < 3:
        raise DimensionTooSmall("classifier needs dimension at least 3")
    one = list(D.one)
    zero = D.zero_coords()
    cands = _candidate_list(D, seed, 4096)
    if D.dim == 3:
        for a in cands:
            if D.mul_coords(a, a) != zero:
                continue
            for b in cands:
                if (
                    D.mul_coords(b, b) == zero
                    and D.mul_coords(a, b) == zero
                    and D.mul_coords(b, a) == zero
                    and _indep(D, [one, a, b])
                ):
                    return CaseResult("dim3", {"a": a, "b": b})
        return CaseResult("undecided")
    # case 1
    for a in cands:
        aa = D.mul_coords(a, a)
        if _indep(D, [one, a, aa]):
            for b in cands:
                if _indep(D, [one, a, aa, b]):
                    return CaseResult("case1", {"a": a, "b": b})
    # case 2b
    sqzero = [a for a in cands if D.mul_coords(a, a) == zero]
    for a in sqzero:
        for b in sqzero:
            ab = D.mul_coords(a, b)
            if _indep(D, [one, a, ab, b]):
                return CaseResult("case2b", {"a": a, "b": b})
    # case 2a
    for a in sqzero:
        for b in sqzero:
            if (
                D.mul_coords(a, b) == zero
                and D.mul_coords(b, a) == zero
                and _indep(D, [one, a, b])
            ):
                return CaseResult("case2a", {"a": a, "b": b})
    hit = _check_case2c(D, seed)
    if hit is not None:
        return CaseResult("case2c", hit)
    hit = _check_case2d(D, seed)
    if hit is not None:
        return CaseResult("case2d", hit)
    return CaseResult("undecided")
