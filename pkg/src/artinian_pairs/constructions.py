"""Parametric families of modules over pairs k -> D.

Construction 1 spans V_t by the image of a truncated diagonal map together
with its twist by a + t*b (plus a Jordan-shift correction); Construction 2
is the product-of-four-local-factors variant used when the base field has
two elements.  The locality certificate re-derives, per case, the linear
relations satisfied by the (sigma, tau) coordinates of endomorphisms and
embeds End(V_t) into a visibly local algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import linalg
from .algebras import (
    Algebra,
    classify_case,
    make_truncated_poly_algebra,
    nilradical,
    product_algebra,
    _primitive_components,
)
from .errors import (
    CaseMismatch,
    CertificationFailed,
    ExtractionFailed,
    HypothesisViolated,
    LengthMismatch,
    NeedAtLeastFourFactors,
)
from .pairs import (
    BlockMap,
    SubspaceBasis,
    hom_space,
    is_indecomposable,
    is_isomorphic,
    lift_module,
    make_module,
    make_pair,
)


@dataclass
class ConstructionSpec:
    D: Algebra
    rank: tuple
    a: list                      # coords in D, supported in component 1
    b: list
    t: object
    case: str


@dataclass
class ConstructionContext:
    pair: object
    D: Algebra
    rank: tuple
    a: list
    b: list
    t: object
    case: str
    H: list                      # r1 x r1 Jordan shift
    gens: list                   # the 2*r1 generators, first family then second
    extra: dict = dc_field(default_factory=dict)


def jordan_nilpotent(field, r):
    """The r x r shift matrix with ones on the superdiagonal."""
    one, zero = field.one(), field.zero()
    return [[one if j == i + 1 else zero for j in range(r)] for i in range(r)]


def truncated_diagonal(pair, rank, x):
    """Send a length-r1 vector to the tuple of its prefixes, one per component.

    Entry c of component i is the scalar x_c times the unit of that
    component; components with rank 0 receive nothing.
    """
    if len(x) != rank[0]:
        raise LengthMismatch("vector length %d does not match leading rank %d"
                             % (len(x), rank[0]))
    f = pair.field
    layout, dim = pair.w_layout(rank)
    out = [f.zero()] * dim
    for i, comp in enumerate(pair.components):
        off, r, d = layout[i]
        for c in range(min(r, len(x))):
            if not f.is_zero(x[c]):
                seg = [f.mul(x[c], u) for u in comp.one]
                out[off + c * d: off + (c + 1) * d] = seg
    return out


def _embed_component_one(D, coords1):
    off, length = D.component_bounds[0]
    out = [D.field.zero()] * D.dim
    out[off:off + length] = list(coords1)
    return out


def _component_one_part(D, coords):
    off, length = D.component_bounds[0]
    return list(coords[off:off + length])


def construction_one(spec):
    """The parametric module V_t -> W over the pair k -> D."""
    D, rank, t = spec.D, tuple(spec.rank), spec.t
    f = D.field
    if rank[0] < 1 or any(rank[0] < r for r in rank):
        raise HypothesisViolated("leading rank must dominate the tuple")
    if len(rank) != D.n_components():
        raise ValueError("rank length does not match component count")
    pair = make_pair(D, [D.one])
    D1 = pair.components[0]
    a1 = _component_one_part(D, spec.a)
    b1 = _component_one_part(D, spec.b)
    if linalg.rank(f, [list(D1.one), a1, b1]) != 3:
        raise HypothesisViolated("{1, a, b} is linearly dependent in the leading component")
    r1 = rank[0]
    atb = [f.add(x, f.mul(t, y)) for x, y in zip(spec.a, spec.b)]
    gens = []
    basis_vecs = []
    for j in range(r1):
        e = [f.zero()] * r1
        e[j] = f.one()
        basis_vecs.append(e)
        gens.append(truncated_diagonal(pair, rank, e))
    for j in range(r1):
        v = pair.act_b_on_w(atb, rank, gens[j])
        if j >= 1:
            shift = pair.act_b_on_w(spec.b, rank, gens[j - 1])
            v = [f.add(x, y) for x, y in zip(v, shift)]
        gens.append(v)
    M = make_module(pair, rank, gens)
    if M.dim_v != 2 * r1:
        raise HypothesisViolated("V_t has dimension %d, expected %d" % (M.dim_v, 2 * r1))
    M.construction = ConstructionContext(
        pair, D, rank, spec.a, spec.b, t, spec.case,
        jordan_nilpotent(f, r1), gens,
    )
    return M


def construction_two(D, rank):
    """The product-of-locals construction over the quotient pair k -> E.

    The leading component of D must split into at least four local factors
    with residue field k; the module lives over E = D/I where I collapses
    each factor to its residue field.
    """
    f = D.field
    rank = tuple(rank)
    if rank[0] < 1 or any(rank[0] < r for r in rank):
        raise HypothesisViolated("leading rank must dominate the tuple")
    D1 = D.component_algebra(0)
    comps = _primitive_components(D1)
    l = len(comps)
    if l < 4:
        raise NeedAtLeastFourFactors("leading component splits into %d local factors" % l)
    k_alg = make_truncated_poly_algebra(f, 1)
    tail = [D.component_algebra(i) for i in range(1, D.n_components())]
    E = product_algebra([k_alg] * l + tail)
    pair = make_pair(E, [E.one])
    r1 = rank[0]
    rank_e = (r1,) * l + tuple(rank[1:])
    layout, dim = pair.w_layout(rank_e)
    H = jordan_nilpotent(f, r1)
    gens = []
    for j in range(r1):
        x = [f.zero()] * r1
        x[j] = f.one()
        v = [f.zero()] * dim
        for m in range(l):
            if m == 1:
                continue
            off = layout[m][0]
            for c in range(r1):
                v[off + c] = x[c]
        for i in range(1, len(rank)):
            off, r, d = layout[l + i - 1]
            comp = pair.components[l + i - 1]
            for c in range(min(r, r1)):
                if not f.is_zero(x[c]):
                    seg = [f.mul(x[c], u) for u in comp.one]
                    v[off + c * d: off + (c + 1) * d] = seg
        gens.append(v)
    for j in range(r1):
        y = [f.zero()] * r1
        y[j] = f.one()
        hy = linalg.mat_vec(f, H, y)
        v = [f.zero()] * dim
        for m, vec in ((1, y), (2, y), (3, hy)):
            off = layout[m][0]
            for c in range(r1):
                v[off + c] = vec[c]
        gens.append(v)
    M = make_module(pair, rank_e, gens)
    if M.dim_v != 2 * r1:
        raise HypothesisViolated("V has dimension %d, expected %d" % (M.dim_v, 2 * r1))
    M.construction = ConstructionContext(
        pair, D, rank, None, None, None, "case2d", H, gens,
        extra={"l": l, "rank_e": rank_e, "requested_rank": rank},
    )
    return M


# ---------------------------------------------------------------------------
# admissible parameters


class AdmissibleParams:
    """Per-case admissibility of t and distinguishability of pairs (t, u)."""

    def __init__(self, D1, a1, b1, case):
        if case not in ("dim3", "case1", "case2a", "case2b", "case2c"):
            raise CaseMismatch("no parameter rules for case %r" % case)
        self.D1 = D1
        self.a = list(a1)
        self.b = list(b1)
        self.case = case
        self.field = D1.field

    def _atb(self, t):
        f = self.field
        return [f.add(x, f.mul(t, y)) for x, y in zip(self.a, self.b)]

    def is_admissible(self, t):
        if self.case != "case1":
            return True
        D1, f = self.D1, self.field
        sq = D1.mul_coords(self._atb(t), self._atb(t))
        return linalg.rank(f, [list(D1.one), self.a, self.b, sq]) == 4

    def distinguishes(self, t, u):
        f = self.field
        if self.case == "case1":
            prod = self.D1.mul_coords(self._atb(t), self._atb(u))
            return linalg.rank(f, [list(self.D1.one), self.a, self.b, prod]) == 4
        if self.case == "case2b":
            return not f.eq(u, t) and not f.eq(u, f.neg(t))
        return not f.eq(u, t)

    def parameter_pool(self):
        f = self.field
        if f.size is not None:
            return [f.from_int(c) for c in range(f.size)]
        return f.sample_elements()

    def admissible_parameters(self):
        return [t for t in self.parameter_pool() if self.is_admissible(t)]


def admissible_parameters(D1, a1, b1, case):
    """Admissibility object; see AdmissibleParams."""
    return AdmissibleParams(D1, a1, b1, case)


# ---------------------------------------------------------------------------
# sigma/tau extraction and the locality certificate


def sigma_tau_extract(ctx, phi):
    """The unique matrices (sigma, tau) describing phi on the diagonal part."""
    f = ctx.pair.field
    r1 = ctx.rank[0]
    gen_cols = [[ctx.gens[g][m] for g in range(2 * r1)] for m in range(len(ctx.gens[0]))]
    sigma = [[f.zero()] * r1 for _ in range(r1)]
    tau = [[f.zero()] * r1 for _ in range(r1)]
    for j in range(r1):
        e = [f.zero()] * r1
        e[j] = f.one()
        img = phi.apply(truncated_diagonal(ctx.pair, ctx.rank, e))
        coords = linalg.solve(f, gen_cols, img)
        if coords is None:
            raise ExtractionFailed("image of a diagonal generator leaves V_t")
        for i in range(r1):
            sigma[i][j] = coords[i]
            tau[i][j] = coords[r1 + i]
    return sigma, tau


@dataclass
class CertResult:
    verdict: str                 # "certified" | "failed"
    reason: str = ""
    detail: dict = dc_field(default_factory=dict)

    @property
    def certified(self):
        return self.verdict == "certified"


def _mat_eq(f, A, B):
    return all(f.eq(a, b) for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def _mat_add(f, A, B):
    return [[f.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _mat_scale(f, c, A):
    return [[f.mul(c, a) for a in row] for row in A]


def _in_poly_span_of_H(f, H, mat):
    r = len(H)
    powers = [linalg.identity(f, r)]
    for _ in range(1, r):
        powers.append(linalg.matmul(f, powers[-1], H))
    rows = [[p[i][j] for i in range(r) for j in range(r)] for p in powers]
    rows, piv = linalg.rref(f, rows)
    flat = [mat[i][j] for i in range(r) for j in range(r)]
    return linalg.in_span(f, rows, piv, flat)


def _scalar_part(f, one_coords, coords):
    """Write coords as c * one; returns c or None."""
    rows, piv = linalg.rref(f, [list(one_coords)])
    got = linalg.coords_in_rows(f, rows, piv, coords)
    if got is None:
        return None
    # unscale: rows[0] = one / lead, so c adjusts by the leading coefficient
    lead_pos = piv[0]
    return f.div(coords[lead_pos], one_coords[lead_pos]) if got else None


def locality_certificate(M, case):
    """Verify the per-case endomorphism relations and embed End locally.

    Checks that every endomorphism's (sigma, tau) pair satisfies the case's
    relations, that the assignment is injective and multiplicative into a
    dual-number style algebra over k[H], and concludes that End is local.
    A failure signals an inadmissible parameter choice, not a broken module.
    """
    ctx = getattr(M, "construction", None)
    if ctx is None:
        raise CaseMismatch("module does not carry construction data")
    if case == "case2d":
        return _certificate_case2d(M, ctx)
    if case not in ("dim3", "case1", "case2a", "case2b", "case2c"):
        raise CaseMismatch("unknown case %r" % case)
    f = ctx.pair.field
    r1 = ctx.rank[0]
    H = ctx.H
    hom = hom_space(M, M)
    data = [sigma_tau_extract(ctx, m) for m in hom.maps]
    for idx, (sigma, tau) in enumerate(data):
        if not _mat_eq(f, linalg.matmul(f, sigma, H), linalg.matmul(f, H, sigma)):
            return CertResult("failed", "sigma does not commute with H (basis map %d)" % idx)
        if case == "case1":
            if any(not f.is_zero(c) for row in tau for c in row):
                return CertResult("failed", "tau is nonzero in case 1 (basis map %d)" % idx)
        elif case in ("case2b", "case2c"):
            if not _in_poly_span_of_H(f, H, tau):
                return CertResult("failed", "tau lies outside k[H] (basis map %d)" % idx)
    # multiplication constants of the target algebra k[H][eps]/(eps^2 - c)
    D1 = ctx.pair.components[0]
    a1 = _component_one_part(ctx.D, ctx.a)
    b1 = _component_one_part(ctx.D, ctx.b)
    atb1 = [f.add(x, f.mul(ctx.t, y)) for x, y in zip(a1, b1)]
    sq = D1.mul_coords(atb1, atb1)
    bsq = D1.mul_coords(b1, b1)
    if case in ("dim3", "case2a", "case2b"):
        if any(not f.is_zero(c) for c in sq) or any(not f.is_zero(c) for c in bsq):
            return CertResult("failed", "(a+tb)^2 or b^2 is nonzero, outside this case")
        c0 = f.zero()
        c2 = f.zero()
    else:
        c0 = _scalar_part(f, D1.one, sq)
        c2 = _scalar_part(f, D1.one, bsq)
        if c0 is None or c2 is None:
            return CertResult("failed", "squares are not scalars in the leading component")
    H2 = linalg.matmul(f, H, H)
    for i, (s1, t1) in enumerate(data):
        for j, (s2, t2) in enumerate(data):
            comp = hom.maps[i].compose(hom.maps[j])
            s12, t12 = sigma_tau_extract(ctx, comp)
            tt = linalg.matmul(f, t1, t2)
            expected_s = linalg.matmul(f, s1, s2)
            if not f.is_zero(c0):
                expected_s = _mat_add(f, expected_s, _mat_scale(f, c0, tt))
            if not f.is_zero(c2):
                expected_s = _mat_add(f, expected_s, _mat_scale(f, c2, linalg.matmul(f, H2, tt)))
            expected_t = _mat_add(
                f, linalg.matmul(f, t1, s2), linalg.matmul(f, s1, t2)
            )
            if not _mat_eq(f, s12, expected_s) or not _mat_eq(f, t12, expected_t):
                return CertResult("failed", "composition law fails on basis pair (%d,%d)" % (i, j))
    flat = [
        [s[i][j] for i in range(r1) for j in range(r1)]
        + [t[i][j] for i in range(r1) for j in range(r1)]
        for s, t in data
    ]
    if linalg.rank(f, flat) != hom.dim:
        return CertResult("failed", "sigma/tau assignment is not injective")
    return CertResult(
        "certified", "",
        {"case": case, "end_dim": hom.dim, "target": "k[H]<eps>, eps^2 = c0 + c2*H^2"},
    )


def _certificate_case2d(M, ctx):
    f = ctx.pair.field
    r1 = ctx.extra["rank_e"][0]
    l = ctx.extra["l"]
    H = ctx.H
    hom = hom_space(M, M)
    alphas = []
    for idx, m in enumerate(hom.maps):
        alpha = [[m.blocks[0][a][b][0] for b in range(r1)] for a in range(r1)]
        for comp_idx in range(1, l):
            blk = [[m.blocks[comp_idx][a][b][0] for b in range(r1)] for a in range(r1)]
            if not _mat_eq(f, blk, alpha):
                return CertResult(
                    "failed", "factor blocks disagree (basis map %d, factor %d)" % (idx, comp_idx)
                )
        if not _mat_eq(f, linalg.matmul(f, alpha, H), linalg.matmul(f, H, alpha)):
            return CertResult("failed", "alpha does not commute with H (basis map %d)" % idx)
        alphas.append(alpha)
    for i in range(hom.dim):
        for j in range(hom.dim):
            comp = hom.maps[i].compose(hom.maps[j])
            got = [[comp.blocks[0][a][b][0] for b in range(r1)] for a in range(r1)]
            if not _mat_eq(f, got, linalg.matmul(f, alphas[i], alphas[j])):
                return CertResult("failed", "alpha is not multiplicative on (%d,%d)" % (i, j))
    flat = [[a[i][j] for i in range(r1) for j in range(r1)] for a in alphas]
    if linalg.rank(f, flat) != hom.dim:
        return CertResult("failed", "alpha assignment is not injective")
    return CertResult("certified", "", {"case": "case2d", "end_dim": hom.dim, "target": "k[H]"})


# ---------------------------------------------------------------------------
# the driver and the family report


def _first_admissible(adm):
    for t in adm.parameter_pool():
        if adm.is_admissible(t):
            return t
    return None


def realize_rank(D, rank, budget=2 ** 20, seed=0):
    """Build and certify an indecomposable module of the requested rank.

    Returns (module, certificate dict).  The module lives over k -> D for
    the witness cases, over k -> D/I for the inseparable case before
    lifting, and over the Dade quotient pair k -> E for case 2d.
    """
    rank = tuple(rank)
    if all(r == 0 for r in rank):
        raise HypothesisViolated("rank must be nontrivial")
    if rank[0] < 1 or any(rank[0] < r for r in rank):
        raise HypothesisViolated("leading rank must dominate the tuple")
    D1 = D.component_algebra(0)
    cls = classify_case(D1, seed=seed)
    label = cls.label
    if D1.dim == 3 and label != "dim3":
        raise HypothesisViolated("a 3-dimensional leading component must be the special algebra")
    if D1.dim < 3 or label == "undecided":
        raise HypothesisViolated("leading component admits no construction witnesses")
    f = D.field
    if label in ("dim3", "case1", "case2a", "case2b"):
        a1, b1 = cls.witnesses["a"], cls.witnesses["b"]
        adm = AdmissibleParams(D1, a1, b1, label)
        t = _first_admissible(adm)
        if t is None:
            raise CertificationFailed("no admissible parameter exists in k")
        spec = ConstructionSpec(
            D, rank, _embed_component_one(D, a1), _embed_component_one(D, b1), t, label
        )
        M = construction_one(spec)
        return M, _certify(M, label, budget, seed, t)
    if label == "case2c":
        K = cls.witnesses["K"]
        tail = [D.component_algebra(i) for i in range(1, D.n_components())]
        Dq = product_algebra([K] + tail)
        a1, b1 = cls.witnesses["a"], cls.witnesses["b"]
        adm = AdmissibleParams(K, a1, b1, "case2c")
        t = _first_admissible(adm)
        spec = ConstructionSpec(
            Dq, rank, _embed_component_one(Dq, a1), _embed_component_one(Dq, b1), t, "case2c"
        )
        M = construction_one(spec)
        cert = _certify(M, "case2c", budget, seed, t)
        nil = nilradical(D1)
        if nil.dim:
            pair_d = make_pair(D, [D.one])
            off = D.component_bounds[0][0]
            ideal_rows = []
            for row in nil.rows:
                v = [f.zero()] * D.dim
                v[off:off + D1.dim] = row
                ideal_rows.append(v)
            lifted = lift_module(M, pair_d, SubspaceBasis(D, ideal_rows))
            cert = dict(cert)
            cert["rung"] = cert.get("rung", "") + "+reflected"
            lifted.construction = M.construction
            return lifted, cert
        return M, cert
    if label == "case2d":
        M = construction_two(D, rank)
        return M, _certify(M, "case2d", budget, seed, None)
    raise CertificationFailed("unhandled case %r" % label)


def _certify(M, label, budget, seed, t):
    res = is_indecomposable(M, budget=budget, seed=seed)
    if res.verdict == "indec":
        return {"case": label, "t": t, "rung": res.rung, "method": "end-locality"}
    if res.verdict == "decomp":
        raise CertificationFailed("constructed module split; parameter t is inadmissible")
    cert = locality_certificate(M, label)
    if cert.certified:
        return {"case": label, "t": t, "rung": "certificate", "method": "sigma-tau",
                "detail": cert.detail}
    raise CertificationFailed("certificate failed: %s" % cert.reason)


@dataclass
class FamilyReport:
    case: str
    params: list
    verdicts: list
    pairwise: list
    classes: int
    notes: list

    def distinct_class_count(self):
        return self.classes


def family(D, rank, params, budget=2 ** 20, seed=0):
    """Build V_t for each parameter, certify, and compare all pairs."""
    rank = tuple(rank)
    D1 = D.component_algebra(0)
    cls = classify_case(D1, seed=seed)
    label = cls.label
    if label in ("case2d", "undecided"):
        raise CaseMismatch("family needs a parametric case; got %r" % label)
    f = D.field
    a1, b1 = cls.witnesses["a"], cls.witnesses["b"]
    if label == "case2c":
        K = cls.witnesses["K"]
        tail = [D.component_algebra(i) for i in range(1, D.n_components())]
        base = product_algebra([K] + tail)
        adm = AdmissibleParams(K, a1, b1, label)
    else:
        base = D
        adm = AdmissibleParams(D1, a1, b1, label)
    modules = []
    verdicts = []
    notes = []
    for t in params:
        spec = ConstructionSpec(
            base, rank, _embed_component_one(base, a1), _embed_component_one(base, b1), t, label
        )
        M = construction_one(spec)
        res = is_indecomposable(M, budget=budget, seed=seed)
        verdict = res.verdict
        rung = res.rung
        if verdict == "undecided":
            cert = locality_certificate(M, label)
            if cert.certified:
                verdict, rung = "indec", "certificate"
        verdicts.append({
            "verdict": verdict,
            "rung": rung,
            "admissible": bool(adm.is_admissible(t)),
        })
        modules.append(M)
    n = len(params)
    pairwise = [["iso" if i == j else None for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            res = is_isomorphic(modules[i], modules[j], budget=budget, seed=seed)
            pairwise[i][j] = pairwise[j][i] = res.verdict
            if not adm.distinguishes(params[i], params[j]) and not f.eq(params[i], params[j]):
                notes.append(
                    "pair (%d,%d) undistinguished by the independence argument; "
                    "empirical verdict %r recorded" % (i, j, res.verdict)
                )
    # classes among certified indecomposables, joined by confirmed isos
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    certified = [i for i in range(n) if verdicts[i]["verdict"] == "indec"]
    for i in certified:
        for j in certified:
            if i < j and pairwise[i][j] == "iso":
                parent[find(i)] = find(j)
    classes = len({find(i) for i in certified})
    return FamilyReport(label, list(params), verdicts, pairwise, classes, notes)
