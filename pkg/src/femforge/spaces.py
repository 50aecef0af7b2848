"""Catalog of polynomial spaces, operator matrices and space decompositions.

A ``PolySpace`` is a subspace of shaped polynomials of degree <= k, stored as
a coefficient matrix over the shaped monomial frame (columns are members).
Because frames are degree-major, a space re-expressed at a higher degree just
pads zero rows, so subspace algebra across degrees is one matrix problem.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Callable

from . import exact, poly
from .exact import Matrix
from .integrate import pair_simplex
from .poly import Polynomial
from .report import CheckResult
from .simplex import Face, SimplexFrame

_ZERO = Fraction(0)
_ONE = Fraction(1)


class UnsupportedTagError(ValueError):
    """Raised for an unknown space or operator tag."""


class BadDegreeError(ValueError):
    """Raised when a construction is requested below its degree floor."""


class PolySpace:
    __slots__ = ("frame", "kind", "k", "basis", "tag", "_members")

    def __init__(self, frame: SimplexFrame, kind: str, k: int, basis: Matrix, tag: str = ""):
        self.frame = frame
        self.kind = kind
        self.k = k
        self.basis = basis
        self.tag = tag
        self._members = None
        if basis.rows != len(poly.frame(kind, frame.d, k)):
            raise ValueError("basis row count does not match the monomial frame")

    @property
    def dim(self) -> int:
        return self.basis.cols

    def members(self) -> list[Polynomial]:
        if self._members is None:
            d = self.frame.d
            self._members = [
                poly.from_coeff_vector(d, self.kind, self.k, self.basis.column(j))
                for j in range(self.basis.cols)
            ]
        return self._members

    def member(self, j: int) -> Polynomial:
        return self.members()[j]

    def with_degree(self, k: int) -> "PolySpace":
        """The same space expressed over the degree <= k frame (k >= self.k)."""
        if k == self.k:
            return self
        if k < self.k:
            raise BadDegreeError("cannot shrink the frame below the space degree")
        rows = len(poly.frame(self.kind, self.frame.d, k))
        padded = [
            self.basis.row(i) if i < self.basis.rows else (_ZERO,) * self.basis.cols
            for i in range(rows)
        ]
        return PolySpace(self.frame, self.kind, k, Matrix(padded), self.tag)

    def __repr__(self):
        return f"PolySpace({self.tag or self.kind}, d={self.frame.d}, k={self.k}, dim={self.dim})"


def _common_frames(a: PolySpace, b: PolySpace) -> tuple[Matrix, Matrix]:
    if a.frame is not b.frame and a.frame.vertices != b.frame.vertices:
        raise ValueError("spaces live on different simplices")
    if a.kind != b.kind:
        raise poly.ShapeMismatchError("spaces have different value shapes")
    k = max(a.k, b.k)
    return a.with_degree(k).basis, b.with_degree(k).basis


def space_equal(a: PolySpace, b: PolySpace) -> bool:
    ma, mb = _common_frames(a, b)
    return exact.subspace_equal(ma, mb)


def space_sum(a: PolySpace, b: PolySpace, tag: str = "") -> PolySpace:
    ma, mb = _common_frames(a, b)
    k = max(a.k, b.k)
    return PolySpace(a.frame, a.kind, k, exact.subspace_sum(ma, mb), tag)


def space_is_direct_sum(a: PolySpace, b: PolySpace) -> bool:
    ma, mb = _common_frames(a, b)
    return exact.is_direct_sum(ma, mb)


def space_contains(a: PolySpace, b: PolySpace) -> bool:
    ma, mb = _common_frames(a, b)
    return exact.subspace_contains(ma, mb)


# -- closed-form dimensions ------------------------------------------------------


def dim_P(d: int, k: int) -> int:
    return comb(k + d, d) if k >= 0 else 0


def dim_H(d: int, k: int) -> int:
    return comb(k + d - 1, d - 1) if k >= 0 else 0


def dim_RM(d: int) -> int:
    return d * (d + 1) // 2


def dim_ND(d: int, k: int) -> int:
    return (k + 1) * comb(d + k + 1, d - 1) if k >= 0 else 0


def dim_bubble_vector(d: int, k: int) -> int:
    return max((k - 1) * comb(k + d - 1, k), 0) if k >= 0 else 0


def dim_bubble_sym(d: int, k: int) -> int:
    return d * (d + 1) // 2 * comb(d + k - 2, d) if k >= 0 else 0


def dim_bubble_rt(d: int, k: int) -> int:
    """dim of ker(trace) inside the order-k enriched vector space."""
    return d * comb(k + d - 1, d) if k >= 1 else 0


def dim_E0_vector(d: int, k: int) -> int:
    return d * comb(k + d - 1, d) - comb(k + d, d) + 1


def dim_E0perp_vector(d: int, k: int) -> int:
    return comb(k - 1 + d, d) - 1


def dim_E0_sym(d: int, k: int) -> int:
    return d * (d + 1) // 2 * comb(k - 2 + d, d) - d * comb(d + k - 1, d) + d * (d + 1) // 2


def dim_E0perp_sym(d: int, k: int) -> int:
    return d * comb(k + d - 1, d) - d * (d + 1) // 2


def dim_trace_vector(d: int, k: int) -> int:
    return (d + 1) * comb(k + d - 1, k)


def dim_trace_sym(d: int, k: int) -> int:
    return d * (d + 1) // 2 * (comb(d + k - 1, d - 1) + comb(d + k - 2, d - 1))


# -- standard spaces ---------------------------------------------------------------

_P_TAGS = {"P_scalar": "scalar", "P_vector": "vector", "P_sym": "sym", "P_skw": "skw"}


def _monomial_space(frame: SimplexFrame, kind: str, k: int, tag: str) -> PolySpace:
    n = len(poly.frame(kind, frame.d, k))
    return PolySpace(frame, kind, k, Matrix.identity(n), tag)


def _homogeneous_unit_columns(d: int, kind: str, k: int) -> Matrix:
    fr = poly.frame(kind, d, k)
    cols = [i for i, (_, exps) in enumerate(fr) if sum(exps) == k]
    n = len(fr)
    data = [[_ONE if i == c else _ZERO for c in cols] for i in range(n)]
    return Matrix(data)


def _skw_unit_matrices(d: int) -> list[Polynomial]:
    out = []
    for c in range(poly.ncomp("skw", d)):
        out.append(Polynomial.monomial(d, "skw", c, (0,) * d))
    return out


def build_standard(frame: SimplexFrame, tag: str, k: int) -> PolySpace:
    """Build a named space of degree parameter k (see the tag table).

    P_scalar/P_vector/P_sym/P_skw: full polynomial spaces of degree <= k.
    H_scalar: homogeneous scalars of degree exactly k.
    ND: P_k(R^d) + H_k(K)x with skew-matrix coefficients (first-kind edge space).
    RT_shape: P_k(R^d) + H_k x.
    RM: rigid motions (= ND at k = 0).
    xxT_H: x x^T H_k (symmetric, homogeneous of degree k + 2).
    skwPx: P_k(K)x with skew-matrix coefficients.
    """
    cached = frame._space_cache.get((tag, k))
    if cached is not None:
        return cached
    space = _build_standard_uncached(frame, tag, k)
    with frame._cache_lock:
        frame._space_cache[(tag, k)] = space
    return space


def _build_standard_uncached(frame: SimplexFrame, tag: str, k: int) -> PolySpace:
    d = frame.d
    if tag in _P_TAGS:
        if k < 0:
            raise BadDegreeError(f"{tag} needs k >= 0")
        return _monomial_space(frame, _P_TAGS[tag], k, f"{tag}_{k}")
    if tag == "H_scalar":
        if k < 0:
            raise BadDegreeError("H_scalar needs k >= 0")
        return PolySpace(frame, "scalar", k, _homogeneous_unit_columns(d, "scalar", k), f"H_{k}")
    if tag == "RM":
        return _build_standard_uncached(frame, "ND", 0)
    if tag == "ND":
        if k < 0:
            raise BadDegreeError("ND needs k >= 0")
        basis = exact.image_basis(poly.coeff_matrix(nd_generators(d, k), k + 1))
        return PolySpace(frame, "vector", k + 1, basis, f"ND_{k}")
    if tag == "RT_shape":
        if k < 0:
            raise BadDegreeError("RT_shape needs k >= 0")
        gens = _monomial_space(frame, "vector", k, "").members()
        for exps in poly.monomials(d, k):
            if sum(exps) == k:
                mono = Polynomial(d, "scalar", {(0, exps): _ONE})
                xq = Polynomial.vector_from(
                    [poly.multiply(Polynomial.coordinate(d, t), mono) for t in range(d)]
                )
                gens.append(xq)
        basis = exact.image_basis(poly.coeff_matrix(gens, k + 1))
        return PolySpace(frame, "vector", k + 1, basis, f"RT_{k}")
    if tag == "xxT_H":
        if k < 0:
            raise BadDegreeError("xxT_H needs k >= 0")
        gens = []
        for exps in poly.monomials(d, k):
            if sum(exps) == k:
                mono = Polynomial(d, "scalar", {(0, exps): _ONE})
                gens.append(poly.koszul_xxT(mono))
        basis = exact.image_basis(poly.coeff_matrix(gens, k + 2))
        return PolySpace(frame, "sym", k + 2, basis, f"xxT_H_{k}")
    if tag == "skwPx":
        if k < 0:
            raise BadDegreeError("skwPx needs k >= 0")
        gens = []
        for c in range(poly.ncomp("skw", d)):
            for exps in poly.monomials(d, k):
                mono_skw = Polynomial.monomial(d, "skw", c, exps)
                gens.append(poly.koszul_mat_x(mono_skw))
        basis = exact.image_basis(poly.coeff_matrix(gens, k + 1))
        return PolySpace(frame, "vector", k + 1, basis, f"skwPx_{k}")
    raise UnsupportedTagError(f"unknown space tag {tag!r}")


def empty_space(frame: SimplexFrame, kind: str, k: int = 0, tag: str = "") -> PolySpace:
    n = len(poly.frame(kind, frame.d, max(k, 0)))
    return PolySpace(frame, kind, max(k, 0), Matrix.zeros(n, 0), tag)


def nd_generators(d: int, k: int) -> list[Polynomial]:
    """Generators of the degree-k first-kind edge space P_k(R^d) + H_k(K)x."""
    gens = [
        Polynomial.monomial(d, "vector", c, exps)
        for exps in poly.monomials(d, k)
        for c in range(d)
    ]
    for c in range(poly.ncomp("skw", d)):
        nx = poly.koszul_mat_x(Polynomial.monomial(d, "skw", c, (0,) * d))
        for exps in poly.monomials(d, k):
            if sum(exps) == k:
                mono = Polynomial(d, "scalar", {(0, exps): _ONE})
                gens.append(poly.multiply(mono, nx))
    return gens


def nd_basis(d: int, k: int) -> list[Polynomial]:
    """Canonical basis of the coordinate edge space in d variables (no frame)."""
    if k < 0:
        return []
    mat = exact.image_basis(poly.coeff_matrix(nd_generators(d, k), k + 1))
    return [poly.from_coeff_vector(d, "vector", k + 1, mat.column(j)) for j in range(mat.cols)]


# -- operator matrices ---------------------------------------------------------------


def _pi_rm(v: Polynomial) -> Polynomial:
    d = v.d
    origin = (0,) * d
    val = v.evaluate(origin)
    skw0 = poly.skw_grad(v).evaluate(origin)
    comps = []
    for i in range(d):
        terms = {}
        if val[i]:
            terms[(0, (0,) * d)] = val[i]
        for j in range(d):
            if skw0[i][j]:
                e = [0] * d
                e[j] = 1
                key = (0, tuple(e))
                terms[key] = terms.get(key, _ZERO) + skw0[i][j]
        comps.append(Polynomial(d, "scalar", terms))
    return Polynomial.vector_from(comps)


_OPS: dict[str, tuple[Callable[[Polynomial], Polynomial], str, Callable[[int], int]]] = {
    "grad": (poly.grad, "vector", lambda k: max(k - 1, 0)),
    "div": (poly.div, "scalar", lambda k: max(k - 1, 0)),
    "div_rowwise": (poly.div_rowwise, "vector", lambda k: max(k - 1, 0)),
    "def": (poly.sym_grad, "sym", lambda k: max(k - 1, 0)),
    "hess": (poly.hess, "sym", lambda k: max(k - 2, 0)),
    "dot_x": (poly.koszul_dot_x, "scalar", lambda k: k + 1),
    "mat_x": (poly.koszul_mat_x, "vector", lambda k: k + 1),
    "xxT": (poly.koszul_xxT, "sym", lambda k: k + 2),
    "divdiv": (poly.divdiv, "scalar", lambda k: max(k - 2, 0)),
    "pi_RM": (_pi_rm, "vector", lambda k: max(k, 1)),
}


class OperatorMatrix:
    """Matrix of a linear operator from a space's basis to a target frame."""

    __slots__ = ("op", "source", "target_kind", "target_k", "matrix")

    def __init__(self, op: str, source: PolySpace, target_kind: str, target_k: int, matrix: Matrix):
        self.op = op
        self.source = source
        self.target_kind = target_kind
        self.target_k = target_k
        self.matrix = matrix

    def image_space(self, tag: str = "") -> PolySpace:
        return PolySpace(
            self.source.frame,
            self.target_kind,
            self.target_k,
            exact.image_basis(self.matrix),
            tag or f"img_{self.op}({self.source.tag})",
        )

    def kernel_space(self, tag: str = "") -> PolySpace:
        coords = self.matrix.null_space()
        return PolySpace(
            self.source.frame,
            self.source.kind,
            self.source.k,
            exact.image_basis(self.source.basis.matmul(coords)),
            tag or f"ker_{self.op}({self.source.tag})",
        )

    def rank(self) -> int:
        return self.matrix.rank()


def operator_matrix(op: str, source: PolySpace) -> OperatorMatrix:
    got = _OPS.get(op)
    if got is None:
        raise UnsupportedTagError(f"unknown operator tag {op!r}")
    fn, tkind, tk = got
    target_k = tk(source.k)
    images = [fn(p) for p in source.members()]
    if images:
        cols = [poly.coeff_vector(p, target_k) for p in images]
        matrix = Matrix.from_columns(cols)
    else:
        matrix = Matrix.zeros(len(poly.frame(tkind, source.frame.d, target_k)), 0)
    return OperatorMatrix(op, source, tkind, target_k, matrix)


def image_space(op: str, source: PolySpace, tag: str = "") -> PolySpace:
    return operator_matrix(op, source).image_space(tag)


def kernel_space(op: str, source: PolySpace, tag: str = "") -> PolySpace:
    return operator_matrix(op, source).kernel_space(tag)


# -- traces and bubbles ----------------------------------------------------------------


def _face_trace_rows(face: Face, member: Polynomial, mode: str, chart_k: int) -> list[list[Fraction]]:
    """Coefficient rows of the member's face trace in the chart scalar frame."""
    g = face.normal_frame[0]
    d = member.d
    if mode == "div_vector":
        vg = sum(
            (member.component(t).scale(g[t]) for t in range(d) if g[t]), Polynomial.zero(d)
        )
        polys = [face.restrict(vg)]
    elif mode == "div_sym":
        polys = []
        for i in range(d):
            row = sum(
                (member.entry(i, t).scale(g[t]) for t in range(d) if g[t]), Polynomial.zero(d)
            )
            polys.append(face.restrict(row))
    elif mode == "ndiv":
        w = poly.div_rowwise(member)
        gw = sum((w.component(t).scale(g[t]) for t in range(d) if g[t]), Polynomial.zero(d))
        polys = [face.restrict(gw)]
    elif mode == "combo":
        from .simplex import surface_div

        w = poly.div_rowwise(member)
        gw = sum((w.component(t).scale(g[t]) for t in range(d) if g[t]), Polynomial.zero(d))
        taug = Polynomial.vector_from(
            [
                sum((member.entry(i, t).scale(g[t]) for t in range(d) if g[t]), Polynomial.zero(d))
                for i in range(d)
            ]
        )
        polys = [face.restrict(gw) + surface_div(face, taug)]
    else:
        raise UnsupportedTagError(f"unknown trace mode {mode!r}")
    rows = []
    for p in polys:
        vec = poly.coeff_vector(
            Polynomial(face.dim, "scalar", {(0, e): v for (_, e), v in p.terms.items()}), chart_k
        )
        rows.append(vec)
    return rows


_TRACE_ALIASES = {"trace_div_of_div": "ndiv", "trace_divdiv_combo": "combo"}


def trace_matrix(frame: SimplexFrame, space: PolySpace, mode: str) -> Matrix:
    """Stacked face-trace coefficients: rows = (face, chart monomial [, comp])."""
    if mode == "trace_div":
        mode = "div_vector" if space.kind == "vector" else "div_sym"
    mode = _TRACE_ALIASES.get(mode, mode)
    chart_k = space.k if mode in ("div_vector", "div_sym") else max(space.k - 1, 0)
    members = space.members()
    cols = []
    for member in members:
        col: list[Fraction] = []
        for face in frame.faces(1):
            for row in _face_trace_rows(face, member, mode, chart_k):
                col.extend(row)
        cols.append(col)
    if not cols:
        nfaces = len(frame.faces(1))
        per = len(poly.monomials(frame.d - 1, chart_k)) * (frame.d if mode == "div_sym" else 1)
        return Matrix.zeros(nfaces * per, 0)
    return Matrix.from_columns(cols)


_BUBBLE_SHAPES = {
    "div_vector": ("P_vector", "div_vector"),
    "div_sym": ("P_sym", "div_sym"),
    "div_RT_minus": ("RT_shape", "div_vector"),
}


def bubble_space(frame: SimplexFrame, family: str, k: int) -> PolySpace:
    """ker(trace) inside the family's shape space, by exact kernel computation."""
    got = _BUBBLE_SHAPES.get(family)
    if got is None:
        raise UnsupportedTagError(f"unknown bubble family {family!r}")
    if k < 0:
        raise BadDegreeError("bubble spaces need k >= 0")
    tag, mode = got
    cached = frame._space_cache.get(("bubble", family, k))
    if cached is not None:
        return cached
    shape = build_standard(frame, tag, k)
    tr = trace_matrix(frame, shape, mode)
    coords = tr.null_space()
    basis = exact.image_basis(shape.basis.matmul(coords))
    space = PolySpace(frame, shape.kind, shape.k, basis, f"bubble_{family}_{k}")
    with frame._cache_lock:
        frame._space_cache[("bubble", family, k)] = space
    return space


def bubble_sym_generators(frame: SimplexFrame, k: int) -> PolySpace:
    """span{lambda_i lambda_j m T_ij : |m| <= k-2} (the generator-side bubble)."""
    if k < 2:
        raise BadDegreeError("symmetric bubbles need k >= 2")
    d = frame.d
    gens = []
    for (i, j), T in sorted(frame.tensor_T.items()):
        lamlam = poly.multiply(frame.lambdas[i], frame.lambdas[j])
        for exps in poly.monomials(d, k - 2):
            mono = Polynomial(d, "scalar", {(0, exps): _ONE})
            gens.append(poly.multiply(poly.multiply(lamlam, mono), T))
    basis = exact.image_basis(poly.coeff_matrix(gens, k))
    return PolySpace(frame, "sym", k, basis, f"bubble_sym_gen_{k}")


def orthocomplement_in(parent: PolySpace, sub: PolySpace, tag: str = "") -> PolySpace:
    """{p in parent : (p, s)_K = 0 for all s in sub} via the exact pairing."""
    if sub.dim == 0:
        return PolySpace(parent.frame, parent.kind, parent.k, parent.basis, tag or parent.tag)
    frame = parent.frame
    subs = sub.members()
    pars = parent.members()
    pairing = Matrix([[pair_simplex(frame, s, p) for p in pars] for s in subs])
    coords = pairing.null_space()
    return PolySpace(
        frame, parent.kind, parent.k, exact.image_basis(parent.basis.matmul(coords)), tag
    )


def split_bubble(frame: SimplexFrame, family: str, k: int) -> tuple[PolySpace, PolySpace]:
    """(kernel of the differential inside the bubble, its L2 complement)."""
    cached = frame._space_cache.get(("split", family, k))
    if cached is not None:
        return cached
    bubble = bubble_space(frame, family, k)
    op = "div" if bubble.kind == "vector" else "div_rowwise"
    dm = operator_matrix(op, bubble)
    e0 = dm.kernel_space(f"E0_{family}_{k}")
    e0perp = orthocomplement_in(bubble, e0, f"E0perp_{family}_{k}")
    with frame._cache_lock:
        frame._space_cache[("split", family, k)] = (e0, e0perp)
    return e0, e0perp


def ker_dot_x_vector(frame: SimplexFrame, k: int) -> PolySpace:
    """ker(. x) inside P_k(K; R^d)."""
    if k < 0:
        return empty_space(frame, "vector", 0, "ker_dot_x_empty")
    return kernel_space("dot_x", build_standard(frame, "P_vector", k), f"ker_dot_x_vec_{k}")


def ker_mat_x_sym(frame: SimplexFrame, k: int) -> PolySpace:
    """ker(. x) inside P_k(K; S) (row-wise product with x)."""
    if k < 0:
        return empty_space(frame, "sym", 0, "ker_mat_x_empty")
    return kernel_space("mat_x", build_standard(frame, "P_sym", k), f"ker_mat_x_sym_{k}")


# -- certifications ----------------------------------------------------------------------


def certify_decompositions(frame: SimplexFrame, k: int) -> list[CheckResult]:
    """Direct-sum and kernel characterizations at degree parameter k >= 1."""
    if k < 1:
        raise BadDegreeError("decomposition suite needs k >= 1")
    d = frame.d
    out = []

    p_vec = build_standard(frame, "P_vector", k - 1)
    grad_pk = image_space("grad", build_standard(frame, "P_scalar", k), "grad_Pk")
    ker_vec = ker_dot_x_vector(frame, k - 1)
    skw_px = (
        build_standard(frame, "skwPx", k - 2)
        if k >= 2
        else empty_space(frame, "vector", 0, "skwPx_empty")
    )

    ok = space_is_direct_sum(grad_pk, ker_vec) and space_equal(space_sum(grad_pk, ker_vec), p_vec)
    out.append(
        CheckResult(
            "decomp-vector-grad-plus-koszul-kernel",
            ok,
            expected=p_vec.dim,
            got=grad_pk.dim + ker_vec.dim,
            context={"d": d, "k": k},
        )
    )

    out.append(
        CheckResult(
            "kernel-dot-x-equals-skw-times-x",
            space_equal(ker_vec, skw_px),
            expected=ker_vec.dim,
            got=skw_px.dim,
            context={"d": d, "k": k},
        )
    )

    ok = space_is_direct_sum(grad_pk, skw_px) and space_equal(space_sum(grad_pk, skw_px), p_vec)
    out.append(
        CheckResult(
            "decomp-vector-grad-plus-skw-x",
            ok,
            expected=p_vec.dim,
            got=grad_pk.dim + skw_px.dim,
            context={"d": d, "k": k},
        )
    )

    p_sym = build_standard(frame, "P_sym", k - 1)
    def_pk = image_space("def", build_standard(frame, "P_vector", k), "def_Pk")
    ker_sym = ker_mat_x_sym(frame, k - 1)
    ok = space_is_direct_sum(def_pk, ker_sym) and space_equal(space_sum(def_pk, ker_sym), p_sym)
    out.append(
        CheckResult(
            "decomp-sym-def-plus-koszul-kernel",
            ok,
            expected=p_sym.dim,
            got=def_pk.dim + ker_sym.dim,
            context={"d": d, "k": k},
        )
    )

    defx = image_space("mat_x", def_pk, "def_Pk_times_x")
    symx = image_space("mat_x", p_sym, "P_sym_times_x")
    out.append(
        CheckResult(
            "image-def-x-equals-sym-x",
            space_equal(defx, symx),
            expected=symx.dim,
            got=defx.dim,
            context={"d": d, "k": k},
        )
    )

    p_vec_k = build_standard(frame, "P_vector", k)
    # kernel of q -> (def q) x on P_k(R^d), assembled directly
    imgs = [poly.koszul_mat_x(poly.sym_grad(q)) for q in p_vec_k.members()]
    mk = poly.coeff_matrix(imgs, p_vec_k.k) if imgs else Matrix.zeros(0, 0)
    coords = mk.null_space()
    ker_defx = PolySpace(
        frame, "vector", p_vec_k.k, exact.image_basis(p_vec_k.basis.matmul(coords)), "ker_def_x"
    )
    rm = build_standard(frame, "RM", 0)
    out.append(
        CheckResult(
            "kernel-def-x-equals-rigid-motions",
            space_equal(ker_defx, rm),
            expected=dim_RM(d),
            got=ker_defx.dim,
            context={"d": d, "k": k},
        )
    )
    return out


def div_preimage_in(space: PolySpace, target: PolySpace, tag: str = "") -> PolySpace:
    """The subspace of `space` whose row-wise divergence lands in `target`.

    Requires div to be injective on `space` and target to lie inside its
    image (both hold for the complements of divergence-free bubbles); the
    preimage is found by an exact normal-equation solve and re-verified.
    """
    dm = operator_matrix("div_rowwise" if space.kind == "sym" else "div", space)
    m = dm.matrix
    tgt = target.with_degree(dm.target_k).basis
    if target.dim == 0 or space.dim == 0:
        return empty_space(space.frame, space.kind, space.k, tag)
    mt = m.transpose()
    coords = mt.matmul(m).solve(mt.matmul(tgt))
    if not m.matmul(coords) == tgt:
        raise ArithmeticError("divergence preimage fell outside the image")
    return PolySpace(
        space.frame, space.kind, space.k, exact.image_basis(space.basis.matmul(coords)), tag
    )


def bubble_enrichment_sym(frame: SimplexFrame, k: int) -> PolySpace:
    """Degree-(k+1) symmetric bubbles whose divergences extend div P_k(S).

    The slice of the complement bubble space whose divergence spans the
    L2-complement of the rigid-motion-orthogonal degree k-1 fields inside the
    degree-k ones; summing it onto P_k(S) raises the divergence range by one
    degree while keeping every trace.
    """
    _, e0perp = split_bubble(frame, "div_sym", k + 1)
    rm = build_standard(frame, "RM", 0)
    perp_k = orthocomplement_in(build_standard(frame, "P_vector", k), rm)
    perp_km1 = orthocomplement_in(build_standard(frame, "P_vector", k - 1), rm)
    extension = orthocomplement_in(perp_k, perp_km1.with_degree(k), f"div_extension_{k}")
    return div_preimage_in(e0perp, extension, f"bubble_enrichment_sym_{k + 1}")


def divdiv_splits(frame: SimplexFrame, k: int) -> tuple[PolySpace, PolySpace]:
    """Split E0perp(S) into the part with bubble divergence and a trace part."""
    if k < 3:
        raise BadDegreeError("divdiv splits need k >= 3")
    e0, e0perp = split_bubble(frame, "div_sym", k)
    bub_vec = bubble_space(frame, "div_vector", k - 1)
    rm = build_standard(frame, "RM", 0)
    b_rm = orthocomplement_in(bub_vec, rm, f"bubble_vec_perp_RM_{k - 1}")
    f0 = div_preimage_in(e0perp, b_rm, f"F0_sym_{k}")
    ftr = orthocomplement_in(e0perp, f0, f"Ftr_sym_{k}")
    return f0, ftr
