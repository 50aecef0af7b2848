"""Rational simplex geometry: barycentric frames, faces, charts, tensor bases.

All normal directions are represented by the scaled outward normals
``g_i = -grad(lambda_i)`` instead of unit vectors, which keeps every quantity
rational.  Face charts are canonical: the chart origin is the face vertex of
lowest index and the tangent frame lists edges to the remaining vertices in
ascending index order, so two simplices sharing a face derive bit-identical
charts when they enumerate the shared vertices in the same order.
"""

from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from typing import Sequence

from .exact import Matrix, SingularMatrixError
from .poly import Polynomial, partial, substitute_affine

_ZERO = Fraction(0)
_ONE = Fraction(1)


class DegenerateSimplexError(ValueError):
    """Raised when the given vertices do not span a d-simplex."""


class WrongCodimensionError(ValueError):
    """Raised when a face operation requires a different codimension."""


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), _ZERO)


class Face:
    """A codimension-r face of a simplex with its frames and canonical chart."""

    __slots__ = (
        "frame",
        "codim",
        "vertex_ids",
        "opposite_ids",
        "origin",
        "tangents",
        "normal_frame",
        "gram",
        "gram_inv",
        "_mono_cache",
    )

    def __init__(self, frame: "SimplexFrame", vertex_ids: tuple[int, ...]):
        d = frame.d
        self.frame = frame
        self.vertex_ids = tuple(sorted(vertex_ids))
        self.opposite_ids = tuple(i for i in range(d + 1) if i not in self.vertex_ids)
        self.codim = len(self.opposite_ids)
        v0 = self.vertex_ids[0]
        self.origin = frame.vertices[v0]
        self.tangents = tuple(frame.tangent(v0, v) for v in self.vertex_ids[1:])
        self.normal_frame = tuple(frame.scaled_normals[i] for i in self.opposite_ids)
        m = len(self.tangents)
        gram = Matrix([[_dot(a, b) for b in self.tangents] for a in self.tangents])
        self.gram = gram
        self.gram_inv = gram.solve(Matrix.identity(m)) if m else None
        self._mono_cache: dict = {}

    @property
    def dim(self) -> int:
        return len(self.tangents)

    def chart_point(self, s: Sequence) -> tuple[Fraction, ...]:
        s = [Fraction(v) for v in s]
        return tuple(
            self.origin[t] + sum((sm * tan[t] for sm, tan in zip(s, self.tangents)), _ZERO)
            for t in range(self.frame.d)
        )

    def key(self) -> tuple:
        """Geometric identity: the face's vertex coordinates, sorted."""
        return tuple(sorted(self.frame.vertices[i] for i in self.vertex_ids))

    def _restrict_monomial(self, exps: tuple[int, ...]) -> Polynomial:
        got = self._mono_cache.get(exps)
        if got is None:
            mono = Polynomial(self.frame.d, "scalar", {(0, exps): _ONE})
            lin = [[tan[t] for tan in self.tangents] for t in range(self.frame.d)]
            got = substitute_affine(mono, self.origin, lin)
            self._mono_cache[exps] = got
        return got

    def restrict(self, p: Polynomial) -> Polynomial:
        """Pull p back through the chart: a polynomial in dim(F) variables.

        Value components stay ambient (vdim is preserved)."""
        out = Polynomial(self.dim, p.kind, vdim=p.vdim)
        for (c, exps), val in p.terms.items():
            mono = self._restrict_monomial(exps)
            add = Polynomial(
                self.dim, p.kind, {(c, e): val * v for (_, e), v in mono.terms.items()}, vdim=p.vdim
            )
            out = out + add
        return out


class SimplexFrame:
    """A non-degenerate rational d-simplex with its barycentric frame."""

    __slots__ = (
        "d",
        "vertices",
        "lambdas",
        "grad_lambda",
        "scaled_normals",
        "volume",
        "jac_factor",
        "tensor_T",
        "tensor_N",
        "_faces",
        "_space_cache",
        "_cache_lock",
        "_mono_integrals",
        "_subst_cache",
    )

    def __init__(self, vertices: Sequence[Sequence]):
        vertices = tuple(tuple(Fraction(x) for x in v) for v in vertices)
        d = len(vertices) - 1
        if d < 1 or any(len(v) != d for v in vertices):
            raise DegenerateSimplexError("need d+1 points in R^d")
        self.d = d
        self.vertices = vertices

        # barycentric coordinates by exact solve: lambda_i(x_j) = delta_ij
        vand = Matrix([(1,) + v for v in vertices])
        try:
            coeffs = vand.solve(Matrix.identity(d + 1))
        except SingularMatrixError:
            raise DegenerateSimplexError("vertices are affinely dependent") from None
        lambdas = []
        grads = []
        for i in range(d + 1):
            terms = {}
            if coeffs[0, i]:
                terms[(0, (0,) * d)] = coeffs[0, i]
            for t in range(d):
                if coeffs[t + 1, i]:
                    e = [0] * d
                    e[t] = 1
                    terms[(0, tuple(e))] = coeffs[t + 1, i]
            lambdas.append(Polynomial(d, "scalar", terms))
            grads.append(tuple(coeffs[t + 1, i] for t in range(d)))
        self.lambdas = tuple(lambdas)
        self.grad_lambda = tuple(grads)
        self.scaled_normals = tuple(tuple(-x for x in g) for g in grads)

        edge = Matrix([[vertices[j][t] - vertices[0][t] for j in range(1, d + 1)] for t in range(d)])
        det = edge.det()
        if not det:
            raise DegenerateSimplexError("zero volume")
        self.jac_factor = abs(det)  # d! * |K|
        fact = 1
        for i in range(2, d + 1):
            fact *= i
        self.volume = self.jac_factor / fact

        T = {}
        N = {}
        for i in range(d + 1):
            for j in range(i + 1, d + 1):
                t = self.tangent(i, j)
                gi = self.scaled_normals[i]
                gj = self.scaled_normals[j]
                T[(i, j)] = Polynomial.constant_sym(d, [[a * b for b in t] for a in t])
                denom = 2 * _dot(gi, t) * _dot(gj, t)
                N[(i, j)] = Polynomial.constant_sym(
                    d, [[(gi[a] * gj[b] + gj[a] * gi[b]) / denom for b in range(d)] for a in range(d)]
                )
        self.tensor_T = T
        self.tensor_N = N

        self._faces: dict[int, tuple[Face, ...]] = {}
        self._space_cache: dict = {}
        self._cache_lock = threading.Lock()
        self._mono_integrals: dict = {}
        self._subst_cache: dict = {}

    def tangent(self, i: int, j: int) -> tuple[Fraction, ...]:
        """Edge vector t_{i,j} = x_j - x_i."""
        return tuple(b - a for a, b in zip(self.vertices[i], self.vertices[j]))

    def faces(self, r: int) -> tuple[Face, ...]:
        if not 1 <= r <= self.d:
            raise WrongCodimensionError(f"codimension must be in [1, {self.d}]")
        got = self._faces.get(r)
        if got is None:
            ids = range(self.d + 1)
            got = tuple(
                Face(self, combo) for combo in itertools.combinations(ids, self.d + 1 - r)
            )
            self._faces[r] = got
        return got

    def face_opposite(self, i: int) -> Face:
        for f in self.faces(1):
            if f.opposite_ids == (i,):
                return f
        raise KeyError(i)


def build_frame(vertices: Sequence[Sequence]) -> SimplexFrame:
    return SimplexFrame(vertices)


def reference_simplex(d: int) -> SimplexFrame:
    verts = [[_ZERO] * d]
    for i in range(d):
        v = [_ZERO] * d
        v[i] = _ONE
        verts.append(v)
    return SimplexFrame(verts)


def random_frame(d: int, rng) -> SimplexFrame:
    """Random simplex with small integer vertices in [-3, 3]^d."""
    while True:
        verts = [[rng.randint(-3, 3) for _ in range(d)] for _ in range(d + 1)]
        try:
            return SimplexFrame(verts)
        except DegenerateSimplexError:
            continue


def enumerate_faces(frame: SimplexFrame, r: int) -> tuple[Face, ...]:
    return frame.faces(r)


def project_to_face(face: Face, v: Polynomial) -> Polynomial:
    """(I - g g^T / (g.g)) v for the codim-1 face normal g."""
    if face.codim != 1:
        raise WrongCodimensionError("projection needs a codim-1 face")
    if v.kind != "vector":
        raise ValueError("projection applies to vector fields")
    g = face.normal_frame[0]
    gg = _dot(g, g)
    gv = Polynomial(v.d, "scalar")
    for t in range(v.d):
        gv = gv + v.component(t).scale(g[t])
    comps = [v.component(t) - gv.scale(g[t] / gg) for t in range(v.d)]
    return Polynomial.vector_from(comps)


def restrict_to_face(face: Face, p: Polynomial) -> Polynomial:
    return face.restrict(p)


def surface_grad(face: Face, p: Polynomial) -> Polynomial:
    """Tangential gradient of an ambient scalar, as an ambient-valued field in
    chart variables: sum_mn Ginv[m][n] (d p_hat / d s_m) T_n."""
    if face.codim != 1:
        raise WrongCodimensionError("surface gradient needs a codim-1 face")
    if p.kind != "scalar":
        raise ValueError("surface_grad applies to scalars")
    ph = face.restrict(p)
    m = face.dim
    parts = [partial(ph, mm) for mm in range(m)]
    comps = []
    for t in range(p.d):
        acc = Polynomial(m, "scalar")
        for mm in range(m):
            coef = sum(
                (face.gram_inv[mm, nn] * face.tangents[nn][t] for nn in range(m)), _ZERO
            )
            if coef:
                acc = acc + parts[mm].scale(coef)
        comps.append(acc)
    return Polynomial.from_components(m, "vector", comps, vdim=p.d)


def surface_div(face: Face, w: Polynomial) -> Polynomial:
    """Surface divergence of an ambient vector field along a codim-1 face.

    Computed in the chart as sum_mn Ginv[m][n] (d w_hat / d s_m) . T_n; the
    normal component of w drops out automatically since T_n . g = 0.
    """
    if face.codim != 1:
        raise WrongCodimensionError("surface divergence needs a codim-1 face")
    if w.kind != "vector":
        raise ValueError("surface_div applies to vector fields")
    m = face.dim
    comps = [face.restrict(w.component(t)) for t in range(w.vdim)]
    out = Polynomial(m, "scalar")
    for mm in range(m):
        for nn in range(m):
            coef = face.gram_inv[mm, nn]
            if not coef:
                continue
            for t in range(w.vdim):
                tv = face.tangents[nn][t]
                if tv:
                    out = out + partial(comps[t], mm).scale(coef * tv)
    return out
