"""Exact integration of shaped polynomials over a simplex and its faces.

Volume integrals map the simplex affinely onto the reference simplex and use
the factorial formula for reference monomials,

    int_{ref^m} s^beta ds = beta! / (|beta| + m)!.

Face integrals use the face's canonical chart with its intrinsic Lebesgue
measure; the (generally irrational) metric area factor is intentionally not
applied.  Every face functional built on top of this is therefore a fixed
positive multiple of its unit-normal counterpart, which leaves all rank,
unisolvence and single-valuedness statements untouched, and the canonical
chart guarantees the multiple agrees from both sides of a shared face.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .exact import Matrix
from .poly import Polynomial, dot, multiply
from .simplex import Face, SimplexFrame

_ZERO = Fraction(0)
_ONE = Fraction(1)


@lru_cache(maxsize=None)
def reference_monomial_integral(exps: tuple[int, ...]) -> Fraction:
    """Integral of s^exps over the reference simplex of dimension len(exps)."""
    m = len(exps)
    num = 1
    for e in exps:
        num *= factorial(e)
    return Fraction(num, factorial(sum(exps) + m))


def _affine_to_reference(frame: SimplexFrame) -> list[Polynomial]:
    """The coordinate polynomials of x = x_0 + sum_j s_j (x_j - x_0)."""
    d = frame.d
    out = []
    for t in range(d):
        terms = {}
        if frame.vertices[0][t]:
            terms[(0, (0,) * d)] = frame.vertices[0][t]
        for j in range(1, d + 1):
            c = frame.vertices[j][t] - frame.vertices[0][t]
            if c:
                e = [0] * d
                e[j - 1] = 1
                terms[(0, tuple(e))] = c
        out.append(Polynomial(d, "scalar", terms))
    return out


def _monomial_integral(frame: SimplexFrame, exps: tuple[int, ...]) -> Fraction:
    got = frame._mono_integrals.get(exps)
    if got is not None:
        return got
    subst = frame._subst_cache
    affine = subst.get("affine")
    if affine is None:
        affine = _affine_to_reference(frame)
        subst["affine"] = affine

    def composed(e: tuple[int, ...]) -> Polynomial:
        p = subst.get(e)
        if p is None:
            if sum(e) == 0:
                p = Polynomial.constant(frame.d, 1)
            else:
                t = next(i for i, v in enumerate(e) if v)
                prev = list(e)
                prev[t] -= 1
                p = multiply(composed(tuple(prev)), affine[t])
            subst[e] = p
        return p

    total = sum(
        (v * reference_monomial_integral(b) for (_, b), v in composed(exps).terms.items()),
        _ZERO,
    )
    got = frame.jac_factor * total
    frame._mono_integrals[exps] = got
    return got


def integrate_simplex(frame: SimplexFrame, p: Polynomial) -> Fraction:
    """Exact integral of a scalar polynomial over the simplex."""
    if p.kind != "scalar":
        raise ValueError("integrate_simplex needs a scalar integrand")
    return sum((v * _monomial_integral(frame, exps) for (_, exps), v in p.terms.items()), _ZERO)


def integrate_face(face: Face, p: Polynomial) -> Fraction:
    """Integral over the face's canonical chart (intrinsic chart measure)."""
    if p.kind != "scalar":
        raise ValueError("integrate_face needs a scalar integrand")
    return sum((v * reference_monomial_integral(exps) for (_, exps), v in p.terms.items()), _ZERO)


def integrate_barycentric(frame: SimplexFrame, alpha: Sequence[int]) -> Fraction:
    """Closed form for int_K lambda^alpha: alpha! d! / (|alpha| + d)! |K|.

    Kept as an independent oracle against the Cartesian substitution route.
    """
    if len(alpha) != frame.d + 1:
        raise ValueError("alpha indexes the d+1 barycentric coordinates")
    num = 1
    for a in alpha:
        num *= factorial(a)
    return Fraction(num * factorial(frame.d), factorial(sum(alpha) + frame.d)) * frame.volume


def pair_simplex(frame: SimplexFrame, p: Polynomial, q: Polynomial) -> Fraction:
    """L2 pairing over K: product / dot / Frobenius per shape."""
    if p.kind != q.kind or p.d != q.d or p.vdim != q.vdim:
        return integrate_simplex(frame, dot(p, q))  # let dot raise the shape error
    from .poly import frobenius_weight

    by_comp: dict = {}
    for (c, eb), vb in q.terms.items():
        by_comp.setdefault(c, []).append((eb, vb))
    total = _ZERO
    for (c, ea), va in p.terms.items():
        lst = by_comp.get(c)
        if not lst:
            continue
        w = frobenius_weight(p.kind, p.vdim, c)
        acc = _ZERO
        for eb, vb in lst:
            acc += vb * _monomial_integral(frame, tuple(a + b for a, b in zip(ea, eb)))
        total += w * va * acc
    return total


def pair_face(face: Face, p: Polynomial, q: Polynomial) -> Fraction:
    """Chart-measure pairing over a face for chart-variable polynomials."""
    return integrate_face(face, dot(p, q))


def gram_matrix(frame: SimplexFrame, polys) -> Matrix:
    """Exact symmetric positive-definite Gram matrix of a basis (a list of
    polynomials or any space exposing members())."""
    if hasattr(polys, "members"):
        polys = polys.members()
    polys = list(polys)
    n = len(polys)
    rows = [[_ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            val = pair_simplex(frame, polys[i], polys[j])
            rows[i][j] = val
            rows[j][i] = val
    return Matrix(rows)
