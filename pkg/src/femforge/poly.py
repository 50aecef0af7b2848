"""Multivariate polynomials with rational coefficients and shaped values.

A polynomial lives in Cartesian coordinates ``x = (x_1, ..., x_d)`` and takes
values of one of five shapes: scalar, d-vector, symmetric d x d matrix,
skew-symmetric d x d matrix, or full d x d matrix.  Symmetric and skew parts
are stored once (upper triangle) and mirrored on read; zero coefficients are
never stored.

Terms are keyed by ``(component, exponents)`` where ``component`` indexes the
stored components of the shape and ``exponents`` is a length-d multi-index.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exact import Matrix

_ZERO = Fraction(0)
_ONE = Fraction(1)

SHAPES = ("scalar", "vector", "sym", "skw", "matrix")


class ShapeMismatchError(TypeError):
    """Raised when an operation receives a polynomial of the wrong shape."""


# -- shape bookkeeping ---------------------------------------------------------


@lru_cache(maxsize=None)
def sym_pairs(d: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(d) for j in range(i, d))


@lru_cache(maxsize=None)
def skw_pairs(d: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(d) for j in range(i + 1, d))


def ncomp(kind: str, d: int) -> int:
    if kind == "scalar":
        return 1
    if kind == "vector":
        return d
    if kind == "sym":
        return d * (d + 1) // 2
    if kind == "skw":
        return d * (d - 1) // 2
    if kind == "matrix":
        return d * d
    raise ShapeMismatchError(f"unknown shape kind {kind!r}")


def frobenius_weight(kind: str, d: int, comp: int) -> int:
    """Multiplicity of a stored component in the full Frobenius pairing."""
    if kind == "sym":
        i, j = sym_pairs(d)[comp]
        return 1 if i == j else 2
    if kind == "skw":
        return 2
    return 1


@lru_cache(maxsize=None)
def _pair_index(kind: str, d: int) -> dict[tuple[int, int], int]:
    pairs = sym_pairs(d) if kind == "sym" else skw_pairs(d)
    return {p: c for c, p in enumerate(pairs)}


def entry_comp(kind: str, d: int, i: int, j: int) -> tuple[int, int]:
    """(stored component, sign) for matrix entry (i, j)."""
    if kind == "matrix":
        return i * d + j, 1
    if kind == "sym":
        a, b = (i, j) if i <= j else (j, i)
        return _pair_index("sym", d)[(a, b)], 1
    if kind == "skw":
        if i == j:
            return -1, 0
        a, b = (i, j) if i < j else (j, i)
        sign = 1 if i < j else -1
        return _pair_index("skw", d)[(a, b)], sign
    raise ShapeMismatchError(f"shape {kind!r} has no (i,j) entries")


class Polynomial:
    """A shaped polynomial in ``d`` variables.

    ``vdim`` is the dimension of the value space (defaults to ``d``); it only
    differs from ``d`` for fields restricted to a face chart, which keep their
    ambient value components while depending on chart variables.
    """

    __slots__ = ("d", "kind", "terms", "vdim")

    def __init__(self, d: int, kind: str, terms: dict | None = None, vdim: int | None = None):
        if kind not in SHAPES:
            raise ShapeMismatchError(f"unknown shape kind {kind!r}")
        self.d = d
        self.vdim = d if (vdim is None or kind == "scalar") else vdim
        self.kind = kind
        clean = {}
        if terms:
            for key, c in terms.items():
                if c:
                    clean[key] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms = clean

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, d: int, kind: str = "scalar", vdim: int | None = None) -> "Polynomial":
        return cls(d, kind, vdim=vdim)

    @classmethod
    def constant(cls, d: int, value) -> "Polynomial":
        return cls(d, "scalar", {(0, (0,) * d): Fraction(value)})

    @classmethod
    def coordinate(cls, d: int, i: int) -> "Polynomial":
        exps = [0] * d
        exps[i] = 1
        return cls(d, "scalar", {(0, tuple(exps)): _ONE})

    @classmethod
    def monomial(cls, d: int, kind: str, comp: int, exps: Sequence[int], coeff=1) -> "Polynomial":
        return cls(d, kind, {(comp, tuple(exps)): Fraction(coeff)})

    @classmethod
    def from_components(
        cls, d: int, kind: str, comps: Sequence["Polynomial"], vdim: int | None = None
    ) -> "Polynomial":
        vdim = d if vdim is None else vdim
        if len(comps) != ncomp(kind, vdim):
            raise ShapeMismatchError("component count mismatch")
        terms = {}
        for c, p in enumerate(comps):
            if p.kind != "scalar":
                raise ShapeMismatchError("components must be scalar")
            for (_, exps), v in p.terms.items():
                terms[(c, exps)] = v
        return cls(d, kind, terms, vdim=vdim)

    @classmethod
    def vector_from(cls, comps: Sequence["Polynomial"], vdim: int | None = None) -> "Polynomial":
        return cls.from_components(comps[0].d, "vector", comps, vdim=vdim or len(comps))

    @classmethod
    def constant_vector(cls, d: int, vec: Sequence, vdim: int | None = None) -> "Polynomial":
        z = (0,) * d
        return cls(d, "vector", {(i, z): Fraction(v) for i, v in enumerate(vec)}, vdim=vdim or len(vec))

    @classmethod
    def constant_sym(cls, d: int, mat: Sequence[Sequence]) -> "Polynomial":
        z = (0,) * d
        terms = {}
        for c, (i, j) in enumerate(sym_pairs(d)):
            terms[(c, z)] = Fraction(mat[i][j])
        return cls(d, "sym", terms)

    # -- basic protocol ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree (max over components); -1 for the zero polynomial."""
        return max((sum(e) for _, e in self.terms), default=-1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.d == other.d
            and self.vdim == other.vdim
            and self.kind == other.kind
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.d, self.vdim, self.kind, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial(d={self.d}, {self.kind}, {len(self.terms)} terms)"

    def _require(self, other: "Polynomial") -> None:
        if not isinstance(other, Polynomial):
            raise ShapeMismatchError("expected a Polynomial")
        if self.d != other.d or self.kind != other.kind or self.vdim != other.vdim:
            raise ShapeMismatchError(f"shape mismatch: {self.kind}/d={self.d} vs {other.kind}/d={other.d}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._require(other)
        terms = dict(self.terms)
        for key, v in other.terms.items():
            terms[key] = terms.get(key, _ZERO) + v
        return Polynomial(self.d, self.kind, terms, vdim=self.vdim)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.d, self.kind, {k: -v for k, v in self.terms.items()}, vdim=self.vdim)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial(self.d, self.kind, vdim=self.vdim)
        return Polynomial(self.d, self.kind, {k: c * v for k, v in self.terms.items()}, vdim=self.vdim)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    # -- component access --------------------------------------------------------

    def component(self, c: int) -> "Polynomial":
        return Polynomial(
            self.d, "scalar", {(0, exps): v for (cc, exps), v in self.terms.items() if cc == c}
        )

    def entry(self, i: int, j: int) -> "Polynomial":
        """Scalar (i, j) entry of a matrix-shaped polynomial, mirrors applied."""
        if self.kind not in ("sym", "skw", "matrix"):
            raise ShapeMismatchError("entry() needs a matrix shape")
        c, sign = entry_comp(self.kind, self.vdim, i, j)
        if sign == 0:
            return Polynomial(self.d, "scalar")
        p = self.component(c)
        return p if sign == 1 else -p

    def evaluate(self, point: Sequence):
        pt = [Fraction(x) for x in point]
        vals = [_ZERO] * ncomp(self.kind, self.vdim)
        for (c, exps), coeff in self.terms.items():
            term = coeff
            for x, e in zip(pt, exps):
                if e:
                    term *= x**e
            vals[c] += term
        if self.kind == "scalar":
            return vals[0]
        if self.kind == "vector":
            return tuple(vals)
        n = self.vdim
        full = [[_ZERO] * n for _ in range(n)]
        if self.kind == "matrix":
            for c, v in enumerate(vals):
                full[c // n][c % n] = v
        elif self.kind == "sym":
            for c, (i, j) in enumerate(sym_pairs(n)):
                full[i][j] = v = vals[c]
                full[j][i] = v
        else:
            for c, (i, j) in enumerate(skw_pairs(n)):
                full[i][j] = vals[c]
                full[j][i] = -vals[c]
        return tuple(tuple(row) for row in full)


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product where at least one factor is scalar-shaped."""
    if a.kind != "scalar" and b.kind != "scalar":
        raise ShapeMismatchError("multiply supports scalar x shaped only")
    if a.kind != "scalar":
        a, b = b, a
    if a.d != b.d:
        raise ShapeMismatchError("dimension mismatch")
    terms: dict = {}
    for (_, ea), va in a.terms.items():
        for (c, eb), vb in b.terms.items():
            key = (c, tuple(x + y for x, y in zip(ea, eb)))
            acc = terms.get(key)
            terms[key] = va * vb if acc is None else acc + va * vb
    return Polynomial(b.d, b.kind, terms, vdim=b.vdim)


def dot(a: Polynomial, b: Polynomial) -> Polynomial:
    """Pointwise pairing: product, dot product or Frobenius product."""
    if a.d != b.d or a.kind != b.kind or a.vdim != b.vdim:
        raise ShapeMismatchError(f"pairing needs equal shapes, got {a.kind} vs {b.kind}")
    d = a.d
    terms: dict = {}
    weights = [frobenius_weight(a.kind, a.vdim, c) for c in range(ncomp(a.kind, a.vdim))]
    for (c, ea), va in a.terms.items():
        w = weights[c]
        for (cb, eb), vb in b.terms.items():
            if cb != c:
                continue
            key = (0, tuple(x + y for x, y in zip(ea, eb)))
            acc = terms.get(key)
            v = va * vb * w
            terms[key] = v if acc is None else acc + v
    return Polynomial(d, "scalar", terms)


# -- calculus -------------------------------------------------------------------


def _partial_terms(terms: dict, var: int) -> dict:
    out: dict = {}
    for (c, exps), v in terms.items():
        e = exps[var]
        if e:
            new = list(exps)
            new[var] = e - 1
            key = (c, tuple(new))
            acc = out.get(key)
            w = v * e
            out[key] = w if acc is None else acc + w
    return out


def partial(p: Polynomial, var: int) -> Polynomial:
    """Componentwise partial derivative."""
    return Polynomial(p.d, p.kind, _partial_terms(p.terms, var), vdim=p.vdim)


def _require_ambient(p: Polynomial, what: str) -> None:
    if p.vdim != p.d:
        raise ShapeMismatchError(f"{what} applies to ambient fields, not chart restrictions")


def grad(p: Polynomial) -> Polynomial:
    if p.kind != "scalar":
        raise ShapeMismatchError("grad needs a scalar")
    return Polynomial.vector_from([partial(p, i) for i in range(p.d)])


def div(v: Polynomial) -> Polynomial:
    if v.kind != "vector":
        raise ShapeMismatchError("div needs a vector")
    _require_ambient(v, "div")
    out = Polynomial(v.d, "scalar")
    for i in range(v.d):
        out = out + partial(v.component(i), i)
    return out


def div_rowwise(tau: Polynomial) -> Polynomial:
    """Row-wise divergence of a matrix field: (div tau)_i = sum_j d_j tau_ij."""
    if tau.kind not in ("sym", "skw", "matrix"):
        raise ShapeMismatchError("div_rowwise needs a matrix shape")
    _require_ambient(tau, "div_rowwise")
    comps = []
    for i in range(tau.d):
        acc = Polynomial(tau.d, "scalar")
        for j in range(tau.d):
            acc = acc + partial(tau.entry(i, j), j)
        comps.append(acc)
    return Polynomial.vector_from(comps)


def sym_grad(v: Polynomial) -> Polynomial:
    """Symmetric gradient (deformation): (grad v + grad v^T) / 2."""
    if v.kind != "vector":
        raise ShapeMismatchError("sym_grad needs a vector")
    _require_ambient(v, "sym_grad")
    d = v.d
    terms = {}
    for c, (i, j) in enumerate(sym_pairs(d)):
        pij = partial(v.component(i), j) + partial(v.component(j), i)
        for (_, exps), val in pij.terms.items():
            terms[(c, exps)] = val / 2
    return Polynomial(d, "sym", terms)


def skw_grad(v: Polynomial) -> Polynomial:
    """Skew part of the gradient: entries (d_j v_i - d_i v_j) / 2."""
    if v.kind != "vector":
        raise ShapeMismatchError("skw_grad needs a vector")
    _require_ambient(v, "skw_grad")
    d = v.d
    terms = {}
    for c, (i, j) in enumerate(skw_pairs(d)):
        pij = partial(v.component(i), j) - partial(v.component(j), i)
        for (_, exps), val in pij.terms.items():
            terms[(c, exps)] = val / 2
    return Polynomial(d, "skw", terms)


def hess(p: Polynomial) -> Polynomial:
    if p.kind != "scalar":
        raise ShapeMismatchError("hess needs a scalar")
    d = p.d
    terms = {}
    for c, (i, j) in enumerate(sym_pairs(d)):
        pij = partial(partial(p, i), j)
        for (_, exps), val in pij.terms.items():
            terms[(c, exps)] = val
    return Polynomial(d, "sym", terms)


def divdiv(tau: Polynomial) -> Polynomial:
    if tau.kind not in ("sym", "matrix"):
        raise ShapeMismatchError("divdiv needs a (symmetric) matrix")
    return div(div_rowwise(tau))


# -- Koszul-type multiplication operators -----------------------------------------


def koszul_dot_x(v: Polynomial) -> Polynomial:
    """v . x for a vector field v."""
    if v.kind != "vector":
        raise ShapeMismatchError("koszul_dot_x needs a vector")
    _require_ambient(v, "koszul_dot_x")
    terms: dict = {}
    for (c, exps), val in v.terms.items():
        new = list(exps)
        new[c] += 1
        key = (0, tuple(new))
        acc = terms.get(key)
        terms[key] = val if acc is None else acc + val
    return Polynomial(v.d, "scalar", terms)


def koszul_mat_x(tau: Polynomial) -> Polynomial:
    """tau x: row-wise dot with the position vector."""
    if tau.kind not in ("sym", "skw", "matrix"):
        raise ShapeMismatchError("koszul_mat_x needs a matrix shape")
    _require_ambient(tau, "koszul_mat_x")
    comps = []
    for i in range(tau.d):
        acc = Polynomial(tau.d, "scalar")
        for j in range(tau.d):
            acc = acc + multiply(Polynomial.coordinate(tau.d, j), tau.entry(i, j))
        comps.append(acc)
    return Polynomial.vector_from(comps)


def koszul_xxT(q: Polynomial) -> Polynomial:
    """x x^T q for a scalar q (symmetric matrix valued)."""
    if q.kind != "scalar":
        raise ShapeMismatchError("koszul_xxT needs a scalar")
    d = q.d
    terms = {}
    for c, (i, j) in enumerate(sym_pairs(d)):
        for (_, exps), val in q.terms.items():
            new = list(exps)
            new[i] += 1
            new[j] += 1
            key = (c, tuple(new))
            acc = terms.get(key)
            terms[key] = val if acc is None else acc + val
    return Polynomial(d, "sym", terms)


def homogeneous_component(p: Polynomial, r: int) -> Polynomial:
    if r < 0:
        raise ValueError("degree selector must be non-negative")
    return Polynomial(p.d, p.kind, {k: v for k, v in p.terms.items() if sum(k[1]) == r}, vdim=p.vdim)


def substitute_affine(p: Polynomial, const: Sequence, lin: Sequence[Sequence]) -> Polynomial:
    """Substitute x_t = const[t] + sum_m lin[t][m] s_m; result lives in len(s) vars.

    Shape is preserved; the value components are untouched by the substitution.
    """
    m = len(lin[0]) if p.d else 0
    const = [Fraction(c) for c in const]
    lin = [[Fraction(x) for x in row] for row in lin]
    affine = []
    for t in range(p.d):
        terms = {}
        if const[t]:
            terms[(0, (0,) * m)] = const[t]
        for mm in range(m):
            if lin[t][mm]:
                e = [0] * m
                e[mm] = 1
                terms[(0, tuple(e))] = lin[t][mm]
        affine.append(Polynomial(m, "scalar", terms))

    power_cache: dict[tuple[int, int], Polynomial] = {}

    def power(t: int, e: int) -> Polynomial:
        key = (t, e)
        got = power_cache.get(key)
        if got is None:
            got = Polynomial.constant(m, 1) if e == 0 else multiply(power(t, e - 1), affine[t])
            power_cache[key] = got
        return got

    out_terms: dict = {}
    for (c, exps), val in p.terms.items():
        prod = Polynomial.constant(m, val)
        for t, e in enumerate(exps):
            if e:
                prod = multiply(prod, power(t, e))
        for (_, se), sv in prod.terms.items():
            key = (c, se)
            acc = out_terms.get(key)
            out_terms[key] = sv if acc is None else acc + sv
    return Polynomial(m, p.kind, out_terms, vdim=p.vdim)


# -- monomial frames ---------------------------------------------------------------
#
# The frame for (kind, d, k) is the ordered list of (component, exponents) pairs
# with |exponents| <= k, sorted by (degree, exponents, component).  Degree-major
# ordering makes the degree <= k frame a prefix of every higher-degree frame.


@lru_cache(maxsize=None)
def monomials(d: int, k: int) -> tuple[tuple[int, ...], ...]:
    if k < 0:
        return ()

    def gen(dim, total):
        if dim == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in gen(dim - 1, total - first):
                yield (first,) + rest

    out = []
    for deg in range(k + 1):
        out.extend(sorted(gen(d, deg)))
    return tuple(out)


@lru_cache(maxsize=None)
def frame(kind: str, d: int, k: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    nc = ncomp(kind, d)
    return tuple((c, exps) for exps in monomials(d, k) for c in range(nc))


@lru_cache(maxsize=None)
def _frame_index(kind: str, d: int, k: int) -> dict:
    return {key: i for i, key in enumerate(frame(kind, d, k))}


def coeff_vector(p: Polynomial, k: int) -> list[Fraction]:
    if p.vdim != p.d:
        raise ShapeMismatchError("coefficient frames are for ambient-valued polynomials")
    idx = _frame_index(p.kind, p.d, k)
    vec = [_ZERO] * len(idx)
    for (c, exps), v in p.terms.items():
        pos = idx.get((c, exps))
        if pos is None:
            raise ValueError(f"polynomial degree exceeds frame degree {k}")
        vec[pos] = v
    return vec


def from_coeff_vector(d: int, kind: str, k: int, vec: Sequence) -> Polynomial:
    fr = frame(kind, d, k)
    if len(vec) != len(fr):
        raise ValueError("coefficient vector length mismatch")
    return Polynomial(d, kind, {(c, exps): Fraction(v) for (c, exps), v in zip(fr, vec) if v})


def coeff_matrix(polys: Iterable[Polynomial], k: int) -> Matrix:
    polys = list(polys)
    if not polys:
        raise ValueError("need at least one polynomial to infer the frame")
    cols = [coeff_vector(p, k) for p in polys]
    return Matrix.from_columns(cols, rows=len(cols[0]))


# -- serialization ------------------------------------------------------------------


def poly_to_json(p: Polynomial) -> dict:
    terms = [
        {"exponents": list(exps), "component": c, "num": str(v.numerator), "den": str(v.denominator)}
        for (c, exps), v in sorted(p.terms.items())
    ]
    return {"shape": p.kind, "d": p.d, "terms": terms}


def poly_from_json(data: dict) -> Polynomial:
    terms = {}
    for t in data["terms"]:
        key = (int(t["component"]), tuple(int(e) for e in t["exponents"]))
        terms[key] = Fraction(int(t["num"]), int(t["den"]))
    return Polynomial(int(data["d"]), data["shape"], terms)
