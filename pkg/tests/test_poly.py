import random
from fractions import Fraction

import pytest

from femforge import poly
from femforge.poly import (
    Polynomial,
    ShapeMismatchError,
    coeff_matrix,
    coeff_vector,
    div,
    div_rowwise,
    divdiv,
    dot,
    frame,
    from_coeff_vector,
    grad,
    hess,
    homogeneous_component,
    koszul_dot_x,
    koszul_mat_x,
    koszul_xxT,
    monomials,
    multiply,
    partial,
    poly_from_json,
    poly_to_json,
    skw_grad,
    substitute_affine,
    sym_grad,
)


def x(d, i):
    return Polynomial.coordinate(d, i)


def random_homogeneous(rng, d, r, kind="scalar"):
    terms = {}
    for c in range(poly.ncomp(kind, d)):
        for exps in monomials(d, r):
            if sum(exps) == r:
                terms[(c, exps)] = Fraction(rng.randint(-9, 9))
    p = Polynomial(d, kind, terms)
    return p if not p.is_zero() else Polynomial.monomial(d, kind, 0, (r,) + (0,) * (d - 1))


def test_eval_product():
    d = 2
    p = multiply(x(d, 0) + x(d, 1), x(d, 0))
    assert p.evaluate((1, 2)) == 3


def test_additive_inverse():
    d = 3
    p = multiply(x(d, 0), x(d, 2)) + x(d, 1)
    assert (p + (-p)).is_zero()


def test_barycentric_product_at_barycenter():
    # lambda0 = 1 - x1 - x2 and lambda1 = x1 on the reference triangle
    d = 2
    lam0 = Polynomial.constant(d, 1) - x(d, 0) - x(d, 1)
    lam1 = x(d, 0)
    val = multiply(lam0, lam1).evaluate((Fraction(1, 3), Fraction(1, 3)))
    assert val == Fraction(1, 9)


def test_grad_example():
    d = 2
    p = multiply(multiply(x(d, 0), x(d, 0)), x(d, 1))
    g = grad(p)
    assert g.component(0) == multiply(x(d, 0), x(d, 1)).scale(2)
    assert g.component(1) == multiply(x(d, 0), x(d, 0))


def test_div_x_times_q():
    # div(x q) = (r + d) q for homogeneous q of degree r; here d=3, q = x1 x2
    d = 3
    q = multiply(x(d, 0), x(d, 1))
    v = Polynomial.vector_from([multiply(x(d, i), q) for i in range(d)])
    assert div(v) == q.scale(5)


def test_divdiv_xxT_example():
    d = 2
    q = x(d, 0)
    assert divdiv(koszul_xxT(q)) == q.scale(12)


def test_koszul_dot_x_euler():
    d = 2
    q = multiply(multiply(x(d, 0), x(d, 0)), x(d, 0))
    assert koszul_dot_x(grad(q)) == q.scale(3)


def test_koszul_mat_x_zero():
    d = 3
    assert koszul_mat_x(Polynomial.zero(d, "sym")).is_zero()


def test_koszul_xxT_unrolled():
    d = 2
    m = koszul_xxT(Polynomial.constant(d, 1))
    assert m.entry(0, 0) == multiply(x(d, 0), x(d, 0))
    assert m.entry(0, 1) == multiply(x(d, 0), x(d, 1))
    assert m.entry(1, 0) == multiply(x(d, 0), x(d, 1))
    assert m.entry(1, 1) == multiply(x(d, 1), x(d, 1))


def test_homogeneous_component():
    d = 2
    p = Polynomial.constant(d, 1) + x(d, 0) + multiply(x(d, 0), x(d, 1))
    assert homogeneous_component(p, 2) == multiply(x(d, 0), x(d, 1))
    assert homogeneous_component(p, 5).is_zero()
    sq = multiply(Polynomial.constant(d, 1) + x(d, 0), Polynomial.constant(d, 1) + x(d, 0))
    assert homogeneous_component(sq, 1) == x(d, 0).scale(2)
    total = sum(
        (homogeneous_component(p, r) for r in range(p.degree() + 1)), Polynomial.zero(d)
    )
    assert total == p


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("r", [0, 1, 3, 6])
def test_euler_identity_grad(d, r):
    rng = random.Random(d * 10 + r)
    q = random_homogeneous(rng, d, r)
    assert koszul_dot_x(grad(q)) == q.scale(r)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("r", [0, 2, 5])
def test_euler_identity_div(d, r):
    rng = random.Random(d * 100 + r)
    q = random_homogeneous(rng, d, r)
    v = Polynomial.vector_from([multiply(x(d, i), q) for i in range(d)])
    assert div(v) == q.scale(r + d)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("r", [0, 1, 4])
def test_divdiv_eigenvalue(d, r):
    rng = random.Random(d * 1000 + r)
    q = random_homogeneous(rng, d, r)
    out = divdiv(koszul_xxT(q))
    assert out == q.scale((r + 1 + d) * (r + d))
    # degree preservation into the same homogeneous slice
    assert homogeneous_component(out, r) == out


@pytest.mark.parametrize("d", [2, 3])
def test_sym_skw_split_of_gradient(d):
    rng = random.Random(77 + d)
    v = random_homogeneous(rng, d, 3, kind="vector")
    s = sym_grad(v)
    w = skw_grad(v)
    for i in range(d):
        for j in range(d):
            dji = partial(v.component(i), j)
            assert s.entry(i, j) + w.entry(i, j) == dji
            assert s.entry(i, j) == (partial(v.component(i), j) + partial(v.component(j), i)).scale(
                Fraction(1, 2)
            )


def test_hess_is_sym_grad_of_grad():
    d = 3
    rng = random.Random(5)
    p = random_homogeneous(rng, d, 4)
    assert hess(p) == sym_grad(grad(p))


def test_divdiv_equals_div_of_rowwise_div():
    d = 2
    rng = random.Random(9)
    tau = random_homogeneous(rng, d, 3, kind="sym")
    assert divdiv(tau) == div(div_rowwise(tau))


def test_shape_mismatch_errors():
    d = 2
    with pytest.raises(ShapeMismatchError):
        grad(Polynomial.zero(d, "vector"))
    with pytest.raises(ShapeMismatchError):
        div(Polynomial.zero(d, "scalar"))
    with pytest.raises(ShapeMismatchError):
        multiply(Polynomial.zero(d, "vector"), Polynomial.zero(d, "sym"))
    with pytest.raises(ShapeMismatchError):
        x(2, 0) + x(3, 0)


def test_skw_entries_mirror():
    d = 3
    w = Polynomial.monomial(d, "skw", 0, (0, 0, 0))  # entry (0,1)
    assert w.entry(0, 1) == Polynomial.constant(d, 1)
    assert w.entry(1, 0) == Polynomial.constant(d, -1)
    assert w.entry(2, 2).is_zero()


def test_frobenius_pairing_weights():
    d = 2
    a = Polynomial.constant_sym(d, [[1, 2], [2, 3]])
    b = Polynomial.constant_sym(d, [[5, 7], [7, 11]])
    # full Frobenius product: 1*5 + 2*2*7 + 3*11 = 66
    assert dot(a, b) == Polynomial.constant(d, 66)


def test_substitute_affine_on_edge():
    # x restricted to the segment (1,0)-(0,1): x1 -> 1 - s, x2 -> s
    d = 2
    p = x(d, 0)
    q = substitute_affine(p, (1, 0), [[-1], [1]])
    s = Polynomial.coordinate(1, 0)
    assert q == Polynomial.constant(1, 1) - s


def test_frame_prefix_property():
    fr2 = frame("vector", 2, 2)
    fr4 = frame("vector", 2, 4)
    assert fr4[: len(fr2)] == fr2


def test_coeff_vector_roundtrip():
    d = 3
    rng = random.Random(31)
    p = random_homogeneous(rng, d, 2, kind="sym") + random_homogeneous(rng, d, 0, kind="sym")
    vec = coeff_vector(p, 4)
    assert from_coeff_vector(d, "sym", 4, vec) == p
    m = coeff_matrix([p, p.scale(3)], 4)
    assert m.cols == 2 and m.rank() == 1


def test_json_roundtrip():
    d = 2
    rng = random.Random(13)
    p = random_homogeneous(rng, d, 3, kind="skw")
    assert poly_from_json(poly_to_json(p)) == p


def test_evaluate_full_matrix_shapes():
    d = 2
    m = koszul_xxT(Polynomial.constant(d, 1))
    val = m.evaluate((2, 3))
    assert val == ((4, 6), (6, 9))
    w = Polynomial.monomial(d, "skw", 0, (0, 0))
    assert w.evaluate((0, 0)) == ((0, 1), (-1, 0))
