import random
from fractions import Fraction

import pytest

from femforge import exact, poly, spaces
from femforge.exact import Matrix
from femforge.poly import Polynomial
from femforge.report import all_passed
from femforge.simplex import random_frame, reference_simplex
from femforge.spaces import (
    BadDegreeError,
    UnsupportedTagError,
    bubble_space,
    bubble_sym_generators,
    build_standard,
    certify_decompositions,
    dim_ND,
    dim_P,
    dim_RM,
    dim_bubble_sym,
    dim_bubble_vector,
    dim_E0_sym,
    dim_E0_vector,
    dim_E0perp_sym,
    dim_E0perp_vector,
    dim_trace_sym,
    dim_trace_vector,
    divdiv_splits,
    image_space,
    ker_mat_x_sym,
    kernel_space,
    operator_matrix,
    orthocomplement_in,
    space_equal,
    space_is_direct_sum,
    space_sum,
    split_bubble,
    trace_matrix,
)


@pytest.fixture(scope="module")
def tri():
    return reference_simplex(2)


@pytest.fixture(scope="module")
def tet():
    return reference_simplex(3)


def test_standard_dims(tri, tet):
    assert build_standard(tri, "P_scalar", 3).dim == 10
    assert build_standard(tet, "RM", 0).dim == 6
    assert build_standard(tet, "ND", 1).dim == dim_ND(3, 1) == 20
    assert build_standard(tri, "H_scalar", 2).dim == 3
    rt = build_standard(tri, "RT_shape", 1)
    assert rt.dim == dim_P(2, 1) * 2 + 2  # P_1(R^2) + H_1 x
    assert build_standard(tri, "xxT_H", 1).dim == 2
    assert build_standard(tet, "P_sym", 2).dim == 60


def test_unknown_tag_and_bad_degree(tri):
    with pytest.raises(UnsupportedTagError):
        build_standard(tri, "nope", 1)
    with pytest.raises(BadDegreeError):
        build_standard(tri, "P_scalar", -1)


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 4), (3, 1), (3, 2), (3, 3)])
def test_bubble_vector_dims(d, k):
    fr = reference_simplex(d)
    assert bubble_space(fr, "div_vector", k).dim == dim_bubble_vector(d, k)


def test_bubble_vector_low_order_zero(tri):
    assert bubble_space(tri, "div_vector", 0).dim == 0
    assert bubble_space(tri, "div_vector", 1).dim == 0


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_bubble_sym_dims(d, k):
    fr = reference_simplex(d)
    assert bubble_space(fr, "div_sym", k).dim == dim_bubble_sym(d, k)


def test_bubble_d3_k2_is_six(tet):
    assert bubble_space(tet, "div_vector", 2).dim == 6


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2)])
def test_bubble_sym_generators_match_kernel(d, k):
    rng = random.Random(70 + 10 * d + k)
    for fr in (reference_simplex(d), random_frame(d, rng)):
        gen = bubble_sym_generators(fr, k)
        ker = bubble_space(fr, "div_sym", k)
        assert gen.dim == dim_bubble_sym(d, k)
        assert space_equal(gen, ker)


def test_generator_traces_vanish(tri):
    gen = bubble_sym_generators(tri, 2)
    tr = trace_matrix(tri, gen, "div_sym")
    assert tr.is_zero()


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_split_bubble_vector_dims(d, k):
    fr = reference_simplex(d)
    e0, e0perp = split_bubble(fr, "div_vector", k)
    assert e0.dim == dim_E0_vector(d, k)
    assert e0perp.dim == dim_E0perp_vector(d, k)
    assert e0.dim + e0perp.dim == dim_bubble_vector(d, k)


def test_split_bubble_vector_d2k2(tri):
    e0, _ = split_bubble(tri, "div_vector", 2)
    assert e0.dim == 2 * 3 - 6 + 1 == 1


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)])
def test_split_bubble_sym_dims(d, k):
    fr = reference_simplex(d)
    e0, e0perp = split_bubble(fr, "div_sym", k)
    assert e0.dim == dim_E0_sym(d, k)
    assert e0perp.dim == dim_E0perp_sym(d, k)


def test_e0_sym_k3_d2_trivial_and_k4_one(tri):
    assert dim_E0_sym(2, 3) == 0
    assert split_bubble(tri, "div_sym", 3)[0].dim == 0
    assert dim_E0_sym(2, 4) == 1
    assert split_bubble(tri, "div_sym", 4)[0].dim == 1


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_trace_rank_vector(d, k):
    fr = reference_simplex(d)
    tr = trace_matrix(fr, build_standard(fr, "P_vector", k), "div_vector")
    assert tr.rank() == dim_trace_vector(d, k)


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_trace_rank_sym(d, k):
    fr = reference_simplex(d)
    tr = trace_matrix(fr, build_standard(fr, "P_sym", k), "div_sym")
    assert tr.rank() == dim_trace_sym(d, k)


def test_trace_sym_d3_boundary_total():
    for k in (2, 3):
        assert dim_trace_sym(3, k) == 6 * (k + 1) ** 2


def test_rt_trace_rank(tri, tet):
    assert trace_matrix(tri, build_standard(tri, "RT_shape", 0), "div_vector").rank() == 3
    assert trace_matrix(tet, build_standard(tet, "RT_shape", 0), "div_vector").rank() == 4
    # for k >= 1 the enrichment does not add trace content
    assert (
        trace_matrix(tri, build_standard(tri, "RT_shape", 2), "div_vector").rank()
        == dim_trace_vector(2, 2)
    )


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_rt_kernel_stability(d, k):
    # the div kernel inside the enriched bubble equals E0 of the plain space
    fr = reference_simplex(d)
    rt_bubble = bubble_space(fr, "div_RT_minus", k)
    assert rt_bubble.dim == spaces.dim_bubble_rt(d, k)
    ker = kernel_space("div", rt_bubble, "ker")
    e0, _ = split_bubble(fr, "div_vector", k)
    assert space_equal(ker, e0.with_degree(ker.k))


def test_div_eigen_on_x_times_H(tri):
    # div(x q) = (k + d) q in matched bases
    d, k = 2, 2
    h = build_standard(tri, "H_scalar", k)
    members = [
        Polynomial.vector_from(
            [poly.multiply(Polynomial.coordinate(d, t), q) for t in range(d)]
        )
        for q in h.members()
    ]
    images = [poly.div(v) for v in members]
    img_mat = poly.coeff_matrix(images, k)
    expect = poly.coeff_matrix([q.scale(k + d) for q in h.members()], k)
    assert img_mat == expect


def test_pi_rm_identity_on_rm(tri):
    rm = build_standard(tri, "RM", 0)
    om = operator_matrix("pi_RM", rm)
    for j, member in enumerate(rm.members()):
        img = poly.from_coeff_vector(2, "vector", om.target_k, om.matrix.column(j))
        assert img == member


def test_dot_x_on_grad_homogeneous(tri):
    r = 3
    h = build_standard(tri, "H_scalar", r)
    for q in h.members():
        assert poly.koszul_dot_x(poly.grad(q)) == q.scale(r)


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2)])
def test_divdiv_bijective_on_xxT(d, k):
    # divdiv: x x^T H_{k-1} -> H_{k-1} is (k+d)(k+d-1) x identity in matched bases
    fr = reference_simplex(d)
    h = build_standard(fr, "H_scalar", k - 1)
    images = [poly.divdiv(poly.koszul_xxT(q)) for q in h.members()]
    got = poly.coeff_matrix(images, k - 1)
    expect = poly.coeff_matrix([q.scale((k + d) * (k + d - 1)) for q in h.members()], k - 1)
    assert got == expect


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3)])
def test_div_sym_surjective(d, k):
    fr = reference_simplex(d)
    img = image_space("div_rowwise", build_standard(fr, "P_sym", k + 1))
    assert img.dim == dim_P(d, k) * d
    assert space_equal(img, build_standard(fr, "P_vector", k))


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_div_bubble_sym_is_rm_perp(d, k):
    fr = reference_simplex(d)
    img = image_space("div_rowwise", bubble_space(fr, "div_sym", k))
    p = build_standard(fr, "P_vector", k - 1)
    rm = build_standard(fr, "RM", 0)
    rm_perp = orthocomplement_in(p, rm, "P_perp_RM")
    assert space_equal(img, rm_perp)
    assert rm_perp.dim == p.dim - dim_RM(d)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_certify_decompositions_reference_and_random(d, k):
    rng = random.Random(1000 + 10 * d + k)
    for fr in (reference_simplex(d), random_frame(d, rng)):
        results = certify_decompositions(fr, k)
        assert all_passed(results), [r.as_dict() for r in results if not r.passed]


def test_ker_mat_x_sym_d2_characterization(tri):
    # in 2D the kernel of tau -> tau x in P_2(S) is spanned by xperp xperp^T
    ker = ker_mat_x_sym(tri, 2)
    assert ker.dim == 1
    x1 = Polynomial.coordinate(2, 0)
    x2 = Polynomial.coordinate(2, 1)
    xperp = [x2, -x1]
    entries = {}
    for c, (i, j) in enumerate(poly.sym_pairs(2)):
        prod = poly.multiply(xperp[i], xperp[j])
        for (_, e), v in prod.terms.items():
            entries[(c, e)] = v
    xperp_mat = Polynomial(2, "sym", entries)
    target = spaces.PolySpace(tri, "sym", 2, poly.coeff_matrix([xperp_mat], 2), "xperp")
    assert space_equal(ker, target)


def test_ker_mat_x_sym_d2_p1_trivial(tri):
    assert ker_mat_x_sym(tri, 1).dim == 0


def test_divdiv_splits_dims(tri):
    with pytest.raises(BadDegreeError):
        divdiv_splits(tri, 2)
    f0, ftr = divdiv_splits(tri, 3)
    assert f0.dim == dim_bubble_vector(2, 2) - dim_RM(2)  # = 0
    assert f0.dim == 0
    e0, e0perp = split_bubble(tri, "div_sym", 3)
    assert ftr.dim == e0perp.dim - f0.dim

    f0, ftr = divdiv_splits(tri, 4)
    assert f0.dim == dim_bubble_vector(2, 3) - dim_RM(2) == 5
    e0, e0perp = split_bubble(tri, "div_sym", 4)
    assert f0.dim + ftr.dim == e0perp.dim
    # div restricted to E0perp is injective
    assert operator_matrix("div_rowwise", e0perp).rank() == e0perp.dim
    # the trace of div(Ftr) spans the whole achievable trace space
    tr = trace_matrix(tri, image_space("div_rowwise", ftr), "div_vector")
    assert tr.rank() == ftr.dim == dim_trace_vector(2, 3)


def test_e0_pairing_nondegenerate(tri):
    # the kernel-of-Koszul moments alone determine E0(S)
    k = 4
    e0, _ = split_bubble(tri, "div_sym", k)
    tests = ker_mat_x_sym(tri, k - 2)
    assert tests.dim == e0.dim
    pairing = Matrix(
        [[__import__("femforge.integrate", fromlist=["pair_simplex"]).pair_simplex(tri, t, b)
          for b in e0.members()] for t in tests.members()]
    )
    assert pairing.rank() == e0.dim


def test_e0_vector_pairing_nondegenerate(tri):
    # the vector-case dual logic: pairing E0 against ker(.x) moments has full rank
    from femforge.integrate import pair_simplex
    from femforge.spaces import ker_dot_x_vector

    for k in (2, 3):
        e0, _ = split_bubble(tri, "div_vector", k)
        tests = ker_dot_x_vector(tri, k - 1)
        assert tests.dim == e0.dim
        if e0.dim:
            pairing = Matrix(
                [[pair_simplex(tri, t, b) for b in e0.members()] for t in tests.members()]
            )
            assert pairing.rank() == e0.dim


def test_trace_matrix_named_operator_tags(tri):
    p3 = build_standard(tri, "P_sym", 3)
    assert trace_matrix(tri, p3, "trace_div").rank() == dim_trace_sym(2, 3)
    v = build_standard(tri, "P_vector", 2)
    assert trace_matrix(tri, v, "trace_div").rank() == dim_trace_vector(2, 2)
    # the combined trace of the divdiv operator annihilates exactly the
    # functions with both zero tensor trace and zero normal divergence trace
    nd = trace_matrix(tri, p3, "trace_div_of_div")
    combo = trace_matrix(tri, p3, "trace_divdiv_combo")
    assert nd.rows == combo.rows


def test_p_skw_dims(tet):
    assert build_standard(tet, "P_skw", 1).dim == 4 * 3
    assert build_standard(tet, "P_skw", 0).dim == 3


def test_gram_matrix_accepts_space(tri):
    from femforge.integrate import gram_matrix

    rm = build_standard(tri, "RM", 0)
    g = gram_matrix(tri, rm)
    assert g.rows == g.cols == 3
    assert g.det() > 0


def test_divdiv_splits_dims_3d(tet):
    f0, ftr = divdiv_splits(tet, 4)
    assert f0.dim == dim_bubble_vector(3, 3) - dim_RM(3) == 14
    _, e0perp = split_bubble(tet, "div_sym", 4)
    assert f0.dim + ftr.dim == e0perp.dim
    tr = trace_matrix(tet, image_space("div_rowwise", ftr), "div_vector")
    assert tr.rank() == ftr.dim == dim_trace_vector(3, 3) == 40
