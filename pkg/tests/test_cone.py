import numpy as np
import pytest

from gencontact import cone, gtb, poisson, structures, subspace
from gencontact.fields import Field
from gencontact.sampling import sample_points
from gencontact.structures import DiracSpanField, builtin

PTS4 = sample_points(4, 20)


def heis():
    return builtin("heisenberg_sasakian")[0]


def test_product_L0_of_heisenberg_and_line():
    L0 = cone.product_L0(heis(), builtin("real_line")[0])
    p = PTS4[0]
    assert L0.rank_at(p) == 4
    row = np.zeros(8, dtype=complex)
    row[2], row[7] = 1, -1j  # d/dz - i dt
    assert subspace.distance_to_span(row, L0.value(p)) < 1e-12


def test_product_L0_of_two_lines_is_constant():
    R = builtin("real_line")[0]
    L0 = cone.product_L0(R, R)
    a, b = L0.value(np.array([0.1, 0.9])), L0.value(np.array([-0.5, 0.3]))
    assert L0.rank_at(np.zeros(2)) == 2
    np.testing.assert_array_equal(a, b)
    expect = np.array([[0, 0, 1, -1j], [1, -1j, 0, 0]])
    assert subspace.same_span(a, expect)


def test_product_L0_is_isotropic_and_involutive():
    L0 = cone.product_L0(heis(), builtin("real_line")[0])
    assert L0.isotropy(PTS4).value < 1e-10
    assert structures.obstruction_sup(L0, PTS4).value < 1e-8


def test_cone_two_form_of_heisenberg():
    B = cone.cone_B(heis())
    for p in PTS4:
        x, y, z, t = p
        Bv = B.value(np.array([x, y, z, 0.0]))
        assert Bv[0, 1] == pytest.approx(1)  # d eta = dx ^ dy
        np.testing.assert_allclose(Bv[3, :3], [-y, 0, 1])  # dt ^ eta
        np.testing.assert_allclose(Bv, -Bv.T)
        np.testing.assert_allclose(B.value(p), np.exp(t) * B.value(np.array([x, y, z, 0.0])), rtol=1e-12)


def test_cone_two_form_of_flat_structure():
    B = cone.cone_B(builtin("flat_cokahler")[0])
    p = np.array([0.3, 0.4, 0.5, 0.7])
    expect = np.zeros((4, 4))
    expect[3, 2], expect[2, 3] = np.exp(0.7), -np.exp(0.7)
    np.testing.assert_allclose(B.value(p), expect, rtol=1e-12)


@pytest.mark.parametrize("name", ["heisenberg_sasakian", "flat_cokahler"])
def test_cone_two_form_is_closed(name):
    assert cone.closedness(cone.cone_B(builtin(name)[0]), PTS4).value < 1e-10


def test_bfield_span_with_zero_form_is_identity():
    L0 = cone.product_L0(heis(), builtin("real_line")[0])
    L1 = cone.bfield_span(Field.zeros((4, 4), 4), L0)
    np.testing.assert_array_equal(L0.value(PTS4[1]), L1.value(PTS4[1]))


def test_bfield_span_keeps_pure_forms():
    rows = np.zeros((2, 4), dtype=complex)
    rows[0, 2], rows[1, 3] = 1, 1j
    L = DiracSpanField(Field.constant(rows, 2), 2)
    B = Field.constant(np.array([[0.0, 3.0], [-3.0, 0.0]]), 2)
    np.testing.assert_array_equal(cone.bfield_span(B, L).value(np.zeros(2)), rows)


def test_bfield_span_shifts_reeb_generator_by_minus_exp_t_dt():
    S = heis()
    L0, L1 = cone.cone_pair(S)
    for p in PTS4[:5]:
        k = L0.value(p).shape[0] - 2  # E+ combination comes after the E^(1,0) rows
        diff = L1.value(p)[k] - L0.value(p)[k]
        expect = np.zeros(8, dtype=complex)
        expect[7] = -np.exp(p[3])
        np.testing.assert_allclose(diff, expect, atol=1e-12)


def test_bfield_span_preserves_isotropy():
    L0, L1 = cone.cone_pair(heis())
    assert L1.isotropy(PTS4).value < 1e-10
    L0, L1 = cone.cone_pair(heis(), 1j)
    assert L1.isotropy(PTS4).value < 1e-10


def _graph(pi):
    return poisson.graph_span(pi)


def test_dirac_scale_identities():
    L = cone.product_L0(heis(), builtin("real_line")[0]).value(PTS4[2])
    assert subspace.same_span(cone.dirac_scale(1.0, L), L)
    for lam in (2.0, -1.0, 0.5):
        back = cone.dirac_scale(lam, cone.dirac_scale(1 / lam, L))
        assert subspace.span_distance(back, L) < 1e-10 and subspace.span_distance(L, back) < 1e-10


def test_scaling_a_graph_rescales_the_bivector():
    pi = np.array([[0.0, 1.0, 0.5], [-1.0, 0.0, 2.0], [-0.5, -2.0, 0.0]])
    np.testing.assert_allclose(cone.graph_extract(cone.dirac_scale(2.0, _graph(pi))), pi / 2, atol=1e-12)


def test_conjugate_of_real_span():
    pi = np.array([[0.0, 1.0], [-1.0, 0.0]])
    G = _graph(pi)
    assert subspace.same_span(cone.dirac_conjugate(G), G)


def test_sum_of_graphs_adds_inverses():
    # Gamma_pi1 + Gamma_pi2 pairs X + a + b with pi1 a = pi2 b = X, the graph of (pi1^-1 + pi2^-1)^-1
    p1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    p2 = np.array([[0.0, 3.0], [-3.0, 0.0]])
    S = cone.dirac_sum(_graph(p1), _graph(p2))
    expect = np.linalg.inv(np.linalg.inv(p1) + np.linalg.inv(p2))
    np.testing.assert_allclose(cone.graph_extract(S), expect, atol=1e-12)


def test_sum_requires_transverse_projections():
    P = np.array([[0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)
    with pytest.raises(structures.NonTransverseError):
        cone.dirac_sum(P, P)


def test_graph_of_symplectic_eigenbundle():
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])  # dx ^ dy
    L = structures.symplectic_span(omega)
    pi = cone.graph_extract(cone.half_imaginary_difference(L, cone.dirac_conjugate(L)))
    # L = {X - i i_X omega}, and the scaled difference is {X - i_X omega}: the graph of -i_X omega -> X
    np.testing.assert_allclose(pi, -np.linalg.inv(omega.T), atol=1e-12)
    assert pi[0, 1] == pytest.approx(-1)


def test_graph_of_complex_eigenbundle_vanishes():
    L = structures.eigenbundle(structures.complex_type_endo(cone.PLANE_J))
    pi = cone.graph_extract(cone.half_imaginary_difference(L, cone.dirac_conjugate(L)))
    np.testing.assert_allclose(pi, 0, atol=1e-12)


def test_graph_extract_rejects_tangent_vectors():
    L = np.array([[1, 0, 0, 0], [0, 0, 0, 1]], dtype=complex)
    with pytest.raises(cone.TangentIntersectionError):
        cone.graph_extract(L)


def test_flat_kaehler_plane_passes_every_condition():
    LJ, Lw = cone.kahler_plane()
    rep = cone.kahler_check(LJ, Lw, sample_points(2, 10))
    assert rep.passed and rep.failing == []
    assert all(c.margin > 0.1 for c in rep.conditions.values())


def test_kaehler_plane_with_opposite_orientation_fails_positivity():
    LJ, _ = cone.kahler_plane()
    Lw = DiracSpanField(Field.constant(structures.symplectic_span(-cone.kahler_form(np.eye(2), cone.PLANE_J)), 2),
                        2)
    rep = cone.kahler_check(LJ, Lw, sample_points(2, 3))
    assert 4 in rep.failing


def test_flat_cone_fails_with_index():
    L0, L1 = cone.cone_pair(builtin("flat_cokahler")[0])
    rep = cone.kahler_check(L0, L1, PTS4[:10])
    assert not rep.passed and rep.failing
    for i in rep.failing:
        c = rep.conditions[i]
        assert c.witness is not None and c.reason


def test_kahler_report_is_deterministic_and_input_sensitive():
    S = heis()
    L0, L1 = cone.cone_pair(S)
    a = cone.kahler_check(L0, L1, PTS4[:10]).as_dict()
    b = cone.kahler_check(L0, L1, PTS4[:10]).as_dict()
    assert a == b
    same = cone.kahler_check(L0, L0, PTS4[:10]).as_dict()
    assert same != a


def test_invertibility_on_the_cone():
    S, G = builtin("heisenberg_sasakian")
    pi = cone.cone_pi(S, "g_phi", G)
    B = cone.cone_B(S)
    rng = np.random.default_rng(0)
    for p in PTS4:
        q = p.copy()
        q[3] = rng.uniform(-2, 2)
        assert cone.invertibility_on_cone(pi, B, q)[0]
    zero = Field.zeros((4, 4), 4)
    assert cone.invertibility_on_cone(zero, B, PTS4[0])[0]
    pi2 = Field.constant(np.array([[0.0, -1.0], [1.0, 0.0]]), 2)
    B2 = Field.constant(np.array([[0.0, 1.0], [-1.0, 0.0]]), 2)  # i_{pi(alpha)} B = -alpha
    ok, det = cone.invertibility_on_cone(pi2, B2, np.zeros(2))
    assert not ok and abs(det) < 1e-15


def test_reduced_and_cone_determinants_agree():
    S, G = builtin("heisenberg_sasakian")
    pi = cone.cone_pi(S, "g_phi", G)
    B = cone.cone_B(S)
    for p in PTS4:
        _, dc = cone.invertibility_on_cone(pi, B, p)
        _, dm = cone.reduced_invertibility(S, "g_phi", G, p[:3], p[3])
        assert dc == pytest.approx(dm, rel=1e-10)
        assert dm == pytest.approx((1 + np.exp(p[3])) ** 2, rel=1e-10)


def test_hermitian_form_on_plane_intersection():
    LJ, Lw = cone.kahler_plane()
    I = subspace.intersect(LJ.value(np.zeros(2)), Lw.value(np.zeros(2)))
    H = cone.hermitian_form(I)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(H)[0] > 0


def test_product_pair_checks_chart():
    R = builtin("real_line")[0]
    with pytest.raises(gtb.DimensionError):
        cone.product_pair(R, R, Field.zeros((3, 3), 3))
