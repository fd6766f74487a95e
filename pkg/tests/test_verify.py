from fractions import Fraction

import pytest

from subregw.scalar import K, ONE, ZERO, sq
from subregw.fock import FockMonomial, FockState, GramForm, WeightVector
from subregw.fields import heis_mode, nth_product, translate
from subregw.verify import (
    C2Poly,
    c2_reduce,
    check_c2_lead_term,
    check_c2_relations,
    check_centrality,
    check_comm_lemma,
    check_conformal,
    check_critical_esym,
    check_ef_ope,
    check_esym_shift,
    check_fermionic,
    check_hypergeom,
    check_kernel_negative_control,
    check_pairings,
    check_rearrangement,
    check_screening_kernel,
    check_u_integrality,
    esym_bar,
    hypergeom_sides,
    kernel_reports,
    mu_bar,
    run_suite,
)
from subregw.wgen import GeneratorSet, build_ehf, build_w_all, mu_vector, vector_state


def test_check_pairings_pass_and_transpose_fail():
    assert check_pairings(2).passed
    assert check_pairings(4).passed
    rep = check_pairings(2, transpose=True)
    assert not rep.passed
    assert rep.witness["failed_identities"]


def test_kernel_check_positive_and_witness():
    g = GramForm(2)
    gs = GeneratorSet.build(2)
    for rep in kernel_reports(gs):
        assert rep.passed, rep.params
    # mu_1 mode alone is not in the kernel: witness in the A_1-shifted sector
    bad = vector_state(g, mu_vector(g, 1))
    rep = check_screening_kernel(g, bad, "mu_1")
    assert not rep.passed
    assert rep.witness  # nonzero image recorded
    assert rep.params["failed_at"].startswith("e^")


def test_kernel_negative_control():
    rep = check_kernel_negative_control(2, seed=7)
    assert rep.passed
    assert rep.witness
    assert rep.seed == 7


def test_comm_lemma_n3():
    rep = check_comm_lemma(GramForm(3), trials=20, seed=3)
    assert rep.passed
    assert rep.params["q_row_j0"] == "(m-1)(K-1)"


def test_hypergeom_examples_and_sweep():
    lhs, rhs = hypergeom_sides(2, 2, 0)
    assert lhs == rhs == [Fraction(1)]
    lhs, rhs = hypergeom_sides(2, 1, 0)
    assert lhs == rhs == [Fraction(0), Fraction(-1)]  # both sides -q
    assert check_hypergeom(6).passed


def test_rearrangement_small():
    assert check_rearrangement(GramForm(2)).passed
    rep = check_rearrangement(GramForm(3))
    assert rep.passed
    # specialized-K instance
    assert check_rearrangement(GramForm(3, k=Fraction(5, 7))).passed


def test_conformal_n2():
    rep = check_conformal(GramForm(2))
    assert rep.passed
    assert rep.params["central_charge"] == str((3 * K - 6) / K)
    assert rep.params["coefficients"]["W_2"] == str(sq(-1) / K)


def test_critical_checks_require_k0():
    with pytest.raises(ValueError):
        check_centrality(GramForm(2))
    with pytest.raises(ValueError):
        check_ef_ope(GramForm(2, k=Fraction(1, 2)))


def test_critical_suite_n2():
    g = GramForm(2, k=0)
    assert check_critical_esym(g).passed
    assert check_centrality(g).passed
    assert check_esym_shift(g).passed
    rep = check_ef_ope(g, seed=11)
    assert rep.passed
    rep = check_fermionic(g)
    assert rep.passed
    assert rep.sign == 1


def test_u_integrality():
    assert check_u_integrality(2).passed
    assert check_u_integrality(3).passed


# ---------------------------------------------------------------------------
# C2 layer


def test_c2_reduce_basics():
    g = GramForm(2, k=0)
    vac = FockState.vacuum(g)
    # Y_(-1)|0> dies, Q_(-1)|0> becomes Qbar
    y_state = heis_mode(g, g.basis_vector("Y"), -1, vac)
    assert c2_reduce(g, y_state).is_zero()
    q_state = heis_mode(g, g.basis_vector("Q"), -1, vac)
    assert c2_reduce(g, q_state) == C2Poly.var(2, 0)
    # depth-2 modes die
    deep = heis_mode(g, g.basis_vector("Q"), -2, vac)
    assert c2_reduce(g, deep).is_zero()
    # charge markers
    e = FockState.highest_weight(g.basis_vector("Y"))
    assert c2_reduce(g, e) == C2Poly(2, {(1, (0, 0)): ONE})
    with pytest.raises(ValueError):
        c2_reduce(g, FockState.highest_weight(g.basis_vector("Q")))


def test_c2_reduce_is_algebra_map():
    g = GramForm(3, k=0)
    vac = FockState.vacuum(g)
    a = heis_mode(g, g.basis_vector("A1"), -1, vac)
    b = heis_mode(g, g.basis_vector("Q"), -1, FockState.highest_weight(g.basis_vector("Y")))
    prod = nth_product(g, a, -1, b)
    assert c2_reduce(g, prod) == c2_reduce(g, a) * c2_reduce(g, b)
    # and Y_(-1) b maps to zero
    yb = heis_mode(g, g.basis_vector("Y"), -1, b)
    assert c2_reduce(g, yb).is_zero()


def test_c2_sum_mu_bar_vanishes_at_k0():
    # ebar_1 = sum of mu-bars = 0 at K = 0 (the -K Ybar part dies anyway)
    g = GramForm(3, k=0)
    assert esym_bar(g, 1).is_zero()


def test_c2_lead_term_generic_and_n2_relation():
    rep = check_c2_lead_term(GramForm(2, k=Fraction(5, 7)))
    assert rep.passed
    rep = check_c2_lead_term(GramForm(3, k=Fraction(5, 7)))
    assert rep.passed
    # symbolic K also holds
    assert check_c2_lead_term(GramForm(2)).passed


def test_c2_relations_n2_explicit():
    g = GramForm(2, k=0)
    e, h, f = build_ehf(g)
    _, w = build_w_all(g)
    ef = c2_reduce(g, nth_product(g, e, -1, f))
    h_bar = c2_reduce(g, h)
    want = (h_bar * h_bar).scale(-1) - c2_reduce(g, w[2])
    assert ef == want  # Ebar Fbar = -Hbar^2 - Wbar_2
    rep = check_c2_relations(2, seed=5)
    assert rep.passed
    assert "(-1)^k (N-k)" in rep.params["ef_bracket_pattern"]


def test_c2_bracket_antisymmetry_and_leibniz():
    g = GramForm(2, k=0)
    e, h, f = build_ehf(g)
    pairs = [(h, e), (h, f), (e, f)]
    for a, b in pairs:
        lhs = c2_reduce(g, nth_product(g, a, 0, b))
        rhs = c2_reduce(g, nth_product(g, b, 0, a)).scale(-1)
        assert lhs == rhs
    # Leibniz: {a, b_(-1)c} = {a,b} c + b {a,c} with a=H, b=E, c=F
    bc = nth_product(g, e, -1, f)
    lhs = c2_reduce(g, nth_product(g, h, 0, bc))
    rhs = c2_reduce(g, nth_product(g, h, 0, e)) * c2_reduce(g, f) + c2_reduce(
        g, e
    ) * c2_reduce(g, nth_product(g, h, 0, f))
    assert lhs == rhs


def test_c2_poisson_centrality_of_mu_bars():
    # mu_i zero-modes kill E and F at any K: {mubar_i, Ebar} = {mubar_i, Fbar} = 0
    g = GramForm(3)
    e, h, f = build_ehf(g)
    for i in range(1, 4):
        mu_state = vector_state(g, mu_vector(g, i))
        assert nth_product(g, mu_state, 0, e).is_zero()
        assert nth_product(g, mu_state, 0, f).is_zero()


def test_run_suite_smoke():
    reports = run_suite(["pairings", "hypergeom"], n=2)
    assert all(r.passed for r in reports)
    reports = run_suite(["kernel"], n=2, transpose=True)
    assert any(not r.passed for r in reports)
    with pytest.raises(ValueError):
        run_suite(["nope"], n=2)


def test_report_json_shape():
    rep = check_pairings(2)
    data = rep.to_json()
    assert set(data) == {"check", "params", "verdict", "sign", "seed", "witness", "millis"}
    assert data["verdict"] == "pass"
