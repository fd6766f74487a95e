import random
from fractions import Fraction

import pytest

from subregw.scalar import K, ONE, ZERO, sq
from subregw.fock import (
    FockMonomial,
    FockState,
    GramForm,
    RankMismatchError,
    WeightVector,
    basis_symbols,
    mu_weight_vector,
    validate_pairings,
    weight,
)


@pytest.fixture(scope="module", params=[2, 3, 4])
def gram(request):
    return GramForm(request.param)


def test_gram_entries_n3():
    g = GramForm(3)
    Y, Q, A1, A2 = (WeightVector.basis(3, s) for s in ("Y", "Q", "A1", "A2"))
    assert g.pairing(Q, Q) == ONE
    assert g.pairing(Y, Y) == ZERO
    assert g.pairing(Q, Y) == ONE
    assert g.pairing(A1, A1) == 2 * K
    assert g.pairing(A2, A2) == 2 * K
    assert g.pairing(A1, A2) == -K
    assert g.pairing(A1, Q) == -K
    assert g.pairing(A2, Q) == ZERO
    assert g.pairing(A1, Y) == ZERO


def test_pairing_symmetric_bilinear(gram):
    rng = random.Random(11)
    syms = basis_symbols(gram.n)

    def rand_vec():
        return WeightVector.from_coeffs(
            gram.n,
            {s: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for s in syms},
        )

    for _ in range(20):
        a, b, c = rand_vec(), rand_vec(), rand_vec()
        assert gram.pairing(a, b) == gram.pairing(b, a)
        lam = sq(Fraction(rng.randint(-3, 3), 2))
        assert gram.pairing(a.scale(lam) + b, c) == lam * gram.pairing(a, c) + gram.pairing(b, c)


def test_pairing_rank_mismatch():
    g2, g3 = GramForm(2), GramForm(3)
    with pytest.raises(RankMismatchError):
        g2.pairing(WeightVector.basis(2, "Y"), WeightVector.basis(3, "Y"))
    with pytest.raises(RankMismatchError):
        g3.pairing(WeightVector.basis(2, "Q"), WeightVector.basis(2, "Q"))


def test_mu_pairings(gram):
    # (A_i, mu_i) = K for every i
    for i in range(1, gram.n):
        a = gram.basis_vector(f"A{i}")
        assert gram.pairing(a, mu_weight_vector(gram, i)) == gram.K


def test_mu_sum_is_minus_KY(gram):
    total = WeightVector.zero(gram.n)
    for i in range(1, gram.n + 1):
        total = total + mu_weight_vector(gram, i)
    assert total == gram.basis_vector("Y").scale(-gram.K)


def test_mu0_example_n2():
    g = GramForm(2)
    mu0 = mu_weight_vector(g, 0)
    want = WeightVector.from_coeffs(
        2, {"Y": -g.K / 2, "Q": 1, "A1": Fraction(1, 2)}
    )
    assert mu0 == want


def test_mu0_differs_from_mu1_by_Q(gram):
    assert mu_weight_vector(gram, 0) - mu_weight_vector(gram, 1) == gram.basis_vector("Q")


def test_validate_pairings_pass():
    for n in (2, 3, 4, 5):
        checks = validate_pairings(GramForm(n))
        assert checks and all(ok for _, ok in checks)


def test_validate_pairings_transposed_fails():
    g = GramForm(2, transpose=True)
    checks = dict(validate_pairings(g))
    assert not all(checks.values())
    assert checks["(Q, mu_1)"] is False


def test_specialized_gram():
    g = GramForm(3, k=Fraction(5, 7))
    A1 = g.basis_vector("A1")
    assert g.pairing(A1, A1) == Fraction(10, 7)
    assert g.K == Fraction(5, 7)


def test_charge_weight_pins():
    g = GramForm(3)
    y, q, a1 = g.basis_vector("Y"), g.basis_vector("Q"), g.basis_vector("A1")
    assert g.charge_weight(y) == ONE
    assert g.charge_weight(q) == ONE
    assert g.charge_weight(a1) == ONE
    assert g.charge_weight(y.scale(-3)) == sq(-3)
    # additivity under charge addition carries the pairing correction
    w = y.scale(-1) + q
    assert g.charge_weight(w) == g.charge_weight(y.scale(-1)) + g.charge_weight(q) + g.pairing(y.scale(-1), q)


def test_monomial_canonical_order():
    g = GramForm(2)
    ch = WeightVector.zero(2)
    m1 = FockMonomial(ch, ((1, -2), (0, -1), (1, -1)))
    m2 = FockMonomial(ch, ((0, -1), (1, -1), (1, -2)))
    assert m1 == m2 and hash(m1) == hash(m2)
    assert m1.modes == ((0, -1), (1, -1), (1, -2))
    assert m1.depth == 4


def test_state_algebra():
    g = GramForm(2)
    vac = FockState.vacuum(g)
    e_y = FockState.highest_weight(g.basis_vector("Y"))
    s = vac + e_y.scale(2)
    assert len(s) == 2
    assert (s - s).is_zero()
    assert s.scale(0).is_zero()
    assert s + FockState.zero() == s


def test_weight_decomposition():
    g = GramForm(2)
    e_y = FockState.highest_weight(g.basis_vector("Y"))
    assert weight(g, e_y) == {Fraction(1): e_y}
    vac = FockState.vacuum(g)
    assert weight(g, vac) == {Fraction(0): vac}
    # Q_(-1) e^{-Y} sits at weight 1 + (-1) = 0
    mono = FockMonomial(g.basis_vector("Y").scale(-1), ((g.sym_index("Q"), -1),))
    st = FockState({mono: ONE})
    assert weight(g, st) == {Fraction(0): st}
    mixed = e_y + st
    parts = weight(g, mixed)
    assert set(parts) == {Fraction(0), Fraction(1)}
    total = FockState.zero()
    for comp in parts.values():
        total = total + comp
    assert total == mixed


def test_state_json_roundtrip():
    g = GramForm(3)
    mono = FockMonomial(
        g.basis_vector("Y").scale(-1) + g.basis_vector("Q"),
        ((0, -2), (2, -1)),
    )
    st = FockState({mono: K / (K - 1)}) + FockState.vacuum(g).scale(3)
    data = st.to_json(g)
    assert FockState.from_json(g, data) == st


def test_charge_serialization_rejects_k_dependent():
    g = GramForm(2)
    with pytest.raises(ValueError):
        FockState.highest_weight(mu_weight_vector(g, 0))
