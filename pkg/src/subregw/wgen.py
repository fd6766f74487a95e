"""Construction of the strong generators in the free-field realization.

Builds E, H, F, the screening-kernel elements W'_m, their normalizations
W''_m and W_m, the polynomial-level family U_m, the conformal vector, and
the critical-level fermionic fields.  Everything is exact over Q(K) or at
an exact rational specialization of K.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .scalar import ONE, ZERO, PoleError, ScalarQ, sq
from .fock import (
    FockState,
    GramForm,
    WeightVector,
    basis_symbols,
    mu_weight_vector,
)
from .fields import (
    Compose,
    HeisenbergMode,
    OperatorExpr,
    Scale,
    Translation,
    apply_operator,
    heis_mode,
    lattice_mode,
    nth_product,
    translate,
)

from itertools import combinations


def mu_vector(gram, i):
    """The Heisenberg vector mu_i for i = 0..N."""
    return mu_weight_vector(gram, i)


def ell(gram):
    """The weight-one Y-coefficient K(N-1)/N - 1 of the Cartan generator."""
    return gram.K * Fraction(gram.n - 1, gram.n) - 1


def h_weight_vector(gram):
    n = gram.n
    coeffs = {"Y": ell(gram), "Q": ONE}
    for j in range(1, n):
        coeffs[f"A{j}"] = sq(Fraction(n - j, n))
    return WeightVector.from_coeffs(n, coeffs)


def vector_state(gram, a):
    """The state a_(-1)|0> attached to a Heisenberg vector."""
    return heis_mode(gram, a, -1, FockState.vacuum(gram))


def r_op(gram, i):
    """R_i = (K-1)(T + Y_(-1)) + Q_(-1) + sum_{j<i} A_j_(-1), i = 0..N.

    R_0 degenerates to (K-1)(T + Y_(-1)).
    """
    n = gram.n
    k1 = gram.K - 1
    base = Scale(k1, Translation() + HeisenbergMode(gram.basis_vector("Y"), -1))
    if i == 0:
        return base
    ops = [base, HeisenbergMode(gram.basis_vector("Q"), -1)]
    for j in range(1, i):
        ops.append(HeisenbergMode(gram.basis_vector(f"A{j}"), -1))
    out = ops[0]
    for op in ops[1:]:
        out = out + op
    return out


def f_op(gram, i):
    """F_i = (K-1) T - mu_i_(-1), i = 0..N."""
    return Scale(gram.K - 1, Translation()) + Scale(
        sq(-1), HeisenbergMode(mu_vector(gram, i), -1)
    )


def screening_coeff(gram, k):
    """prod_{j=1..k} (j(K-1)+1)/(j(K-1)); pole at a specialized K = 1."""
    out = ONE
    k1 = gram.K - 1
    for j in range(1, k + 1):
        den = sq(j) * k1
        if den.is_zero():
            raise PoleError(
                f"factor {j}(K - 1) vanishes at K = {gram.k}",
                factor="(K - 1)",
                at=gram.k,
            )
        out = out * (den + 1) / den
    return out


def noncomm_esym(gram, m, ops, target):
    """m-th noncommutative elementary symmetric polynomial applied to a state.

    e_m(X_1, .., X_N) = sum over descending index tuples of X_{i_1}..X_{i_m};
    a higher position index acts further left, so each product is applied to
    the target smallest index first.
    """
    n = len(ops)
    if m < 0 or m > n:
        return FockState.zero()
    out = FockState.zero()
    for subset in combinations(range(n), m):
        v = target
        for i in subset:  # ascending: rightmost factor acts first
            v = apply_operator(gram, ops[i], v)
        out = out + v
    return out


def u_product(gram, ops, target):
    """Expand (u + X_N) .. (u + X_1) target as a polynomial in u.

    ``ops`` lists X_1..X_N; the returned list is indexed by u-degree, so
    entry N - m is e_m(X_1, .., X_N) target.
    """
    poly = [target]
    for op in ops:
        applied = [apply_operator(gram, op, p) for p in poly]
        new = [FockState.zero()] * (len(poly) + 1)
        for d, p in enumerate(poly):
            new[d + 1] = new[d + 1] + p
        for d, p in enumerate(applied):
            new[d] = new[d] + p
        poly = new
    return poly


def build_w_prime_all(gram):
    """All kernel elements W'_0..W'_N at once, via the u-expansion.

    W'_0 is a scalar multiple of the vacuum; the multiple is returned as
    found, not normalized away.
    """
    n = gram.n
    vac = FockState.vacuum(gram)
    f_ops = [f_op(gram, i) for i in range(n + 1)]
    total = [FockState.zero() for _ in range(n + 1)]
    for k in range(n + 1):
        coeff = screening_coeff(gram, k) * ((-1) ** k)
        for subset in combinations(range(1, n + 1), n - k):
            ops = [f_ops[0]] * k + [f_ops[i] for i in subset]
            poly = u_product(gram, ops, vac)
            for deg in range(n + 1):
                total[deg] = total[deg] + poly[deg].scale(coeff)
    # total[deg] is the u^deg coefficient; W'_m sits at degree N - m
    return [total[n - m] for m in range(n + 1)]


def w_norm_coeff(gram, m):
    """(-1)^m prod_{j=1..N-m} j(K-1)/(j(K-1)-K), with pole reporting."""
    out = ONE if m % 2 == 0 else sq(-1)
    k1 = gram.K - 1
    for j in range(1, gram.n - m + 1):
        den = sq(j) * k1 - gram.K
        if den.is_zero():
            raise PoleError(
                f"factor {j}(K - 1) - K vanishes at K = {gram.k}",
                factor=f"({j}(K-1) - K)",
                at=gram.k,
            )
        out = out * (sq(j) * k1) / den
    return out


def build_w_all(gram, w_primes=None):
    """W''_m and W_m for m = 0..N (with W''_0 := |0>, W_0 = |0>, W_1 = 0).

    W''_m rescales W'_m; W_m then subtracts the lower-order tail
    sum_{k=1..m} (-1)^k c_k W_{m-k (-1)} H_(-1)^k |0>.
    """
    n = gram.n
    if w_primes is None:
        w_primes = build_w_prime_all(gram)
    vac = FockState.vacuum(gram)
    h_state = vector_state(gram, h_weight_vector(gram))
    h_powers = [vac]
    for _ in range(n):
        h_powers.append(nth_product(gram, h_state, -1, h_powers[-1]))
    w_dd = [vac]
    w = [vac]
    for m in range(1, n + 1):
        wdd_m = w_primes[m].scale(w_norm_coeff(gram, m))
        w_dd.append(wdd_m)
        if m == 1:
            w.append(FockState.zero())
            continue
        wm = wdd_m
        for k in range(1, m + 1):
            ck = screening_coeff(gram, k) * ((-1) ** k)
            tail = nth_product(gram, w[m - k], -1, h_powers[k])
            wm = wm - tail.scale(ck)
        w.append(wm)
    return w_dd, w


def build_u(gram, m):
    """The polynomial-level kernel element U_m, m = 1..N.

    Same shape as the W''_m expansion but over R_i = F_i + H_(-1); the
    k-th coefficient is folded with R_0^k = (K-1)^k (T + Y_(-1))^k so no
    (K-1) denominator ever appears, and the construction stays finite at
    every rational K including K = 1.
    """
    n = gram.n
    vac = FockState.vacuum(gram)
    r_ops = [r_op(gram, i) for i in range(n + 1)]
    dy = Translation() + HeisenbergMode(gram.basis_vector("Y"), -1)
    out = FockState.zero()
    target = vac
    for k in range(0, m + 1):
        coeff = ONE if (m + k) % 2 == 0 else sq(-1)
        for j in range(1, k + 1):
            coeff = coeff * (sq(j) * (gram.K - 1) + 1) / j
        if k > 0:
            target = apply_operator(gram, dy, target)
        out = out + noncomm_esym(gram, m - k, r_ops[1:], target).scale(coeff)
    return out


def build_ehf(gram):
    """The weight-one generators and the top generator F."""
    e_state = FockState.highest_weight(gram.basis_vector("Y"))
    h_state = vector_state(gram, h_weight_vector(gram))
    v = FockState.highest_weight(gram.basis_vector("Y").scale(-1))
    for i in range(1, gram.n + 1):
        v = apply_operator(gram, r_op(gram, i), v)
    return e_state, h_state, v.scale(-1)


def _scalar_multiple(state, ref):
    """The scalar lambda with state = lambda * ref, or None."""
    if state.is_zero():
        return ZERO
    for mono, c0 in ref.terms.items():
        lam = state.coefficient(mono) / c0
        return lam if state == ref.scale(lam) else None
    return None


def build_omega(gram, w2=None, h_state=None, ehf=None):
    """The conformal vector: the combination of W_2, H_(-1)H and dH whose
    weight-one modes grade E, H, F correctly.

    The three coefficients are solved for exactly from the eigenvalue
    conditions omega_(1)E = E, omega_(1)H = H, omega_(1)F = (N-1) F; the
    Virasoro axioms themselves are left to the verification layer.
    Defined away from K = 0 and K = 1.
    """
    n = gram.n
    if gram.K.is_zero():
        raise PoleError("factor K vanishes at K = 0", factor="K", at=gram.k)
    if (gram.K - 1).is_zero():
        raise PoleError("factor (K - 1) vanishes at K = 1", factor="(K - 1)", at=gram.k)
    if w2 is None:
        _, w = build_w_all(gram)
        w2 = w[2]
    if ehf is None:
        e_state, hs, f_state = build_ehf(gram)
    else:
        e_state, hs, f_state = ehf
    if h_state is None:
        h_state = hs
    hh = nth_product(gram, h_state, -1, h_state)
    dh = translate(gram, h_state)
    basis = (w2, hh, dh)
    rows = []
    for x, target in ((e_state, ONE), (h_state, ONE), (f_state, sq(n - 1))):
        row = []
        for s in basis:
            lam = _scalar_multiple(nth_product(gram, s, 1, x), x)
            if lam is None:
                raise ArithmeticError("conformal ansatz does not act diagonally")
            row.append(lam)
        rows.append(row + [target])
    coeffs = _solve3(rows)
    return w2.scale(coeffs[0]) + hh.scale(coeffs[1]) + dh.scale(coeffs[2]), coeffs


def _solve3(rows):
    m = [list(r) for r in rows]
    size = len(m)
    for col in range(size):
        piv = next((r for r in range(col, size) if not m[r][col].is_zero()), None)
        if piv is None:
            raise ArithmeticError("singular system for the conformal vector")
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col]
        m[col] = [x / inv for x in m[col]]
        for r in range(size):
            if r != col and not m[r][col].is_zero():
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][size] for r in range(size)]


def fermionic_vectors(gram):
    """The weight vectors behind the critical-level fermions."""
    n = gram.n
    coeffs = {"Q": ONE}
    for j in range(1, n):
        coeffs[f"A{j}"] = sq(Fraction(n - j, n))
    alpha = WeightVector.from_coeffs(n, coeffs)
    beta = gram.basis_vector("Y") - alpha
    return alpha, beta


@dataclass
class FermionicFields:
    alpha: WeightVector
    beta: WeightVector
    psi_plus: FockState
    psi_minus: FockState
    e_beta: FockState
    e_minus_beta: FockState


def build_fermionic(gram):
    """Critical-level fermionic highest-weight states; requires K = 0."""
    if gram.k != 0:
        raise PoleError(
            "fermionic realization defined at critical level only", at=gram.k
        )
    alpha, beta = fermionic_vectors(gram)
    return FermionicFields(
        alpha=alpha,
        beta=beta,
        psi_plus=FockState.highest_weight(alpha),
        psi_minus=FockState.highest_weight(alpha.scale(-1)),
        e_beta=FockState.highest_weight(beta),
        e_minus_beta=FockState.highest_weight(beta.scale(-1)),
    )


FAMILIES = ("ehf", "wp", "w", "u", "omega", "fermionic")


@dataclass
class GeneratorSet:
    """A named collection of generator states over one (N, K) context."""

    gram: GramForm
    elements: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @staticmethod
    def build(n, k=None, only=None, budget=10 ** 6):
        gram = GramForm(n, k=k, budget=budget)
        gs = GeneratorSet(gram=gram)
        gs.meta["n"] = n
        gs.meta["k"] = "symbolic" if gram.k is None else str(gram.k)
        gs.meta["cocycle"] = gram.cocycle_table()
        families = set(only) if only else set(FAMILIES)
        unknown = families - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown families: {sorted(unknown)}")
        if only is None:
            if gram.k == 0:
                families.discard("omega")
                gs.meta["omega_skipped"] = "conformal vector has a 1/K pole"
            else:
                families.discard("fermionic")
        el = gs.elements
        if "ehf" in families:
            e, h, f = build_ehf(gram)
            el["E"], el["H"], el["F"] = e, h, f
        w_primes = None
        if "wp" in families or "w" in families:
            w_primes = build_w_prime_all(gram)
            gs.meta["w_prime_0"] = _w0_scalar(gram, w_primes[0]).to_json()
        if "wp" in families:
            for m in range(1, n + 1):
                el[f"W'_{m}"] = w_primes[m]
        if "w" in families:
            w_dd, w = build_w_all(gram, w_primes)
            for m in range(1, n + 1):
                el[f"W''_{m}"] = w_dd[m]
                el[f"W_{m}"] = w[m]
        if "u" in families:
            for m in range(1, n + 1):
                el[f"U_{m}"] = build_u(gram, m)
        if "omega" in families:
            ehf = None
            if "E" in el:
                ehf = (el["E"], el["H"], el["F"])
            omega, coeffs = build_omega(gram, el.get("W_2"), el.get("H"), ehf=ehf)
            el["omega"] = omega
            gs.meta["omega_coefficients"] = {
                "W_2": str(coeffs[0]),
                "H_(-1)H": str(coeffs[1]),
                "dH": str(coeffs[2]),
            }
        if "fermionic" in families:
            fer = build_fermionic(gram)
            el["alpha"] = vector_state(gram, fer.alpha)
            el["beta"] = vector_state(gram, fer.beta)
            el["Psi+"] = fer.psi_plus
            el["Psi-"] = fer.psi_minus
            el["e^beta"] = fer.e_beta
            el["e^-beta"] = fer.e_minus_beta
        return gs

    def state(self, name):
        if name not in self.elements:
            raise KeyError(f"unknown element {name!r}")
        return self.elements[name]

    def to_json(self):
        return {
            "n": self.meta["n"],
            "k": self.meta["k"],
            "elements": {
                name: st.to_json(self.gram)
                for name, st in sorted(self.elements.items())
            },
            "meta": {k: v for k, v in sorted(self.meta.items())},
        }

    @staticmethod
    def from_json(data, budget=10 ** 6):
        k = None if data["k"] == "symbolic" else Fraction(data["k"])
        gram = GramForm(data["n"], k=k, budget=budget)
        gs = GeneratorSet(gram=gram, meta=dict(data["meta"]))
        for name, st in data["elements"].items():
            gs.elements[name] = FockState.from_json(gram, st)
        return gs


def _w0_scalar(gram, w0_state):
    vac_mono = next(iter(FockState.vacuum(gram).terms))
    return w0_state.coefficient(vac_mono)
