"""Executable checks for the engine's structural identities.

Each check returns a :class:`CheckReport` with an exact pass/fail verdict;
a failing report always carries a witness (the first nonzero residual).
Randomized checks are deterministic given their seed, which is recorded.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial

from .scalar import ONE, ZERO, ScalarQ, sq
from .fock import (
    FockMonomial,
    FockState,
    GramForm,
    WeightVector,
    basis_symbols,
    mu_weight_vector,
    validate_pairings,
)
from .fields import (
    HeisenbergMode,
    Translation,
    apply_operator,
    heis_mode,
    lattice_mode,
    nth_product,
    singular_part,
    translate,
)
from .wgen import (
    build_ehf,
    build_fermionic,
    build_omega,
    build_u,
    build_w_all,
    build_w_prime_all,
    f_op,
    h_weight_vector,
    mu_vector,
    noncomm_esym,
    r_op,
    screening_coeff,
    vector_state,
)


@dataclass
class CheckReport:
    check: str
    params: dict = field(default_factory=dict)
    verdict: str = "pass"
    sign: int | None = None
    seed: int | None = None
    witness: object = None
    millis: int = 0

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_json(self):
        return {
            "check": self.check,
            "params": self.params,
            "verdict": self.verdict,
            "sign": self.sign,
            "seed": self.seed,
            "witness": self.witness,
            "millis": self.millis,
        }


class _Timer:
    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.millis = int((time.monotonic() - self.t0) * 1000)
        return False


def _k_label(gram):
    return "symbolic" if gram.k is None else str(gram.k)


def _fail(report, witness_state, gram=None, note=None):
    report.verdict = "fail"
    if isinstance(witness_state, FockState) and gram is not None:
        report.witness = witness_state.to_json(gram)
    else:
        report.witness = witness_state
    if note:
        report.params["failed_at"] = note
    return report


def random_state(gram, rng, charge_m=0, terms=2, max_modes=2, max_depth=2):
    """Random element of the charge-mY Fock module; deterministic per rng."""
    charge = gram.basis_vector("Y").scale(charge_m)
    out = FockState.zero()
    for _ in range(terms):
        modes = tuple(
            (rng.randrange(gram.n + 1), -rng.randint(1, max_depth))
            for _ in range(rng.randint(0, max_modes))
        )
        coeff = sq(Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        out = out + FockState({FockMonomial(charge, modes): ONE}).scale(coeff)
    return out


def screening_images(gram, v):
    """Images of a state under every screening operator, with labels."""
    out = [("e^Q_(0)", lattice_mode(gram, gram.basis_vector("Q"), 0, v))]
    for i in range(1, gram.n):
        out.append(
            (f"e^A{i}_(0)", lattice_mode(gram, gram.basis_vector(f"A{i}"), 0, v))
        )
    return out


# ---------------------------------------------------------------------------
# pairing table / negative control


def check_pairings(n, k=None, transpose=False):
    gram = GramForm(n, k=k, transpose=transpose)
    rep = CheckReport(
        "pairings", {"n": n, "k": _k_label(gram), "transpose": transpose}
    )
    with _Timer() as t:
        results = validate_pairings(gram)
        bad = [name for name, ok in results if not ok]
        if bad:
            _fail(rep, {"failed_identities": bad})
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# screening kernels


def check_screening_kernel(gram, v, name="state"):
    rep = CheckReport(
        "kernel", {"n": gram.n, "k": _k_label(gram), "element": name}
    )
    with _Timer() as t:
        for op_name, img in screening_images(gram, v):
            if not img.is_zero():
                _fail(rep, img, gram, note=op_name)
                break
    rep.millis = t.millis
    return rep


def kernel_reports(genset):
    """Kernel membership for every serious element of a generator set."""
    out = []
    skip = {"alpha", "beta", "Psi+", "Psi-", "e^beta", "e^-beta", "omega"}
    for name, st in sorted(genset.elements.items()):
        if name in skip:
            continue
        out.append(check_screening_kernel(genset.gram, st, name))
    return out


def check_kernel_negative_control(n, seed=0, k=None):
    """A random weight-two state must fall outside the screening kernels."""
    gram = GramForm(n, k=k)
    rep = CheckReport(
        "kernel-control", {"n": n, "k": _k_label(gram)}, seed=seed
    )
    rng = random.Random(seed)
    with _Timer() as t:
        witness = None
        for attempt in range(20):
            st = FockState.zero()
            for i in range(n + 1):
                st = st + FockState(
                    {FockMonomial(WeightVector.zero(n), ((i, -2),)): ONE}
                ).scale(Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
                j = rng.randrange(n + 1)
                st = st + FockState(
                    {FockMonomial(WeightVector.zero(n), ((i, -1), (j, -1))): ONE}
                ).scale(Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
            if st.is_zero():
                continue
            images = [img for _, img in screening_images(gram, st)]
            nonzero = [img for img in images if not img.is_zero()]
            if nonzero:
                witness = nonzero[0]
                rep.params["attempts"] = attempt + 1
                break
        if witness is None:
            _fail(rep, {"note": "random weight-2 states kept landing in the kernel"})
        else:
            rep.witness = witness.to_json(gram)
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# screening commutator tables


def comm_case_coefficient(gram, screen_sym, j, m):
    """Exact commutator coefficient: m(K-1) + (screening vector, mu_j).

    Matches the stated case tables for the A-screenings and for the
    Q-screening at j >= 1; at j = 0 the Gram data forces (m-1)(K-1).
    """
    x = gram.basis_vector(screen_sym)
    return sq(m) * (gram.K - 1) + gram.pairing(x, mu_weight_vector(gram, j))


def check_comm_lemma(gram, trials=100, seed=0):
    """All six commutator cases on random module states.

    Cases: A-screenings with j = i, j = i+1, j otherwise; Q-screening with
    j = 0, j = 1, j >= 2.  Each case is exercised ``trials`` times with
    fresh random states, sectors and mode indices.
    """
    n = gram.n
    rep = CheckReport(
        "comm",
        {
            "n": n,
            "k": _k_label(gram),
            "trials": trials,
            "q_row_j0": "(m-1)(K-1)",
        },
        seed=seed,
    )
    rng = random.Random(seed)
    f_ops = [f_op(gram, j) for j in range(n + 1)]

    def run_case(case_name, picks):
        for _ in range(trials):
            sym, j = picks(rng)
            m = rng.choice([-1, 0, 1])
            sector = rng.choice([-1, 0, 1])
            v = random_state(gram, rng, charge_m=sector)
            x = gram.basis_vector(sym)
            lhs = lattice_mode(gram, x, m, apply_operator(gram, f_ops[j], v))
            lhs = lhs - apply_operator(gram, f_ops[j], lattice_mode(gram, x, m, v))
            coeff = comm_case_coefficient(gram, sym, j, m)
            rhs = lattice_mode(gram, x, m - 1, v).scale(coeff)
            if lhs != rhs:
                return case_name, (lhs - rhs), {"sym": sym, "j": j, "m": m}
        return None

    def pick_a_eq(rng):
        i = rng.randint(1, n - 1)
        return f"A{i}", i

    def pick_a_next(rng):
        i = rng.randint(1, n - 1)
        return f"A{i}", i + 1

    def pick_a_other(rng):
        i = rng.randint(1, n - 1)
        j = rng.choice([j for j in range(n + 1) if j not in (i, i + 1)])
        return f"A{i}", j

    cases = [
        ("A j=i", pick_a_eq),
        ("A j=i+1", pick_a_next),
        ("A j other", pick_a_other),
        ("Q j=0", lambda r: ("Q", 0)),
        ("Q j=1", lambda r: ("Q", 1)),
        ("Q j>=2", lambda r: ("Q", r.randint(2, n))),
    ]
    with _Timer() as t:
        for case_name, picks in cases:
            bad = run_case(case_name, picks)
            if bad is not None:
                name, residual, where = bad
                rep.params["case"] = name
                rep.params.update(where)
                _fail(rep, residual, gram, note=name)
                break
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# the binomial / hypergeometric identity (exact polynomials in q)


def _qpoly_add(a, b):
    out = list(a) + [Fraction(0)] * (len(b) - len(a))
    for i, c in enumerate(b):
        out[i] += c
    while out and not out[-1]:
        out.pop()
    return out


def _qpoly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    while out and not out[-1]:
        out.pop()
    return out


def hypergeom_sides(n, m, k):
    """Both sides of the binomial summation identity as polynomials in q."""
    lhs = []
    for l in range(k, n + 1):
        term = [Fraction((-1) ** (l - k)) * comb(n - m + k, l) * comb(l, k)]
        for j in range(k + 1, l + 1):
            term = _qpoly_mul(term, [Fraction(1), Fraction(1, j)])
        lhs = _qpoly_add(lhs, term)
    rhs = [Fraction((-1) ** (n - m), factorial(n - m))]
    for j in range(0, n - m):
        rhs = _qpoly_mul(rhs, [Fraction(-j), Fraction(1)])
    return lhs, rhs


def check_hypergeom(max_n=6):
    rep = CheckReport("hypergeom", {"max_n": max_n})
    with _Timer() as t:
        for n in range(0, max_n + 1):
            for m in range(0, n + 1):
                for k in range(0, m + 1):
                    lhs, rhs = hypergeom_sides(n, m, k)
                    if lhs != rhs:
                        _fail(
                            rep,
                            {
                                "n": n,
                                "m": m,
                                "k": k,
                                "lhs": [str(c) for c in lhs],
                                "rhs": [str(c) for c in rhs],
                            },
                        )
                        rep.millis = t.millis
                        return rep
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# operator rearrangement and the W'' normalization


def check_rearrangement(gram):
    """Both sides of the slot-rearrangement identity applied to the vacuum,
    with the generator operators substituted, for every m; plus the two
    equivalent expansions of W''_m."""
    n = gram.n
    rep = CheckReport("rearrange", {"n": n, "k": _k_label(gram)})
    vac = FockState.vacuum(gram)
    f_ops = [f_op(gram, i) for i in range(n + 1)]
    with _Timer() as t:
        for m in range(1, n + 1):
            lhs = FockState.zero()
            for k in range(0, n + 1):
                ck = screening_coeff(gram, k) * ((-1) ** k)
                for subset in combinations(range(1, n + 1), n - k):
                    ops = [f_ops[0]] * k + [f_ops[i] for i in subset]
                    lhs = lhs + noncomm_esym(gram, m, ops, vac).scale(ck)
            pref = ONE
            for j in range(1, n - m + 1):
                pref = pref * (sq(j) * (gram.K - 1) - gram.K) / (
                    sq(j) * (gram.K - 1)
                )
            rhs = FockState.zero()
            tgt = vac
            for k in range(0, m + 1):
                if k > 0:
                    tgt = apply_operator(gram, f_ops[0], tgt)
                ck = screening_coeff(gram, k) * ((-1) ** k)
                rhs = rhs + noncomm_esym(gram, m - k, f_ops[1:], tgt).scale(ck)
            if lhs != rhs.scale(pref):
                _fail(rep, lhs - rhs.scale(pref), gram, note=f"m={m}")
                break
        else:
            # W''_m two routes
            wp = build_w_prime_all(gram)
            w_dd, _ = build_w_all(gram, wp)
            for m in range(1, n + 1):
                rhs = FockState.zero()
                tgt = vac
                for k in range(0, m + 1):
                    if k > 0:
                        tgt = apply_operator(gram, f_ops[0], tgt)
                    c = screening_coeff(gram, k) * ((-1) ** (m + k))
                    rhs = rhs + noncomm_esym(gram, m - k, f_ops[1:], tgt).scale(c)
                if w_dd[m] != rhs:
                    _fail(rep, w_dd[m] - rhs, gram, note=f"W''_{m}")
                    break
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# conformal vector


def check_conformal(gram):
    n = gram.n
    rep = CheckReport("conformal", {"n": n, "k": _k_label(gram)})
    with _Timer() as t:
        e, h, f = build_ehf(gram)
        wp = build_w_prime_all(gram)
        _, w = build_w_all(gram, wp)
        om, coeffs = build_omega(gram, w[2], h, ehf=(e, h, f))
        rep.params["coefficients"] = {
            "W_2": str(coeffs[0]),
            "H_(-1)H": str(coeffs[1]),
            "dH": str(coeffs[2]),
        }
        axioms = [
            ("omega_(0)omega = d omega", nth_product(gram, om, 0, om), translate(gram, om)),
            ("omega_(1)omega = 2 omega", nth_product(gram, om, 1, om), om.scale(2)),
            ("omega_(2)omega = 0", nth_product(gram, om, 2, om), FockState.zero()),
        ]
        for name, got, want in axioms:
            if got != want:
                _fail(rep, got - want, gram, note=name)
                rep.millis = t.millis
                return rep
        central = nth_product(gram, om, 3, om)
        vac_mono = next(iter(FockState.vacuum(gram).terms))
        cc = central.coefficient(vac_mono) * 2
        if central != FockState.vacuum(gram).scale(cc / 2):
            _fail(rep, central, gram, note="omega_(3)omega not a vacuum multiple")
            rep.millis = t.millis
            return rep
        rep.params["central_charge"] = str(cc)
        targets = [("E", e, 1), ("H", h, 1), ("F", f, n - 1)]
        for m in range(2, n):
            targets.append((f"W_{m}", w[m], m))
        for name, x, d in targets:
            if nth_product(gram, om, 1, x) != x.scale(d):
                _fail(rep, nth_product(gram, om, 1, x) - x.scale(d), gram,
                      note=f"omega_(1){name} != {d}*{name}")
                break
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# critical level


def _require_critical(gram, rep):
    if gram.k != 0:
        raise ValueError(f"check {rep.check!r} requires K = 0")


def dmh_power(gram, h_state, p, target):
    """(d - H_(-1))^p applied to a state."""
    for _ in range(p):
        target = translate(gram, target) - nth_product(gram, h_state, -1, target)
    return target


def check_critical_esym(gram):
    """At K = 0 the normalized generators collapse to the shifted
    noncommutative elementary symmetric polynomials of the mu-modes."""
    rep = CheckReport("critical", {"n": gram.n, "k": _k_label(gram)})
    _require_critical(gram, rep)
    n = gram.n
    with _Timer() as t:
        wp = build_w_prime_all(gram)
        _, w = build_w_all(gram, wp)
        vac = FockState.vacuum(gram)
        ops = [
            Translation() + HeisenbergMode(mu_vector(gram, i), -1)
            for i in range(1, n + 1)
        ]
        for m in range(2, n + 1):
            want = noncomm_esym(gram, m, ops, vac)
            if w[m] != want:
                _fail(rep, w[m] - want, gram, note=f"W_{m} != e_{m}(d+mu)1")
                break
            alt = wp[m].scale((-1) ** m)
            if w[m] != alt:
                _fail(rep, w[m] - alt, gram, note=f"W_{m} != (-1)^{m} W'_{m}")
                break
    rep.millis = t.millis
    return rep


def check_centrality(gram):
    """Every W_m commutes with all generators at K = 0, while the control
    pairs (H, E) at K = 0 and (E, W_2) at symbolic K stay non-central."""
    rep = CheckReport("centrality", {"n": gram.n, "k": _k_label(gram)})
    _require_critical(gram, rep)
    n = gram.n
    with _Timer() as t:
        e, h, f = build_ehf(gram)
        _, w = build_w_all(gram)
        others = {"E": e, "H": h, "F": f}
        for m in range(2, n + 1):
            others[f"W_{m}"] = w[m]
        for m in range(2, n + 1):
            for name, a in sorted(others.items()):
                sp = singular_part(gram, a, w[m])
                if not sp.is_regular():
                    _fail(rep, sp[min(sp.parts)], gram, note=f"({name}, W_{m})")
                    rep.millis = t.millis
                    return rep
        if singular_part(gram, h, e).is_regular():
            _fail(rep, {"note": "control failed: (H, E) OPE came out regular"})
            rep.millis = t.millis
            return rep
        gsym = GramForm(n, budget=gram.budget)
        _, wsym = build_w_all(gsym)
        esym = FockState.highest_weight(gsym.basis_vector("Y"))
        if singular_part(gsym, esym, wsym[2]).is_regular():
            _fail(
                rep,
                {"note": "control failed: (E, W_2) regular at symbolic K"},
            )
        else:
            rep.params["controls"] = "non-central controls behaved"
    rep.millis = t.millis
    return rep


def check_esym_shift(gram):
    """The derivative-shift expansion of the symmetric polynomials:
    e_m(d - H_(-1) + mu_i_(-1)) 1 = sum_k C(N-k, m-k) W_k(-1) (d - H_(-1))^{m-k} 1."""
    rep = CheckReport("esym-shift", {"n": gram.n, "k": _k_label(gram)})
    _require_critical(gram, rep)
    n = gram.n
    with _Timer() as t:
        _, w = build_w_all(gram)
        h = vector_state(gram, h_weight_vector(gram))
        vac = FockState.vacuum(gram)
        w_states = [vac, FockState.zero()] + [w[m] for m in range(2, n + 1)]
        ops = [
            Translation()
            - HeisenbergMode(h_weight_vector(gram), -1)
            + HeisenbergMode(mu_vector(gram, i), -1)
            for i in range(1, n + 1)
        ]
        for m in range(0, n + 1):
            lhs = noncomm_esym(gram, m, ops, vac)
            rhs = FockState.zero()
            for k in range(0, m + 1):
                term = nth_product(
                    gram, w_states[k], -1, dmh_power(gram, h, m - k, vac)
                )
                rhs = rhs + term.scale(comb(n - k, m - k))
            if lhs != rhs:
                _fail(rep, lhs - rhs, gram, note=f"m={m}")
                break
    rep.millis = t.millis
    return rep


def ef_closed_form(gram, w_states, h_state, n_idx):
    """Closed form for E_(n)F at K = 0 in terms of the central generators."""
    n = gram.n
    if n_idx >= n:
        return FockState.zero()
    vac = FockState.vacuum(gram)
    out = FockState.zero()
    for k in range(0, n - n_idx):
        term = nth_product(
            gram, w_states[k], -1, dmh_power(gram, h_state, n - n_idx - k - 1, vac)
        )
        out = out + term.scale(comb(n - k, n - n_idx - k - 1))
    return out.scale(factorial(n_idx + 1) * (-1) ** (n + 1))


def check_ef_ope(gram, seed=0, trials=25):
    """E_(n)F against the closed form for every n >= 0, plus the critical
    commutation [e^Y_(m), R_i] = (-m-1) e^Y_(m-1) on random states."""
    rep = CheckReport(
        "ef-ope", {"n": gram.n, "k": _k_label(gram), "trials": trials}, seed=seed
    )
    _require_critical(gram, rep)
    n = gram.n
    rng = random.Random(seed)
    with _Timer() as t:
        e, h, f = build_ehf(gram)
        _, w = build_w_all(gram)
        vac = FockState.vacuum(gram)
        w_states = [vac, FockState.zero()] + [w[m] for m in range(2, n + 1)]
        for n_idx in range(0, n + 2):
            got = nth_product(gram, e, n_idx, f)
            want = ef_closed_form(gram, w_states, h, n_idx)
            if got != want:
                _fail(rep, got - want, gram, note=f"E_({n_idx})F")
                rep.millis = t.millis
                return rep
        y = gram.basis_vector("Y")
        for _ in range(trials):
            i = rng.randint(1, n)
            m = rng.choice([-1, 0, 1])
            v = random_state(gram, rng, charge_m=rng.choice([-1, 0, 1]))
            ri = r_op(gram, i)
            lhs = lattice_mode(gram, y, m, apply_operator(gram, ri, v))
            lhs = lhs - apply_operator(gram, ri, lattice_mode(gram, y, m, v))
            rhs = lattice_mode(gram, y, m - 1, v).scale(-m - 1)
            if lhs != rhs:
                _fail(rep, lhs - rhs, gram, note=f"[e^Y_({m}), R_{i}]")
                break
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# fermionic realization


def check_fermionic(gram):
    """The three critical-level fermionic identities, up to one global sign."""
    rep = CheckReport("fermionic", {"n": gram.n, "k": _k_label(gram)})
    _require_critical(gram, rep)
    n = gram.n
    with _Timer() as t:
        fer = build_fermionic(gram)
        e, h, f = build_ehf(gram)
        _, w = build_w_all(gram)
        vac = FockState.vacuum(gram)
        w_states = [vac, FockState.zero()] + [w[m] for m in range(2, n + 1)]
        # (a) e^beta_(-1) Psi+ = s E
        got_a = nth_product(gram, fer.e_beta, -1, fer.psi_plus)
        sign = None
        for s in (1, -1):
            if got_a == e.scale(s):
                sign = s
                break
        if sign is None:
            _fail(rep, got_a, gram, note="e^beta_(-1)Psi+ not proportional to E")
            rep.millis = t.millis
            return rep
        rep.sign = sign
        # (b) F = s (-1)^{N+1} sum_m W_m(-1) (d^{N-m} Psi-)_(-1) e^{-beta}
        rhs = FockState.zero()
        for m in range(0, n + 1):
            dpsi = fer.psi_minus
            for _ in range(n - m):
                dpsi = translate(gram, dpsi)
            rhs = rhs + nth_product(
                gram, w_states[m], -1, nth_product(gram, dpsi, -1, fer.e_minus_beta)
            )
        rhs = rhs.scale(sign * (-1) ** (n + 1))
        if f != rhs:
            _fail(rep, f - rhs, gram, note="F vs fermionic expansion")
            rep.millis = t.millis
            return rep
        # (c) fermion pairing and regularity
        got_c = nth_product(gram, fer.psi_plus, 0, fer.psi_minus)
        if got_c != vac.scale(sign):
            _fail(rep, got_c, gram, note="Psi+_(0)Psi- vs sign*|0>")
            rep.millis = t.millis
            return rep
        for psi in (fer.psi_plus, fer.psi_minus):
            for n_idx in (-1, 0, 1, 2):
                if not nth_product(gram, psi, n_idx, psi).is_zero():
                    _fail(rep, nth_product(gram, psi, n_idx, psi), gram,
                          note=f"Psi_(n)Psi nonzero at n={n_idx}")
                    rep.millis = t.millis
                    return rep
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# U-family integrality


def check_u_integrality(n, budget=10 ** 6):
    """U_m coefficients carry no (K-1) denominator; the family builds and
    stays in the kernels at the excluded level K = 1."""
    rep = CheckReport("u-integral", {"n": n, "k": "symbolic and 1"})
    with _Timer() as t:
        gram = GramForm(n, budget=budget)
        for m in range(1, n + 1):
            u = build_u(gram, m)
            for mono, c in u.terms.items():
                if c.den_vanishes_at(1):
                    _fail(rep, FockState({mono: c}), gram,
                          note=f"U_{m} coefficient has a (K-1) pole")
                    rep.millis = t.millis
                    return rep
        g1 = GramForm(n, k=1, budget=budget)
        for m in range(1, n + 1):
            u1 = build_u(g1, m)
            if u1.is_zero():
                _fail(rep, {"note": f"U_{m} vanished at K = 1"})
                rep.millis = t.millis
                return rep
            for op_name, img in screening_images(g1, u1):
                if not img.is_zero():
                    _fail(rep, img, g1, note=f"U_{m} at K=1 under {op_name}")
                    rep.millis = t.millis
                    return rep
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# the C2 quotient


class C2Poly:
    """Polynomial in the mode symbols Qbar, A1bar..A{N-1}bar with a charge
    marker: a term (m, exps) stands for Ebar^m times the monomial in the
    bar variables (negative m marks the e^{-|m| Y} sectors).  Ybar is 0.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        cleaned = {}
        if terms:
            for key, c in terms.items():
                if not c.is_zero():
                    cleaned[key] = c
        self.terms = cleaned

    @staticmethod
    def zero(n):
        return C2Poly(n)

    @staticmethod
    def one(n):
        return C2Poly(n, {(0, (0,) * n): ONE})

    @staticmethod
    def var(n, idx):
        exps = [0] * n
        exps[idx] = 1
        return C2Poly(n, {(0, tuple(exps)): ONE})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, ZERO) + c
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return C2Poly(self.n, out)

    def __sub__(self, other):
        return self + other.scale(sq(-1))

    def scale(self, c):
        c = c if isinstance(c, ScalarQ) else sq(c)
        return C2Poly(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for (m1, e1), c1 in self.terms.items():
            for (m2, e2), c2 in other.terms.items():
                key = (m1 + m2, tuple(a + b for a, b in zip(e1, e2)))
                s = out.get(key, ZERO) + c1 * c2
                if s.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = s
        return C2Poly(self.n, out)

    def __pow__(self, p):
        out = C2Poly.one(self.n)
        for _ in range(p):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, C2Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def derivative(self, idx):
        out = {}
        for (m, exps), c in self.terms.items():
            if exps[idx]:
                new = list(exps)
                new[idx] -= 1
                key = (m, tuple(new))
                out[key] = out.get(key, ZERO) + c * exps[idx]
        return C2Poly(self.n, out)

    def eval_constants(self, point):
        """Evaluate a marker-free polynomial at a rational point."""
        total = Fraction(0)
        for (m, exps), c in self.terms.items():
            if m != 0:
                raise ValueError("cannot evaluate a charged C2 element")
            f = c.constant()
            if f is None:
                raise ValueError("cannot evaluate K-dependent coefficients")
            v = f
            for x, e in zip(point, exps):
                v *= x ** e
            total += v
        return total

    def max_q_degree(self):
        return max((exps[0] for (_, exps) in self.terms), default=0)

    def __str__(self):
        if not self.terms:
            return "0"
        names = ["Qbar"] + [f"A{i}bar" for i in range(1, self.n)]
        parts = []
        for (m, exps), c in sorted(self.terms.items()):
            factors = []
            if m > 0:
                factors.append(f"Ebar^{m}" if m > 1 else "Ebar")
            elif m < 0:
                factors.append(f"Fbar^{-m}" if m < -1 else "Fbar")
            for nm, e in zip(names, exps):
                if e:
                    factors.append(f"{nm}^{e}" if e > 1 else nm)
            body = "*".join(factors) if factors else "1"
            parts.append(f"({c})*{body}")
        return " + ".join(parts)

    def to_json(self):
        return [
            {"charge": m, "exps": list(exps), "coeff": c.to_json()}
            for (m, exps), c in sorted(self.terms.items())
        ]


def c2_reduce(gram, v):
    """Image of a state in the C2 quotient.

    Modes of depth two or more vanish, Y_(-1) vanishes, the remaining
    (-1)-modes become commuting bar variables, and a charge m Y becomes the
    marker power m.  Charges outside the Y-line are unsupported.
    """
    n = gram.n
    y_idx = gram.sym_index("Y")
    out = {}
    for mono, c in v.terms.items():
        coords = mono.charge.fraction_coords()
        if coords is None:
            raise ValueError("unsupported charge for C2 reduction")
        m_y = coords[y_idx]
        if m_y.denominator != 1 or any(
            coords[i] != 0 for i in range(n + 1) if i != y_idx
        ):
            raise ValueError(
                "unsupported charge for C2 reduction: not on the Y-line"
            )
        if any(d <= -2 for _, d in mono.modes):
            continue
        if any(s == y_idx for s, _ in mono.modes):
            continue
        exps = [0] * n
        for s, _ in mono.modes:
            # internal symbol order is Y, Q, A1..; bar variables drop Y
            exps[s - 1] += 1
        key = (int(m_y), tuple(exps))
        s = out.get(key, ZERO) + c
        if s.is_zero():
            out.pop(key, None)
        else:
            out[key] = s
    return C2Poly(n, out)


def mu_bar(gram, i):
    return c2_reduce(gram, vector_state(gram, mu_vector(gram, i)))


def esym_bar(gram, m):
    """e_m of the commuting mu-bar polynomials."""
    mus = [mu_bar(gram, i) for i in range(1, gram.n + 1)]
    out = C2Poly.zero(gram.n)
    for subset in combinations(range(gram.n), m):
        term = C2Poly.one(gram.n)
        for i in subset:
            term = term * mus[i]
        out = out + term
    return out


def check_c2_lead_term(gram):
    """W_m reduces to e_m(mu_bar) in the C2 quotient."""
    rep = CheckReport("c2-lead-term", {"n": gram.n, "k": _k_label(gram)})
    with _Timer() as t:
        _, w = build_w_all(gram)
        for m in range(1, gram.n + 1):
            got = c2_reduce(gram, w[m])
            want = esym_bar(gram, m) if m >= 2 else C2Poly.zero(gram.n)
            if got != want:
                _fail(rep, {"m": m, "got": str(got), "want": str(want)})
                break
    rep.millis = t.millis
    return rep


def _rank(matrix):
    m = [row[:] for row in matrix]
    rank = 0
    rows, cols = len(m), len(m[0]) if m else 0
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = m[rank][col]
        m[rank] = [x / inv for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def check_c2_relations(n, seed=0, budget=10 ** 6):
    """The C2 Poisson layer: the E-bar F-bar relation at K = 0, algebraic
    independence via Jacobian rank, and the weight-one Poisson brackets."""
    rep = CheckReport("c2", {"n": n}, seed=seed)
    rng = random.Random(seed)
    with _Timer() as t:
        gram = GramForm(n, k=0, budget=budget)
        e, h, f = build_ehf(gram)
        _, w = build_w_all(gram)
        vac = FockState.vacuum(gram)
        h_bar = c2_reduce(gram, h)
        # (a) Ebar Fbar = sum_k (-1)^{k+1} Wbar_k Hbar^{N-k}
        ef_bar = c2_reduce(gram, nth_product(gram, e, -1, f))
        w_bars = [C2Poly.one(n), C2Poly.zero(n)] + [
            c2_reduce(gram, w[m]) for m in range(2, n + 1)
        ]
        want = C2Poly.zero(n)
        for k in range(0, n + 1):
            term = (w_bars[k] * h_bar ** (n - k)).scale((-1) ** (k + 1))
            want = want + term
        if ef_bar != want:
            _fail(rep, {"got": str(ef_bar), "want": str(want)},
                  note="Ebar*Fbar relation")
            rep.millis = t.millis
            return rep
        rep.params["ef_relation"] = str(want)
        # (b) Jacobian of (ebar_2..ebar_N) in the A-variables has rank N-1
        ebars = [esym_bar(gram, m) for m in range(2, n + 1)]
        if any(p.max_q_degree() for p in ebars):
            _fail(rep, {"note": "ebar_m unexpectedly involves Qbar"})
            rep.millis = t.millis
            return rep
        if h_bar.max_q_degree() != 1:
            _fail(rep, {"note": "Hbar does not involve Qbar"})
            rep.millis = t.millis
            return rep
        derivs = [[p.derivative(j) for j in range(1, n)] for p in ebars]
        ok_rank = False
        points = []
        for _ in range(3):
            point = tuple(
                Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)
            )
            points.append([str(x) for x in point])
            matrix = [
                [d.eval_constants(point) for d in row] for row in derivs
            ]
            if _rank(matrix) == n - 1:
                ok_rank = True
                break
        rep.params["jacobian_points"] = points
        if not ok_rank:
            _fail(rep, {"note": "Jacobian rank below N-1 at three points"})
            rep.millis = t.millis
            return rep
        # (c) brackets of the weight-one generators
        f_bar = c2_reduce(gram, f)
        if c2_reduce(gram, nth_product(gram, h, 0, e)) != c2_reduce(gram, e):
            _fail(rep, {"note": "{Hbar, Ebar} != Ebar"})
            rep.millis = t.millis
            return rep
        if c2_reduce(gram, nth_product(gram, h, 0, f)) != f_bar.scale(-1):
            _fail(rep, {"note": "{Hbar, Fbar} != -Fbar"})
            rep.millis = t.millis
            return rep
        # report which coefficient pattern {Ebar, Fbar} actually satisfies
        ef0_bar = c2_reduce(gram, nth_product(gram, e, 0, f))
        patterns = {
            "(-1)^k (N-k)": lambda k: sq((-1) ** k * (n - k)),
            "(-1)^(k+1) (k+1)": lambda k: sq((-1) ** (k + 1) * (k + 1)),
            "(-1)^(k+1) (N-k)": lambda k: sq((-1) ** (k + 1) * (n - k)),
        }
        matched = []
        for name, coeff in patterns.items():
            cand = C2Poly.zero(n)
            for k in range(0, n):
                cand = cand + (w_bars[k] * h_bar ** (n - k - 1)).scale(coeff(k))
            if cand == ef0_bar:
                matched.append(name)
        rep.params["ef_bracket_pattern"] = matched
        if not matched:
            _fail(rep, {"got": str(ef0_bar), "note": "{Ebar,Fbar} matched no pattern"})
    rep.millis = t.millis
    return rep


# ---------------------------------------------------------------------------
# suite runner


SUITE_CHECKS = (
    "pairings",
    "kernel",
    "kernel-control",
    "comm",
    "hypergeom",
    "rearrange",
    "conformal",
    "critical",
    "centrality",
    "esym-shift",
    "ef-ope",
    "fermionic",
    "c2",
    "u-integral",
)


def run_suite(names, n, k=None, seed=0, trials=100, budget=10 ** 6, transpose=False):
    """Run the named checks for one (N, K) configuration."""
    from .wgen import GeneratorSet

    reports = []
    for name in names:
        if name not in SUITE_CHECKS:
            raise ValueError(f"unknown check {name!r}")
    for name in names:
        if name == "pairings":
            reports.append(check_pairings(n, k=k, transpose=transpose))
        elif name == "kernel":
            if transpose:
                gs = _rebuild_transposed(n, k, budget)
            else:
                gs = GeneratorSet.build(n, k=k, budget=budget)
            reports.extend(kernel_reports(gs))
        elif name == "kernel-control":
            reports.append(check_kernel_negative_control(n, seed=seed, k=k))
        elif name == "comm":
            gram = GramForm(n, k=k, budget=budget)
            reports.append(check_comm_lemma(gram, trials=trials, seed=seed))
        elif name == "hypergeom":
            reports.append(check_hypergeom(max_n=max(6, n)))
        elif name == "rearrange":
            reports.append(check_rearrangement(GramForm(n, k=k, budget=budget)))
        elif name == "conformal":
            reports.append(check_conformal(GramForm(n, k=k, budget=budget)))
        elif name == "critical":
            reports.append(check_critical_esym(GramForm(n, k=k, budget=budget)))
        elif name == "centrality":
            reports.append(check_centrality(GramForm(n, k=k, budget=budget)))
        elif name == "esym-shift":
            reports.append(check_esym_shift(GramForm(n, k=k, budget=budget)))
        elif name == "ef-ope":
            reports.append(
                check_ef_ope(GramForm(n, k=k, budget=budget), seed=seed)
            )
        elif name == "fermionic":
            reports.append(check_fermionic(GramForm(n, k=k, budget=budget)))
        elif name == "c2":
            k_lead = k if k not in (None, 1) else Fraction(5, 7)
            gram = GramForm(n, k=k_lead, budget=budget)
            reports.append(check_c2_lead_term(gram))
            reports.append(check_c2_relations(n, seed=seed, budget=budget))
        elif name == "u-integral":
            reports.append(check_u_integrality(n, budget=budget))
    return reports


def _rebuild_transposed(n, k, budget):
    """A generator set over the deliberately transposed Gram form; the
    negative-control path for the kernel suite."""
    from .wgen import GeneratorSet

    gram = GramForm(n, k=k, transpose=True, budget=budget)
    gs = GeneratorSet(gram=gram)
    gs.meta["n"] = n
    gs.meta["k"] = _k_label(gram)
    e, h, f = build_ehf(gram)
    gs.elements.update({"E": e, "H": h, "F": f})
    try:
        wp = build_w_prime_all(gram)
        for m in range(1, n + 1):
            gs.elements[f"W'_{m}"] = wp[m]
    except Exception:
        pass
    return gs
