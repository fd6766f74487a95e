"""Mode actions and exact n-th products on Fock states.

The engine realizes the state-field correspondence for free fields:
Heisenberg modes act by creation/contraction, lattice vertex operators by
the standard two-exponential formula, and a general n-th product a_(n)b is
reduced to those base cases by peeling creation modes off the left factor
with the iterate identity

    (u_(-m) a')_(n) b = sum_{j>=0} C(j+m-1, m-1) u_(-j-m) (a'_(n+j) b)
        + (-1)^(m-1) sum_{j>=m-1} C(j, m-1) a'_(n-1-j) (u_(j-m+1) b).

All sums are finite: a monomial product x_(n)y vanishes once
n >= depth(x) + depth(y) - (charge(x), charge(y)), which is an integer
whenever the product is defined at all.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .scalar import ONE, ZERO, ScalarQ, sq
from .fock import FockMonomial, FockState, WeightVector


class BudgetExhaustedError(RuntimeError):
    """A single product exceeded the configured term-operation budget."""


def _charge_int_pairing(gram, va, vb):
    return gram.int_pairing(va, vb)


def _guard(gram):
    gram._ops += 1
    if gram._ops - gram._ops_floor > gram.budget:
        raise BudgetExhaustedError(
            f"product exceeded term budget of {gram.budget} operations"
        )


# ---------------------------------------------------------------------------
# Heisenberg modes


def heis_mode(gram, a, n, v):
    """Apply the Heisenberg mode a_(n) of a weight vector a to a state."""
    if v.is_zero():
        return v
    coords = [(i, c) for i, c in enumerate(a.coords) if not c.is_zero()]
    if not coords:
        return FockState.zero()
    out = {}
    if n < 0:
        for mono, cv in v.terms.items():
            for i, ca in coords:
                _acc(out, mono.with_mode(i, n), cv * ca)
    elif n == 0:
        for mono, cv in v.terms.items():
            p = gram.pairing(a, mono.charge)
            if not p.is_zero():
                _acc(out, mono, cv * p)
    else:
        for mono, cv in v.terms.items():
            for pos, (s, m) in enumerate(mono.modes):
                if m == -n:
                    p = _vec_sym_pairing(gram, a, s)
                    if not p.is_zero():
                        _acc(out, mono.drop_slot(pos), cv * p * n)
    return FockState(out)


def _vec_sym_pairing(gram, a, sym_idx):
    out = ZERO
    row = gram._table[sym_idx]
    for i, ca in enumerate(a.coords):
        if not ca.is_zero() and not row[i].is_zero():
            out = out + ca * row[i]
    return out


def _acc(out, mono, c):
    if c.is_zero():
        return
    prev = out.get(mono)
    if prev is None:
        out[mono] = c
    else:
        s = prev + c
        if s.is_zero():
            del out[mono]
        else:
            out[mono] = s


def translate(gram, v):
    """The translation operator T: T e^{int w} = w_(-1) e^{int w} and
    T(a_(-n) x) = n a_(-n-1) x + a_(-n) T(x)."""
    out = {}
    for mono, cv in v.terms.items():
        for pos, (s, m) in enumerate(mono.modes):
            _acc(out, mono.replace_slot(pos, (s, m - 1)), cv * (-m))
        for i, c in enumerate(mono.charge.coords):
            if not c.is_zero():
                _acc(out, mono.with_mode(i, -1), cv * c)
    return FockState(out)


# ---------------------------------------------------------------------------
# lattice vertex-operator modes


def _hp_expansion(gram, b, p):
    """Degree-p piece of exp(sum_k b_(-k) z^k / k), expanded over the basis.

    Returns a list of (ScalarQ coefficient, modes tuple); cached per (b, p).
    """
    key = (b, p)
    hit = gram._hp_cache.get(key)
    if hit is not None:
        return hit
    coords = [(i, c) for i, c in enumerate(b.coords) if not c.is_zero()]
    terms = {}
    for lam in _partitions(p):
        zlam = 1
        mult = {}
        for part in lam:
            mult[part] = mult.get(part, 0) + 1
        for part, m in mult.items():
            zlam *= part ** m * factorial(m)
        base = sq(Fraction(1, zlam))
        # expand prod_k b_(-k) with b = sum_i c_i * basis_i
        stack = [((), ONE)]
        for part in lam:
            stack = [
                (modes + ((i, -part),), coef * ci)
                for modes, coef in stack
                for i, ci in coords
            ]
        for modes, coef in stack:
            mono_modes = tuple(sorted(modes, key=lambda t: (t[0], -t[1])))
            c = base * coef
            prev = terms.get(mono_modes)
            terms[mono_modes] = c if prev is None else prev + c
    result = [(c, m) for m, c in terms.items() if not c.is_zero()]
    gram._hp_cache[key] = result
    return result


def _partitions(p):
    if p == 0:
        yield ()
        return
    def gen(rest, maxpart):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, maxpart), 0, -1):
            for tail in gen(rest - first, first):
                yield (first,) + tail
    yield from gen(p, p)


def lattice_mode(gram, b, n, v):
    """Apply the mode e^{int b}_(n) of a lattice vertex operator to a state.

    Requires the pairing (b, w) with every charge sector w of v to be a
    K-free integer; raises NonLocalSectorError otherwise.
    """
    out = {}
    for mono, cv in v.terms.items():
        d = gram.int_pairing(b, mono.charge)
        new_charge = mono.charge + b
        eps = gram.cocycle_sign(b, mono.charge)
        base = cv if eps == 1 else -cv
        # contraction weight of each slot under the annihilation exponential
        slots = []
        for pos, (s, m) in enumerate(mono.modes):
            gamma = -_vec_sym_pairing(gram, b, s)
            if not gamma.is_zero():
                slots.append((pos, -m, gamma))
        kept_all = mono.modes
        for subset_mask in range(1 << len(slots)):
            q = 0
            coef = base
            removed = []
            mask = subset_mask
            idx = 0
            while mask:
                if mask & 1:
                    pos, depth_, gamma = slots[idx]
                    q += depth_
                    coef = coef * gamma
                    removed.append(pos)
                mask >>= 1
                idx += 1
            p = -n - 1 - d + q
            if p < 0:
                continue
            if removed:
                removed_set = set(removed)
                kept = tuple(
                    e for i, e in enumerate(kept_all) if i not in removed_set
                )
            else:
                kept = kept_all
            for hc, hmodes in _hp_expansion(gram, b, p):
                _acc(
                    out,
                    FockMonomial(new_charge, kept + hmodes),
                    coef * hc,
                )
    return FockState(out)


# ---------------------------------------------------------------------------
# general n-th products


def nth_product(gram, a, n, b):
    """The n-th product a_(n) b of two states, computed exactly."""
    entered = gram._depth == 0
    if entered:
        gram._ops_floor = gram._ops
    gram._depth += 1
    try:
        out = FockState.zero()
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                prod = _mono_product(gram, ma, n, mb)
                if prod.terms:
                    out = out + prod.scale(ca * cb)
        return out
    finally:
        gram._depth -= 1


_EMPTY = FockState.zero()


def _mono_product(gram, ma, n, mb):
    d = gram.int_pairing(ma.charge, mb.charge)
    if n >= ma.depth + mb.depth - d:
        return _EMPTY
    key = (ma, n, mb)
    hit = gram._memo.get(key)
    if hit is not None:
        return hit
    _guard(gram)
    if not ma.modes:
        result = lattice_mode(gram, ma.charge, n, FockState({mb: ONE}))
    else:
        s, neg_m = ma.modes[0]
        m = -neg_m
        a1 = ma.drop_slot(0)
        u = WeightVector(
            tuple(ONE if i == s else ZERO for i in range(gram.n + 1))
        )
        acc = {}
        # creation half: u_(-j-m) (a1_(n+j) mb)
        jmax = a1.depth + mb.depth - d - n - 1
        for j in range(0, max(0, jmax) + 1):
            inner = _mono_product(gram, a1, n + j, mb)
            if inner.terms:
                cjm = sq(comb(j + m - 1, m - 1))
                for mono, c in inner.terms.items():
                    _acc(acc, mono.with_mode(s, -j - m), c * cjm)
        # annihilation half: a1_(n-1-j) (u_(j-m+1) mb)
        sign = ONE if (m - 1) % 2 == 0 else sq(-1)
        for j in range(m - 1, m - 1 + mb.max_mode_depth() + 1):
            ub = heis_mode(gram, u, j - m + 1, FockState({mb: ONE}))
            if ub.is_zero():
                continue
            cj = sign * comb(j, m - 1)
            for mono, c in ub.terms.items():
                inner = _mono_product(gram, a1, n - 1 - j, mono)
                if inner.terms:
                    for mono2, c2 in inner.terms.items():
                        _acc(acc, mono2, cj * c * c2)
        result = FockState(acc)
    gram._memo[key] = result
    return result


class SingularPart:
    """The map n -> a_(n) b over n >= 0; empty means a regular OPE."""

    __slots__ = ("parts",)

    def __init__(self, parts=None):
        cleaned = {}
        if parts:
            for n, st in parts.items():
                if not st.is_zero():
                    cleaned[int(n)] = st
        object.__setattr__(self, "parts", cleaned)

    def is_regular(self):
        return not self.parts

    def order(self):
        """Highest pole order (n+1 for the deepest nonzero n-th product)."""
        return max(self.parts) + 1 if self.parts else 0

    def __eq__(self, other):
        if not isinstance(other, SingularPart):
            return NotImplemented
        return self.parts == other.parts

    def __getitem__(self, n):
        return self.parts.get(n, FockState.zero())

    def __iter__(self):
        return iter(sorted(self.parts.items(), reverse=True))

    def to_json(self, gram):
        return {str(n): st.to_json(gram) for n, st in sorted(self.parts.items())}

    def render(self, n_rank):
        if not self.parts:
            return "regular"
        lines = []
        for n, st in sorted(self.parts.items(), reverse=True):
            lines.append(f"(z-w)^-{n + 1}: {st.render(n_rank)}")
        return "\n".join(lines)


def singular_part(gram, a, b):
    """All non-negative products of a pair of states."""
    nmax = -1
    for ma in a.terms:
        for mb in b.terms:
            d = gram.int_pairing(ma.charge, mb.charge)
            nmax = max(nmax, ma.depth + mb.depth - d - 1)
    parts = {}
    for n in range(0, nmax + 1):
        st = nth_product(gram, a, n, b)
        if not st.is_zero():
            parts[n] = st
    return SingularPart(parts)


# ---------------------------------------------------------------------------
# operator expressions


class OperatorExpr:
    """Composable linear operator on Fock states."""

    def apply(self, gram, v):
        raise NotImplementedError

    def __add__(self, other):
        return OpSum((self, other))

    def __sub__(self, other):
        return OpSum((self, Scale(sq(-1), other)))

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return Compose((self, other))
        return NotImplemented

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction, ScalarQ)):
            return Scale(c if isinstance(c, ScalarQ) else sq(c), self)
        return NotImplemented

    def __neg__(self):
        return Scale(sq(-1), self)


class HeisenbergMode(OperatorExpr):
    __slots__ = ("vec", "n")

    def __init__(self, vec, n):
        self.vec = vec
        self.n = n

    def apply(self, gram, v):
        return heis_mode(gram, self.vec, self.n, v)

    def __repr__(self):
        return f"[{self.vec}]_({self.n})"


class Translation(OperatorExpr):
    def apply(self, gram, v):
        return translate(gram, v)

    def __repr__(self):
        return "T"


class LatticeMode(OperatorExpr):
    __slots__ = ("vec", "n")

    def __init__(self, vec, n):
        self.vec = vec
        self.n = n

    def apply(self, gram, v):
        return lattice_mode(gram, self.vec, self.n, v)

    def __repr__(self):
        return f"e^[{self.vec}]_({self.n})"


class Scale(OperatorExpr):
    __slots__ = ("coeff", "op")

    def __init__(self, coeff, op):
        self.coeff = coeff if isinstance(coeff, ScalarQ) else sq(coeff)
        self.op = op

    def apply(self, gram, v):
        return self.op.apply(gram, v).scale(self.coeff)

    def __repr__(self):
        return f"({self.coeff})*{self.op!r}"


class OpSum(OperatorExpr):
    __slots__ = ("ops",)

    def __init__(self, ops):
        flat = []
        for op in ops:
            if isinstance(op, OpSum):
                flat.extend(op.ops)
            else:
                flat.append(op)
        self.ops = tuple(flat)

    def apply(self, gram, v):
        out = FockState.zero()
        for op in self.ops:
            out = out + op.apply(gram, v)
        return out

    def __repr__(self):
        return "(" + " + ".join(repr(o) for o in self.ops) + ")"


class Compose(OperatorExpr):
    """Operator product: ops[-1] acts first, ops[0] last."""

    __slots__ = ("ops",)

    def __init__(self, ops):
        flat = []
        for op in ops:
            if isinstance(op, Compose):
                flat.extend(op.ops)
            else:
                flat.append(op)
        self.ops = tuple(flat)

    def apply(self, gram, v):
        for op in reversed(self.ops):
            v = op.apply(gram, v)
        return v

    def __repr__(self):
        return " . ".join(repr(o) for o in self.ops)


def apply_operator(gram, op, v):
    return op.apply(gram, v)
