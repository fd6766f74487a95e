"""Weight space with its K-dependent Gram pairing, and Fock-module states.

The rank-(N+1) weight space is spanned by A_1..A_{N-1}, Q, Y.  States live
in Fock modules over the associated Heisenberg algebra: each monomial is a
product of creation modes applied to a charged highest-weight vector
e^{int w}, with coefficients in Q(K).
"""

from __future__ import annotations

from fractions import Fraction

from .scalar import K, ONE, ZERO, ScalarQ, sq


class NonLocalSectorError(ValueError):
    """Lattice operator applied where the charge pairing is not an integer."""


class RankMismatchError(ValueError):
    """Vectors over different N mixed in one operation."""


def basis_symbols(n):
    """Internal symbol order: Y, Q, A1, ..., A{n-1}."""
    return ("Y", "Q") + tuple(f"A{i}" for i in range(1, n))


def declared_order(n):
    """The Gram matrix is written over the basis in this order."""
    return tuple(f"A{i}" for i in range(n - 1, 0, -1)) + ("Q", "Y")


class WeightVector:
    """Element of the weight space, with exact (possibly K-dependent) coords.

    Coordinates are stored over the internal order Y, Q, A1, .., A{n-1}.
    Module charges are always K-free; K-dependent coordinates occur in
    auxiliary vectors such as the Heisenberg parts of the generators.
    """

    __slots__ = ("coords", "_hash")

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(coords))
        object.__setattr__(self, "_hash", None)

    @property
    def n(self):
        return len(self.coords) - 1

    @staticmethod
    def zero(n):
        return WeightVector((ZERO,) * (n + 1))

    @staticmethod
    def basis(n, sym):
        syms = basis_symbols(n)
        i = syms.index(sym)
        return WeightVector(tuple(ONE if j == i else ZERO for j in range(n + 1)))

    @staticmethod
    def from_coeffs(n, coeffs):
        """Build from {symbol: int | Fraction | ScalarQ}."""
        syms = basis_symbols(n)
        out = [ZERO] * (n + 1)
        for sym, c in coeffs.items():
            out[syms.index(sym)] = c if isinstance(c, ScalarQ) else sq(c)
        return WeightVector(out)

    def coeff(self, sym):
        return self.coords[basis_symbols(self.n).index(sym)]

    def is_zero(self):
        return all(c.is_zero() for c in self.coords)

    def __add__(self, other):
        if self.n != other.n:
            raise RankMismatchError("weight vectors over different N")
        return WeightVector(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other):
        if self.n != other.n:
            raise RankMismatchError("weight vectors over different N")
        return WeightVector(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self):
        return WeightVector(-c for c in self.coords)

    def scale(self, c):
        c = c if isinstance(c, ScalarQ) else sq(c)
        return WeightVector(c * x for x in self.coords)

    def fraction_coords(self):
        """Coords as Fractions; None if any coordinate depends on K."""
        out = []
        for c in self.coords:
            f = c.constant()
            if f is None:
                return None
            out.append(f)
        return tuple(out)

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.coords)
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        syms = basis_symbols(self.n)
        parts = []
        for sym, c in zip(syms, self.coords):
            if c.is_zero():
                continue
            cs = str(c)
            parts.append(sym if cs == "1" else (f"-{sym}" if cs == "-1" else f"({cs})*{sym}"))
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"

    def __repr__(self):
        return f"WeightVector({self})"

    def to_json(self):
        out = {}
        for sym, c in zip(basis_symbols(self.n), self.coords):
            if not c.is_zero():
                f = c.constant()
                if f is None:
                    raise ValueError("cannot serialize K-dependent charge")
                out[sym] = str(f)
        return out

    @staticmethod
    def from_json(n, data):
        return WeightVector.from_coeffs(n, {s: Fraction(v) for s, v in data.items()})


def mu_weight_vector(gram, i):
    """The i-th Heisenberg vector mu_i, i = 0..N."""
    n = gram.n
    if not 0 <= i <= n:
        raise IndexError(f"mu index {i} out of range 0..{n}")
    coeffs = {"Y": -gram.K / n}
    if i == 0:
        coeffs["Q"] = ONE
        for j in range(1, n):
            coeffs[f"A{j}"] = sq(Fraction(n - j, n))
    else:
        for j in range(1, i):
            coeffs[f"A{j}"] = sq(Fraction(-j, n))
        for j in range(i, n):
            coeffs[f"A{j}"] = sq(Fraction(n - j, n))
    return WeightVector.from_coeffs(n, coeffs)


class GramForm:
    """The symmetric bilinear form on the weight space, plus engine caches.

    ``k`` is None for symbolic K, or an exact rational for a specialized
    level.  With ``transpose=True`` the Gram matrix is deliberately read
    against the reversed basis order; validate_pairings is the guard that
    detects this misreading.
    """

    def __init__(self, n, k=None, transpose=False, budget=10 ** 6):
        if n < 2:
            raise ValueError("N must be at least 2")
        self.n = n
        self.k = None if k is None else Fraction(k)
        self.K = K if self.k is None else sq(self.k)
        self.transpose = bool(transpose)
        self.budget = int(budget)
        syms = basis_symbols(n)
        order = declared_order(n)
        if self.transpose:
            order = tuple(reversed(order))
        matrix = self._declared_matrix()
        table = {}
        for a, row in zip(order, matrix):
            for b, entry in zip(order, row):
                table[(syms.index(a), syms.index(b))] = entry
        self._table = tuple(
            tuple(table[(i, j)] for j in range(n + 1)) for i in range(n + 1)
        )
        # linear part of the charge-weight function, fixed by
        # weight(e^Y) = 1, weight(e^Q) = 1, weight(e^{A_i}) = 1 plus
        # additivity under n-th products
        phi = [ONE, sq(Fraction(1, 2))]
        for i in range(1, n):
            idx = 2 + i - 1
            phi.append(ONE - self._table[idx][idx] / 2)
        self._phi = tuple(phi)
        # engine caches (fields module); results must not depend on hits
        self._memo = {}
        self._hp_cache = {}
        self._ops = 0
        self._ops_floor = 0
        self._depth = 0

    def _declared_matrix(self):
        n = self.n
        Kv = self.K
        size = n + 1
        m = [[ZERO] * size for _ in range(size)]
        for i in range(n - 1):  # A-block, declared order A_{N-1}..A_1
            m[i][i] = 2 * Kv
            if i + 1 < n - 1:
                m[i][i + 1] = m[i + 1][i] = -Kv
        if n >= 2:
            m[n - 2][n - 1] = m[n - 1][n - 2] = -Kv  # (A_1, Q)
        m[n - 1][n - 1] = ONE  # (Q, Q)
        m[n - 1][n] = m[n][n - 1] = ONE  # (Q, Y)
        m[n][n] = ZERO  # (Y, Y)
        return m

    # -- pairing ---------------------------------------------------------

    def pairing_idx(self, i, j):
        return self._table[i][j]

    def pairing(self, a, b):
        if a.n != self.n or b.n != self.n:
            raise RankMismatchError(
                f"pairing over N={self.n} applied to vectors of rank "
                f"{a.n + 1}, {b.n + 1}"
            )
        out = ZERO
        for i, ca in enumerate(a.coords):
            if ca.is_zero():
                continue
            row = self._table[i]
            for j, cb in enumerate(b.coords):
                if not cb.is_zero() and not row[j].is_zero():
                    out = out + ca * cb * row[j]
        return out

    def int_pairing(self, a, b):
        """Pairing required to be a K-free integer; the locality exponent."""
        p = self.pairing(a, b).constant()
        if p is None or p.denominator != 1:
            raise NonLocalSectorError(
                f"non-local sector: pairing ({a}, {b}) is not an integer"
            )
        return int(p)

    def charge_weight(self, w):
        """Conformal weight of the highest-weight vector e^{int w}."""
        out = ZERO
        for c, phi in zip(w.coords, self._phi):
            if not c.is_zero():
                out = out + c * phi
        return out + self.pairing(w, w) / 2

    # -- misc --------------------------------------------------------------

    def sym_index(self, sym):
        return basis_symbols(self.n).index(sym)

    def basis_vector(self, sym):
        return WeightVector.basis(self.n, sym)

    def cocycle_sign(self, b, w):
        """Two-cocycle twist on lattice operators; the engine fixes the
        trivial bimultiplicative cocycle, so every sign is +1.  Kept as an
        explicit hook so reports can state the convention."""
        return 1

    def cocycle_table(self):
        syms = basis_symbols(self.n)
        return {
            "convention": "trivial bimultiplicative cocycle",
            "signs": {f"({a},{b})": 1 for a in syms for b in syms},
        }

    def reset_counters(self):
        self._ops = 0
        self._ops_floor = 0
        self._depth = 0


def validate_pairings(gram):
    """Check the pairing identities the screening-commutator table rests on.

    Returns a list of (name, ok) pairs; an all-pass list certifies the Gram
    matrix was read with the right basis orientation.
    """
    n = gram.n
    Kv = gram.K
    q = gram.basis_vector("Q")
    y = gram.basis_vector("Y")
    mus = [mu_weight_vector(gram, i) for i in range(n + 1)]
    checks = []
    for i in range(1, n):
        a = gram.basis_vector(f"A{i}")
        for j in range(n + 1):
            if j == 0:
                continue
            got = gram.pairing(a, mus[j])
            if j == i:
                want = Kv
            elif j == i + 1:
                want = -Kv
            else:
                want = ZERO
            checks.append((f"(A{i}, mu_{j})", got == want))
    checks.append(("(Q, mu_0)", gram.pairing(q, mus[0]) == ONE - Kv))
    checks.append(("(Q, mu_1)", gram.pairing(q, mus[1]) == -Kv))
    for j in range(2, n + 1):
        checks.append((f"(Q, mu_{j})", gram.pairing(q, mus[j]).is_zero()))
    for i in range(1, n + 1):
        checks.append((f"(mu_{i}, Y)", gram.pairing(mus[i], y).is_zero()))
    return checks


class FockMonomial:
    """Normal-ordered product of creation modes on a charged vector.

    ``modes`` is a canonically sorted tuple of (symbol index, n) with
    n <= -1; reordering the commuting creation family is sign-free, so the
    sorted tuple is a complete normal form.
    """

    __slots__ = ("charge", "modes", "_hash")

    def __init__(self, charge, modes=()):
        object.__setattr__(self, "charge", charge)
        object.__setattr__(
            self, "modes", tuple(sorted(modes, key=lambda t: (t[0], -t[1])))
        )
        object.__setattr__(self, "_hash", None)

    @property
    def depth(self):
        return -sum(n for _, n in self.modes)

    def max_mode_depth(self):
        return max((-n for _, n in self.modes), default=0)

    def with_mode(self, sym_idx, n):
        return FockMonomial(self.charge, self.modes + ((sym_idx, n),))

    def drop_slot(self, pos):
        return FockMonomial(self.charge, self.modes[:pos] + self.modes[pos + 1 :])

    def replace_slot(self, pos, entry):
        return FockMonomial(
            self.charge, self.modes[:pos] + (entry,) + self.modes[pos + 1 :]
        )

    def __eq__(self, other):
        if not isinstance(other, FockMonomial):
            return NotImplemented
        return self.charge == other.charge and self.modes == other.modes

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.charge, self.modes))
            object.__setattr__(self, "_hash", h)
        return h

    def sort_key(self):
        charge_key = tuple((c.num, c.den) for c in self.charge.coords)
        return (self.depth, charge_key, self.modes)

    def render(self, n):
        syms = basis_symbols(n)
        parts = [f"{syms[s]}({m})" for s, m in self.modes]
        if self.charge.is_zero():
            parts.append("|0>")
        else:
            parts.append(f"e^[{self.charge}]")
        return " ".join(parts)


class FockState:
    """Finite linear combination of Fock monomials with ScalarQ coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        cleaned = {}
        if terms:
            for mono, c in terms.items():
                if not c.is_zero():
                    cleaned[mono] = c
        object.__setattr__(self, "terms", cleaned)

    @staticmethod
    def zero():
        return FockState()

    @staticmethod
    def vacuum(gram):
        return FockState({FockMonomial(WeightVector.zero(gram.n)): ONE})

    @staticmethod
    def highest_weight(charge):
        if charge.fraction_coords() is None:
            raise ValueError("module charge must be K-free")
        return FockState({FockMonomial(charge): ONE})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for mono, c in other.terms.items():
            prev = out.get(mono)
            if prev is None:
                out[mono] = c
            else:
                s = prev + c
                if s.is_zero():
                    del out[mono]
                else:
                    out[mono] = s
        st = FockState.__new__(FockState)
        object.__setattr__(st, "terms", out)
        return st

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = c if isinstance(c, ScalarQ) else sq(c)
        if c.is_zero() or not self.terms:
            return FockState.zero()
        if c.is_one():
            return self
        st = FockState.__new__(FockState)
        object.__setattr__(
            st, "terms", {m: c * v for m, v in self.terms.items()}
        )
        return st

    def __eq__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        return self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def charges(self):
        return {m.charge for m in self.terms}

    def coefficient(self, mono):
        return self.terms.get(mono, ZERO)

    def render(self, n):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            cs = str(c)
            body = mono.render(n)
            if cs == "1":
                parts.append(body)
            elif cs == "-1":
                parts.append(f"- {body}")
            else:
                parts.append(f"({cs}) {body}")
        return "  +  ".join(parts)

    def to_json(self, gram):
        out = []
        for mono, c in self.sorted_terms():
            syms = basis_symbols(gram.n)
            out.append(
                {
                    "charge": mono.charge.to_json(),
                    "modes": [[syms[s], m] for s, m in mono.modes],
                    "coeff": c.to_json(),
                }
            )
        return out

    @staticmethod
    def from_json(gram, data):
        syms = basis_symbols(gram.n)
        terms = {}
        for item in data:
            charge = WeightVector.from_json(gram.n, item["charge"])
            modes = tuple((syms.index(s), int(m)) for s, m in item["modes"])
            mono = FockMonomial(charge, modes)
            terms[mono] = terms.get(mono, ZERO) + ScalarQ.from_json(item["coeff"])
        return FockState(terms)


def state_weight_key(gram, mono):
    """Conformal weight of one monomial: mode depths plus charge weight."""
    return gram.charge_weight(mono.charge) + sq(mono.depth)


def weight(gram, v):
    """Decompose a state into homogeneous conformal-weight components.

    Keys are exact rationals (Fractions) whenever the weight is K-free,
    which covers every state of the integral charge lattice; genuinely
    K-dependent weights keep their ScalarQ key.
    """
    buckets = {}
    for mono, c in v.terms.items():
        w = state_weight_key(gram, mono)
        f = w.constant()
        key = f if f is not None else w
        buckets.setdefault(key, {})[mono] = c
    return {key: FockState(terms) for key, terms in buckets.items()}
