"""Exact differential-polynomial algebra over jet variables.

A jet variable is a field symbol together with a derivative multi-index
over the four independent variables (slot order x, y, z, t; the same
slots are read as X, Y, Z, T after the change to evolution form).
DiffPoly is the universal expression value: a sparse multivariate
polynomial in jet variables with exact rational coefficients.
JetQuotient is the corresponding fraction; its normalization cancels
monomial content and whole-denominator factors only, never a general
multivariate gcd, so equality testing cross-multiplies.

All values are immutable once built and every operation is a pure
function, so values can be shared freely between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

DIRS = ("x", "y", "z", "t")
_AXIS = {"x": 0, "y": 1, "z": 2, "t": 3, "X": 0, "Y": 1, "Z": 2, "T": 3}
ZERO_INDEX = (0, 0, 0, 0)

FIELD = "field"
POTENTIAL = "potential"
WAVE = "wave-function"
INDEPENDENT = "independent"


class StructureError(ValueError):
    """Malformed expression tree or non-terminating rewrite."""


class CoverageError(LookupError):
    """A jet variable had no substitution rule or point value."""


class PoleError(ZeroDivisionError):
    """A denominator evaluated to zero."""


@dataclass(frozen=True)
class FieldId:
    name: str
    role: str = FIELD

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class JetVariable:
    field: FieldId
    d: tuple[int, int, int, int] = ZERO_INDEX

    def order(self) -> int:
        return sum(self.d)

    def __repr__(self):
        if self.d == ZERO_INDEX:
            return self.field.name
        suffix = "".join(DIRS[ax] * k for ax, k in enumerate(self.d))
        return f"{self.field.name}_{suffix}"


# Global interner.  Monomial keys store small integer ids; canonical
# ordering for output is by (field name, role, multi-index), independent
# of the id assignment, so serialization is stable across processes.
_JET_IDS: dict[JetVariable, int] = {}
_JETS: list[JetVariable] = []
_JET_SORT: list[tuple] = []


def _jet_id(jv: JetVariable) -> int:
    i = _JET_IDS.get(jv)
    if i is None:
        i = len(_JETS)
        _JET_IDS[jv] = i
        _JETS.append(jv)
        _JET_SORT.append((jv.field.name, jv.field.role, jv.d))
    return i


def _axis(direction) -> int:
    if isinstance(direction, int):
        if 0 <= direction <= 3:
            return direction
        raise StructureError(f"bad axis {direction}")
    try:
        return _AXIS[direction]
    except KeyError:
        raise StructureError(f"bad direction {direction!r}") from None


def _coeff(c):
    """Keep integers as int (fast path); Fractions only when non-integral."""
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    raise StructureError(f"coefficient must be an exact rational, got {type(c)}")


def _mul_mono(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        a, b = m1[i], m2[j]
        if a == b:
            out.append(a)
            out.append(m1[i + 1] + m2[j + 1])
            i += 2
            j += 2
        elif a < b:
            out.append(a)
            out.append(m1[i + 1])
            i += 2
        else:
            out.append(b)
            out.append(m2[j + 1])
            j += 2
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_deg(m: tuple) -> int:
    return sum(m[1::2])


def _mono_cmp(m1: tuple, m2: tuple) -> int:
    """Graded order, ties broken lexicographically by ascending jet id
    (a higher exponent on an earlier id wins).  Compatible with monomial
    multiplication, so it is safe for division."""
    d1, d2 = _mono_deg(m1), _mono_deg(m2)
    if d1 != d2:
        return -1 if d1 < d2 else 1
    i = j = 0
    while i < len(m1) and j < len(m2):
        a, b = m1[i], m2[j]
        if a != b:
            return 1 if a < b else -1
        pa, pb = m1[i + 1], m2[j + 1]
        if pa != pb:
            return 1 if pa > pb else -1
        i += 2
        j += 2
    if i < len(m1):
        return 1
    if j < len(m2):
        return -1
    return 0


def _mono_div(m: tuple, d: tuple):
    """Divide monomial m by d; None when not divisible."""
    need = dict(zip(d[0::2], d[1::2]))
    out = []
    i = 0
    while i < len(m):
        jid, pw = m[i], m[i + 1]
        i += 2
        want = need.pop(jid, 0)
        if want > pw:
            return None
        if pw > want:
            out.append(jid)
            out.append(pw - want)
    if need:
        return None
    return tuple(out)


def _mono_sort_key(m: tuple):
    return tuple(_JET_SORT[m[i]] + (m[i + 1],) for i in range(0, len(m), 2))


class DiffPoly:
    """Normal form: {monomial key: nonzero coeff}; the zero polynomial is {}."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}

    # -- construction -------------------------------------------------

    @staticmethod
    def const(c) -> "DiffPoly":
        c = _coeff(c if isinstance(c, (int, Fraction)) else Fraction(c))
        return DiffPoly({(): c} if c != 0 else {})

    @staticmethod
    def from_jet(jv: JetVariable, power: int = 1) -> "DiffPoly":
        if power < 0:
            raise StructureError("negative power")
        if power == 0:
            return ONE
        return DiffPoly({(_jet_id(jv), power): 1})

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return Fraction(self.terms[()])
        raise StructureError("not a constant")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == DiffPoly.const(other).terms
        return NotImplemented

    __hash__ = None

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        elif not isinstance(other, DiffPoly):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m)
            if acc is None:
                out[m] = c
            else:
                acc = acc + c
                if acc == 0:
                    del out[m]
                else:
                    out[m] = acc
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        elif not isinstance(other, DiffPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _coeff(other)
            if c == 0:
                return ZERO
            if c == 1:
                return self
            return DiffPoly({m: cc * c for m, cc in self.terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        t1, t2 = self.terms, other.terms
        if not t1 or not t2:
            return ZERO
        if len(t1) > len(t2):
            t1, t2 = t2, t1
        out = {}
        for m1, c1 in t1.items():
            for m2, c2 in t2.items():
                key = _mul_mono(m1, m2)
                c = c1 * c2
                acc = out.get(key)
                if acc is None:
                    out[key] = c
                else:
                    acc = acc + c
                    if acc == 0:
                        del out[key]
                    else:
                        out[key] = acc
        return DiffPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise StructureError("powers must be non-negative integers")
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise PoleError("division by zero")
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, DiffPoly):
            return JetQuotient(self, other)
        if isinstance(other, JetQuotient):
            return JetQuotient(self) / other
        return NotImplemented

    # -- views -----------------------------------------------------------

    def jet_variables(self):
        seen = set()
        for m in self.terms:
            for i in range(0, len(m), 2):
                seen.add(m[i])
        return sorted((_JETS[i] for i in seen), key=lambda j: (j.field.name, j.field.role, j.d))

    def monomials(self):
        """Canonically ordered (coeff, ((JetVariable, power), ...)) view."""
        items = sorted(self.terms.items(), key=lambda kv: _mono_sort_key(kv[0]))
        for m, c in items:
            yield Fraction(c), tuple((_JETS[m[i]], m[i + 1]) for i in range(0, len(m), 2))

    def leading(self):
        """Term maximal in the graded order used for exact division."""
        best = None
        for m, c in self.terms.items():
            if best is None or _mono_cmp(m, best[0]) > 0:
                best = (m, c)
        return best

    def total_degree(self) -> int:
        return max((_mono_deg(m) for m in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, factors in self.monomials():
            fac = "*".join(f"{jv}^{p}" if p > 1 else f"{jv}" for jv, p in factors)
            if not fac:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(fac)
            elif c == -1:
                parts.append(f"-{fac}")
            else:
                parts.append(f"{c}*{fac}")
        return " + ".join(parts).replace("+ -", "- ")


ZERO = DiffPoly({})
ONE = DiffPoly({(): 1})


def jet(field: FieldId, d: tuple[int, int, int, int] = ZERO_INDEX) -> DiffPoly:
    return DiffPoly.from_jet(JetVariable(field, tuple(d)))


def independent(name: str) -> DiffPoly:
    """An independent variable (x, y, z, t) as an expression."""
    return jet(FieldId(name, INDEPENDENT))


# -- content / primitive part / exact division -------------------------


def _rat_gcd(a, b) -> Fraction:
    fa, fb = Fraction(a), Fraction(b)
    num = math.gcd(fa.numerator, fb.numerator)
    den = fa.denominator * fb.denominator // math.gcd(fa.denominator, fb.denominator)
    return Fraction(num, den)


def content(e: DiffPoly):
    """(rational content, common monomial) of a nonzero polynomial."""
    if e.is_zero():
        raise StructureError("zero polynomial has no content")
    rat = Fraction(0)
    common = None
    for m, c in e.terms.items():
        rat = _rat_gcd(rat, c)
        if common is None:
            common = dict(zip(m[0::2], m[1::2]))
        else:
            for jid in list(common):
                common[jid] = min(common[jid], dict(zip(m[0::2], m[1::2])).get(jid, 0))
                if common[jid] == 0:
                    del common[jid]
        if not common:
            common = {}
    mono = tuple(x for jid in sorted(common) for x in (jid, common[jid]))
    return rat, mono


def strip_monomial(e: DiffPoly, mono: tuple) -> DiffPoly:
    if not mono:
        return e
    out = {}
    for m, c in e.terms.items():
        q = _mono_div(m, mono)
        if q is None:
            raise StructureError("monomial does not divide every term")
        out[q] = c
    return DiffPoly(out)


def primitive(e: DiffPoly):
    """Strip rational and monomial content and fix the sign so the leading
    term is positive.  Returns (primitive part, rational scale, monomial)
    with e == scale * monomial * primitive part."""
    if e.is_zero():
        return e, Fraction(1), ()
    rat, mono = content(e)
    out = strip_monomial(e, mono)
    lead = out.leading()
    if lead[1] < 0:
        rat = -rat
    scale = Fraction(1) / rat
    out = DiffPoly({m: _coeff(Fraction(c) * scale) for m, c in out.terms.items()})
    return out, rat, mono


def divide_exact(a: DiffPoly, b: DiffPoly):
    """Exact polynomial division a/b; None when b does not divide a."""
    if b.is_zero():
        raise PoleError("division by the zero polynomial")
    if a.is_zero():
        return ZERO
    bl_m, bl_c = b.leading()
    rem = dict(a.terms)
    quot = {}
    while rem:
        best = None
        for m in rem:
            if best is None or _mono_cmp(m, best) > 0:
                best = m
        qm = _mono_div(best, bl_m)
        if qm is None:
            return None
        qc = _coeff(Fraction(rem[best]) / Fraction(bl_c))
        quot[qm] = qc
        for m2, c2 in b.terms.items():
            key = _mul_mono(qm, m2)
            acc = rem.get(key, 0) - qc * c2
            if acc == 0:
                rem.pop(key, None)
            else:
                rem[key] = acc
    return DiffPoly(quot)


# -- quotients ----------------------------------------------------------


class JetQuotient:
    """num/den of DiffPoly.  Normalization: cancels shared monomial
    content, makes the denominator's leading coefficient 1, and collapses
    to den == 1 when the denominator divides the numerator exactly."""

    __slots__ = ("num", "den")

    def __init__(self, num: DiffPoly, den: DiffPoly | None = None):
        if isinstance(num, (int, Fraction)):
            num = DiffPoly.const(num)
        if den is None:
            den = ONE
        elif isinstance(den, (int, Fraction)):
            den = DiffPoly.const(den)
        if den.is_zero():
            raise PoleError("zero denominator")
        if num.is_zero():
            self.num, self.den = ZERO, ONE
            return
        if den.terms == ONE.terms:
            self.num, self.den = num, den
            return
        # shared monomial content
        _, mn = content(num)
        _, md = content(den)
        if mn and md:
            shared = {}
            dn, dd = dict(zip(mn[0::2], mn[1::2])), dict(zip(md[0::2], md[1::2]))
            for jid in dn:
                if jid in dd:
                    shared[jid] = min(dn[jid], dd[jid])
            if shared:
                mono = tuple(x for jid in sorted(shared) for x in (jid, shared[jid]))
                num = strip_monomial(num, mono)
                den = strip_monomial(den, mono)
        if len(den.terms) == 1:
            # monomial denominator: after content cancellation nothing
            # else can cancel except the coefficient
            (m, c), = den.terms.items()
            if not m:
                inv = Fraction(1) / Fraction(c)
                self.num = num * inv
                self.den = ONE
                return
            scale = Fraction(1) / Fraction(c)
            self.num = num * scale
            self.den = DiffPoly({m: 1})
            return
        q = divide_exact(num, den)
        if q is not None:
            self.num, self.den = q, ONE
            return
        lead = den.leading()
        if lead[1] != 1:
            scale = Fraction(1) / Fraction(lead[1])
            num = num * scale
            den = den * scale
        self.num, self.den = num, den

    @staticmethod
    def const(c) -> "JetQuotient":
        return JetQuotient(DiffPoly.const(c))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, DiffPoly)):
            other = JetQuotient(other if isinstance(other, DiffPoly) else DiffPoly.const(other))
        if not isinstance(other, JetQuotient):
            return NotImplemented
        if self.den.terms == other.den.terms:
            return self.num.terms == other.num.terms
        return (self.num * other.den).terms == (other.num * self.den).terms

    __hash__ = None

    def __add__(self, other):
        other = _as_quotient(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den.terms == other.den.terms:
            return JetQuotient(self.num + other.num, self.den)
        return JetQuotient(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        q = object.__new__(JetQuotient)
        q.num, q.den = -self.num, self.den
        return q

    def __sub__(self, other):
        other = _as_quotient(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_quotient(other)
        if other is NotImplemented:
            return NotImplemented
        return JetQuotient(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_quotient(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise PoleError("division by zero quotient")
        return JetQuotient(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_quotient(other) / self

    def __pow__(self, k: int):
        if k < 0:
            if self.num.is_zero():
                raise PoleError("zero to a negative power")
            return JetQuotient(self.den ** (-k), self.num ** (-k))
        return JetQuotient(self.num ** k, self.den ** k)

    def jet_variables(self):
        seen = {jv for jv in self.num.jet_variables()}
        seen.update(self.den.jet_variables())
        return sorted(seen, key=lambda j: (j.field.name, j.field.role, j.d))

    def __repr__(self):
        if self.den.terms == ONE.terms:
            return repr(self.num)
        return f"({self.num!r}) / ({self.den!r})"


QONE = JetQuotient(ONE)


def _as_quotient(x):
    if isinstance(x, JetQuotient):
        return x
    if isinstance(x, DiffPoly):
        q = object.__new__(JetQuotient)
        q.num, q.den = x, ONE
        return q
    if isinstance(x, (int, Fraction)):
        return JetQuotient(DiffPoly.const(x))
    return NotImplemented


# -- total derivatives ----------------------------------------------------


def total_derivative(e: DiffPoly, direction) -> DiffPoly:
    """Total derivative: bumps jet multi-indices via Leibniz and the chain
    rule; independent-variable symbols differentiate to 0 or 1."""
    ax = _axis(direction)
    out = ZERO
    for m, c in e.terms.items():
        for i in range(0, len(m), 2):
            jid, pw = m[i], m[i + 1]
            jv = _JETS[jid]
            rest = list(m)
            if pw == 1:
                del rest[i:i + 2]
            else:
                rest[i + 1] = pw - 1
            rest = tuple(rest)
            coeff = c * pw
            if jv.field.role == INDEPENDENT:
                if jv.d != ZERO_INDEX:
                    raise StructureError(f"derived independent symbol {jv!r}")
                if _AXIS.get(jv.field.name) == ax:
                    out = out + DiffPoly({rest: coeff})
                continue
            d = list(jv.d)
            d[ax] += 1
            bumped = _jet_id(JetVariable(jv.field, tuple(d)))
            key = _mul_mono(rest, (bumped, 1))
            out = out + DiffPoly({key: coeff})
    return out


def total_derivative_q(q: JetQuotient | DiffPoly, direction) -> JetQuotient:
    if isinstance(q, DiffPoly):
        return JetQuotient(total_derivative(q, direction))
    dn = total_derivative(q.num, direction)
    dd = total_derivative(q.den, direction)
    if dd.is_zero():
        return JetQuotient(dn, q.den)
    return JetQuotient(dn * q.den - q.num * dd, q.den * q.den)


# -- substitution ----------------------------------------------------------


def _match_base(jv: JetVariable, bases):
    best = None
    best_key = None
    for b in bases:
        if all(jd >= bd for jd, bd in zip(jv.d, b.d)):
            key = (sum(b.d), b.d)
            if best is None or key > best_key:
                best, best_key = b, key
    return best


def _prolonged(base: JetVariable, d: tuple, rules_q, cache) -> JetQuotient:
    key = (base, d)
    got = cache.get(key)
    if got is not None:
        return got
    if d == base.d:
        q = rules_q[base]
    else:
        for ax in range(4):
            if d[ax] > base.d[ax]:
                prev = list(d)
                prev[ax] -= 1
                q = total_derivative_q(_prolonged(base, tuple(prev), rules_q, cache), ax)
                break
    cache[key] = q
    return q


def _subst_poly_once(poly: DiffPoly, rules_q, by_field, prolong, cache):
    """One replacement pass; None when nothing matched."""
    repl = {}
    skip = set()
    for m in poly.terms:
        for i in range(0, len(m), 2):
            jid = m[i]
            if jid in repl or jid in skip:
                continue
            jv = _JETS[jid]
            bases = by_field.get(jv.field)
            if not bases:
                skip.add(jid)
                continue
            b = _match_base(jv, bases)
            if b is None:
                skip.add(jid)
                continue
            if jv.d != b.d and not prolong:
                raise CoverageError(f"no exact rule for {jv!r} and prolongation is off")
            repl[jid] = _prolonged(b, jv.d, rules_q, cache)
    if not repl:
        return None
    groups: dict[tuple, dict] = {}
    for m, c in poly.terms.items():
        tpart = []
        rest = []
        for i in range(0, len(m), 2):
            if m[i] in repl:
                tpart.append((m[i], m[i + 1]))
            else:
                rest.append(m[i])
                rest.append(m[i + 1])
        groups.setdefault(tuple(tpart), {})[tuple(rest)] = c
    total = None
    for tpart, rest_terms in groups.items():
        q = _as_quotient(DiffPoly(rest_terms))
        for jid, pw in tpart:
            q = q * repl[jid] ** pw
        total = q if total is None else total + q
    return total


def substitute(e: DiffPoly | JetQuotient, rules: dict, prolong: bool = False) -> JetQuotient:
    """Replace jets matching the rules.  A rule maps a base jet to its
    replacement; with ``prolong`` set, jets above a base are rewritten by
    total differentiation of the rule.  Jets of a ruled field lying below
    every base are left untouched.  Passes repeat until no rule matches."""
    rules_q = {}
    for base, rhs in rules.items():
        if isinstance(base, DiffPoly):
            jvs = base.jet_variables()
            if len(base.terms) != 1 or len(jvs) != 1:
                raise StructureError("rule pattern must be a single jet")
            base = jvs[0]
        rules_q[base] = _as_quotient(rhs)
    by_field: dict[FieldId, list] = {}
    for base in rules_q:
        by_field.setdefault(base.field, []).append(base)
    cache: dict = {}
    cur = _as_quotient(e)
    for _ in range(100):
        rn = _subst_poly_once(cur.num, rules_q, by_field, prolong, cache)
        rd = _subst_poly_once(cur.den, rules_q, by_field, prolong, cache)
        if rn is None and rd is None:
            return cur
        qn = rn if rn is not None else _as_quotient(cur.num)
        qd = rd if rd is not None else _as_quotient(cur.den)
        cur = qn / qd
    raise StructureError("substitution did not reach a fixed point")


# -- structural decomposition ------------------------------------------------


def jets_of_field(e: DiffPoly, field: FieldId) -> set:
    return {jv for jv in e.jet_variables() if jv.field == field}


def decompose_by_jets(e: DiffPoly, jets: list[JetVariable]) -> dict[tuple, DiffPoly]:
    """Group terms by the exponent vector of the given jets; values are
    the residual polynomials with those factors removed."""
    ids = [_jet_id(j) for j in jets]
    out: dict[tuple, dict] = {}
    for m, c in e.terms.items():
        pows = [0] * len(ids)
        rest = []
        for i in range(0, len(m), 2):
            jid = m[i]
            if jid in ids:
                pows[ids.index(jid)] = m[i + 1]
            else:
                rest.append(jid)
                rest.append(m[i + 1])
        out.setdefault(tuple(pows), {})[tuple(rest)] = c
    return {k: DiffPoly(v) for k, v in out.items()}


def map_jets(e: DiffPoly, fn) -> DiffPoly:
    """Simultaneous one-pass replacement of jet variables by polynomials;
    fn returns None to keep a jet.  Unlike substitute(), the output is
    not rescanned, so self-referential maps (a change of independent
    variables reusing the same index slots) are safe."""
    out = ZERO
    for m, c in e.terms.items():
        term = DiffPoly({(): c})
        for i in range(0, len(m), 2):
            r = fn(_JETS[m[i]])
            if r is None:
                term = term * DiffPoly({(m[i], m[i + 1]): 1})
            else:
                term = term * r ** m[i + 1]
        out = out + term
    return out


def linear_coefficient(e: DiffPoly, jv: JetVariable) -> tuple[DiffPoly, DiffPoly]:
    """Split e == coeff * jv + rest, requiring e linear in jv."""
    jid = _jet_id(jv)
    coeff: dict = {}
    rest: dict = {}
    for m, c in e.terms.items():
        hit = None
        for i in range(0, len(m), 2):
            if m[i] == jid:
                if m[i + 1] != 1:
                    raise StructureError(f"not linear in {jv!r}")
                hit = i
                break
        if hit is None:
            rest[m] = c
        else:
            mm = list(m)
            del mm[hit:hit + 2]
            coeff[tuple(mm)] = c
    return DiffPoly(coeff), DiffPoly(rest)


# -- evaluation -------------------------------------------------------------


def evaluate(e: DiffPoly | JetQuotient, point: dict) -> Fraction:
    """Exact evaluation at a point mapping JetVariable -> rational."""
    if isinstance(e, JetQuotient):
        den = evaluate(e.den, point)
        if den == 0:
            raise PoleError("denominator vanishes at the point")
        return evaluate(e.num, point) / den
    vals = {}
    total = Fraction(0)
    for m, c in e.terms.items():
        prod = Fraction(c)
        for i in range(0, len(m), 2):
            jid = m[i]
            v = vals.get(jid)
            if v is None:
                jv = _JETS[jid]
                if jv not in point:
                    raise CoverageError(f"no value for {jv!r}")
                v = Fraction(point[jv])
                vals[jid] = v
            prod *= v ** m[i + 1]
        total += prod
    return total


# -- expression trees (JSON wire format) ------------------------------------


def _frac_str(c) -> str:
    f = Fraction(c)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _parse_frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise StructureError(f"bad rational literal {s!r}") from exc


def from_tree(node, fields: dict[str, FieldId] | None = None) -> DiffPoly:
    """Normalize a raw expression tree of +, *, integer powers, rationals
    and jet variables into the unique normal form."""
    if not isinstance(node, dict) or "op" not in node:
        raise StructureError(f"malformed node: {node!r}")
    op = node["op"]
    if op == "num":
        return DiffPoly.const(_parse_frac(str(node["value"])))
    if op == "jet":
        name = node["field"]
        d = node.get("d", [0, 0, 0, 0])
        if len(d) != 4 or any((not isinstance(k, int)) or k < 0 for k in d):
            raise StructureError(f"bad multi-index {d!r}")
        fid = fields.get(name) if fields else None
        if fid is None:
            fid = FieldId(name)
        return jet(fid, tuple(d))
    if op in ("add", "mul"):
        args = node.get("args")
        if not isinstance(args, list) or not args:
            raise StructureError(f"{op} needs a nonempty args list")
        acc = from_tree(args[0], fields)
        for a in args[1:]:
            nxt = from_tree(a, fields)
            acc = acc + nxt if op == "add" else acc * nxt
        return acc
    if op == "pow":
        exp = node.get("exp")
        if not isinstance(exp, int) or exp < 0:
            raise StructureError(f"bad exponent {exp!r}")
        return from_tree(node["base"], fields) ** exp
    raise StructureError(f"unknown op {op!r}")


normalize = from_tree


def to_tree(e: DiffPoly) -> dict:
    """Canonical emission; to_tree/from_tree round-trips bit-exact on
    normal forms."""
    if e.is_zero():
        return {"op": "num", "value": "0"}
    terms = []
    for c, factors in e.monomials():
        parts = []
        if c != 1 or not factors:
            parts.append({"op": "num", "value": _frac_str(c)})
        for jv, p in factors:
            base = {"op": "jet", "field": jv.field.name, "d": list(jv.d)}
            parts.append(base if p == 1 else {"op": "pow", "base": base, "exp": p})
        terms.append(parts[0] if len(parts) == 1 else {"op": "mul", "args": parts})
    return terms[0] if len(terms) == 1 else {"op": "add", "args": terms}


def eval_tree(node, point_by_name: dict) -> Fraction:
    """Direct tree evaluation without normalization (test oracle)."""
    op = node["op"]
    if op == "num":
        return _parse_frac(str(node["value"]))
    if op == "jet":
        key = (node["field"], tuple(node.get("d", (0, 0, 0, 0))))
        if key not in point_by_name:
            raise CoverageError(f"no value for {key}")
        return Fraction(point_by_name[key])
    if op == "add":
        return sum((eval_tree(a, point_by_name) for a in node["args"]), Fraction(0))
    if op == "mul":
        out = Fraction(1)
        for a in node["args"]:
            out *= eval_tree(a, point_by_name)
        return out
    if op == "pow":
        return eval_tree(node["base"], point_by_name) ** node["exp"]
    raise StructureError(f"unknown op {op!r}")
