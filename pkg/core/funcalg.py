"""Exact algebra of interval sets and closed-form piecewise expressions.

Everything here is an immutable value. Interval sets are finite unions of
intervals with endpoint-openness flags; piecewise expressions attach a
closed-form expression to each of finitely many interval sets and are zero
outside them.

The expression class is "polynomials in one sinusoidal carrier": a piece
is sum_k p_k(t) * sin(omega*t + phi)**k with polynomial p_k and a single
carrier (omega, phi). It is closed under +, *, polynomial composition and
affine substitution as long as two different carriers never meet; when
they do, ExprClassOverflow is raised instead of approximating.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from core.errors import ExprClassOverflow

# Endpoint comparison tolerance
ENDPOINT_TOL = 1e-12

# Cancellation below this fraction of the operand size is an exact zero
COEFF_TOL = 1e-10

Number = Union[int, float]


@dataclass(frozen=True)
class Interval:
    """One interval with endpoint-openness flags. Infinite ends are open."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def is_point(self) -> bool:
        return self.lo == self.hi

    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        left = (t >= self.lo) if self.lo_closed else (t > self.lo)
        right = (t <= self.hi) if self.hi_closed else (t < self.hi)
        return left & right

    def interior_point(self, fraction: float = 0.5) -> float:
        """A point strictly inside (or the point itself for degenerate ones)."""
        if self.is_point():
            return self.lo
        lo, hi = self.lo, self.hi
        if not math.isfinite(lo) and not math.isfinite(hi):
            return 0.0
        if not math.isfinite(lo):
            return hi - 1.0 / max(fraction, 1e-3)
        if not math.isfinite(hi):
            return lo + 1.0 / max(fraction, 1e-3)
        return lo + fraction * (hi - lo)

    def __str__(self) -> str:
        left = '[' if self.lo_closed else '('
        right = ']' if self.hi_closed else ')'
        return f"{left}{_format_number(self.lo)},{_format_number(self.hi)}{right}"


def _format_number(x: float) -> str:
    if x == math.inf:
        return 'inf'
    if x == -math.inf:
        return '-inf'
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _parse_number(text: str) -> float:
    text = text.strip().lower().replace('∞', 'inf')
    if text in ('inf', '+inf'):
        return math.inf
    if text == '-inf':
        return -math.inf
    if '/' in text:
        return float(Fraction(text))
    return float(text)


def _normalize(raw: Iterable[Interval]) -> Tuple[Interval, ...]:
    """Sort, drop empties and merge overlapping or touching intervals."""
    items = []
    for iv in raw:
        lo, hi = float(iv.lo), float(iv.hi)
        lo_c = bool(iv.lo_closed) and math.isfinite(lo)
        hi_c = bool(iv.hi_closed) and math.isfinite(hi)
        if math.isfinite(lo) and math.isfinite(hi) and abs(hi - lo) <= ENDPOINT_TOL:
            hi = lo
        if hi < lo or math.isnan(lo) or math.isnan(hi):
            continue
        if hi == lo and not (lo_c and hi_c):
            continue
        items.append(Interval(lo, hi, lo_c, hi_c))

    items.sort(key=lambda iv: (iv.lo, not iv.lo_closed))

    merged = []
    for iv in items:
        if merged:
            last = merged[-1]
            gap = iv.lo - last.hi
            touching = math.isfinite(gap) and abs(gap) <= ENDPOINT_TOL
            if gap < -ENDPOINT_TOL or (touching and (last.hi_closed or iv.lo_closed)):
                if iv.hi > last.hi + ENDPOINT_TOL:
                    hi, hi_c = iv.hi, iv.hi_closed
                elif iv.hi == last.hi or abs(iv.hi - last.hi) <= ENDPOINT_TOL:
                    hi, hi_c = last.hi, last.hi_closed or iv.hi_closed
                else:
                    hi, hi_c = last.hi, last.hi_closed
                lo_c = last.lo_closed
                if iv.lo == last.lo or abs(iv.lo - last.lo) <= ENDPOINT_TOL:
                    lo_c = lo_c or iv.lo_closed
                merged[-1] = Interval(last.lo, hi, lo_c, hi_c)
                continue
            if touching:
                # (a, p) and (p, b): snap the shared endpoint
                iv = Interval(last.hi, iv.hi, False, iv.hi_closed)
        merged.append(iv)
    return tuple(merged)


def _intersect_pair(a: Interval, b: Interval) -> Interval:
    if abs(a.lo - b.lo) <= ENDPOINT_TOL or a.lo == b.lo:
        lo, lo_c = max(a.lo, b.lo), a.lo_closed and b.lo_closed
    elif a.lo > b.lo:
        lo, lo_c = a.lo, a.lo_closed
    else:
        lo, lo_c = b.lo, b.lo_closed

    if abs(a.hi - b.hi) <= ENDPOINT_TOL or a.hi == b.hi:
        hi, hi_c = min(a.hi, b.hi), a.hi_closed and b.hi_closed
    elif a.hi < b.hi:
        hi, hi_c = a.hi, a.hi_closed
    else:
        hi, hi_c = b.hi, b.hi_closed
    return Interval(lo, hi, lo_c, hi_c)


_BRACKET_RE = re.compile(
    r'^\s*([\[\(\]])\s*([^,]+?)\s*,\s*([^\]\)\[]+?)\s*([\]\)\[])\s*$'
)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of intervals, kept sorted, disjoint and merged."""

    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'intervals', _normalize(self.intervals))

    @classmethod
    def empty(cls) -> 'IntervalSet':
        return cls(())

    @classmethod
    def real_line(cls) -> 'IntervalSet':
        return cls((Interval(-math.inf, math.inf, False, False),))

    @classmethod
    def closed(cls, lo: Number, hi: Number) -> 'IntervalSet':
        return cls((Interval(lo, hi, True, True),))

    @classmethod
    def open(cls, lo: Number, hi: Number) -> 'IntervalSet':
        return cls((Interval(lo, hi, False, False),))

    @classmethod
    def point(cls, x: Number) -> 'IntervalSet':
        return cls((Interval(x, x, True, True),))

    @classmethod
    def of(cls, *intervals: Interval) -> 'IntervalSet':
        return cls(tuple(intervals))

    @classmethod
    def parse(cls, text: str) -> 'IntervalSet':
        """Parse bracket notation: "[1,1.5)", "]1/3,1/2[", "[0,1] U [2,3]".

        An empty string or "{}" is the empty set.
        """
        text = text.strip()
        if text in ('', '{}', '∅'):
            return cls.empty()
        parts = re.split(r'\s*(?:∪|\bU\b|\bu\b)\s*', text)
        intervals = []
        for part in parts:
            match = _BRACKET_RE.match(part)
            if not match:
                raise ValueError(f"Bad interval notation: {part!r}")
            left, lo, hi, right = match.groups()
            intervals.append(Interval(
                _parse_number(lo), _parse_number(hi),
                left == '[', right == ']'
            ))
        return cls(tuple(intervals))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return '{}'
        return ' U '.join(str(iv) for iv in self.intervals)

    def measure(self) -> float:
        return float(sum(iv.length for iv in self.intervals))

    def is_empty(self) -> bool:
        return not self.intervals

    def is_null(self) -> bool:
        return all(iv.is_point() for iv in self.intervals)

    def is_bounded(self) -> bool:
        return all(iv.is_bounded() for iv in self.intervals)

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        mask = np.zeros(t.shape, dtype=bool)
        for iv in self.intervals:
            mask |= iv.contains(t)
        return mask

    def hull(self) -> Tuple[float, float]:
        if not self.intervals:
            raise ValueError("Empty set has no hull")
        return self.intervals[0].lo, self.intervals[-1].hi

    def breakpoints(self) -> Tuple[float, ...]:
        points = set()
        for iv in self.intervals:
            for x in (iv.lo, iv.hi):
                if math.isfinite(x):
                    points.add(x)
        return tuple(sorted(points))

    def positive_components(self) -> Tuple[Interval, ...]:
        return tuple(iv for iv in self.intervals if iv.length > 0)

    def approx_equal(self, other: 'IntervalSet') -> bool:
        """Equality up to a null set."""
        return (self.difference(other).is_null()
                and other.difference(self).is_null())

    def intersect(self, other: 'IntervalSet') -> 'IntervalSet':
        out = []
        for a in self.intervals:
            for b in other.intervals:
                if b.lo > a.hi + ENDPOINT_TOL:
                    break
                if b.hi < a.lo - ENDPOINT_TOL:
                    continue
                out.append(_intersect_pair(a, b))
        return IntervalSet(tuple(out))

    def union(self, other: 'IntervalSet') -> 'IntervalSet':
        return IntervalSet(self.intervals + other.intervals)

    def complement(self) -> 'IntervalSet':
        out = []
        lo, lo_c = -math.inf, False
        for iv in self.intervals:
            out.append(Interval(lo, iv.lo, lo_c, not iv.lo_closed))
            lo, lo_c = iv.hi, not iv.hi_closed
        out.append(Interval(lo, math.inf, lo_c, False))
        return IntervalSet(tuple(out))

    def difference(self, other: 'IntervalSet') -> 'IntervalSet':
        return self.intersect(other.complement())

    def preimage(self, slope: float, intercept: float) -> 'IntervalSet':
        """{t : slope*t + intercept in self}."""
        if slope == 0:
            hit = bool(self.contains(intercept))
            return IntervalSet.real_line() if hit else IntervalSet.empty()
        out = []
        for iv in self.intervals:
            lo = (iv.lo - intercept) / slope
            hi = (iv.hi - intercept) / slope
            if slope > 0:
                out.append(Interval(lo, hi, iv.lo_closed, iv.hi_closed))
            else:
                out.append(Interval(hi, lo, iv.hi_closed, iv.lo_closed))
        return IntervalSet(tuple(out))


def intersect(s1: IntervalSet, s2: IntervalSet) -> IntervalSet:
    return s1.intersect(s2)


def is_null(s: IntervalSet) -> bool:
    return s.is_null()


def _trim(coeffs: Sequence[float], scale: float = 0.0) -> Tuple[float, ...]:
    """Strip trailing zeros; with scale > 0 also zero out |c| <= COEFF_TOL * scale."""
    tol = COEFF_TOL * scale
    out = [0.0 if abs(float(c)) <= tol else float(c) for c in coeffs]
    while out and out[-1] == 0.0:
        out.pop()
    return tuple(out)


def _magnitude(coeffs: Sequence[float]) -> float:
    return max((abs(c) for c in coeffs), default=0.0)


def _padd(p: Sequence[float], q: Sequence[float]) -> Tuple[float, ...]:
    if not p:
        return tuple(q)
    if not q:
        return tuple(p)
    return tuple(P.polyadd(p, q))


def _pmul(p: Sequence[float], q: Sequence[float]) -> Tuple[float, ...]:
    if not p or not q:
        return ()
    return tuple(P.polymul(p, q))


def _pscale(p: Sequence[float], c: float) -> Tuple[float, ...]:
    return tuple(c * x for x in p)


def _peval(p: Sequence[float], t):
    if not p:
        return np.zeros_like(np.asarray(t, dtype=float))
    return P.polyval(t, p)


def _format_poly(p: Sequence[float], var: str = 't') -> str:
    terms = []
    for k, c in enumerate(p):
        if c == 0:
            continue
        mag = _format_number(abs(c))
        if k == 0:
            body = mag
        else:
            power = var if k == 1 else f"{var}^{k}"
            body = power if abs(c) == 1 else f"{mag}*{power}"
        sign = '-' if c < 0 else '+'
        terms.append((sign, body))
    if not terms:
        return '0'
    first_sign, first = terms[0]
    text = ('-' if first_sign == '-' else '') + first
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


@dataclass(frozen=True)
class Polynomial:
    """F(z) = sum_j coeffs[j] * z**j. Trailing zeros are kept as given."""

    coeffs: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(float(c) for c in self.coeffs) or (0.0,))

    @classmethod
    def monomial(cls, delta: float, m: int) -> 'Polynomial':
        return cls(tuple([0.0] * m + [float(delta)]))

    @classmethod
    def parse(cls, text: str) -> 'Polynomial':
        """Comma separated coefficients, constant term first: "0,0,0,1"."""
        return cls(tuple(_parse_number(c) for c in text.split(',') if c.strip()))

    @property
    def degree(self) -> int:
        """Largest index with a nonzero coefficient; -1 for the zero polynomial."""
        for j in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[j] != 0:
                return j
        return -1

    @property
    def constant(self) -> float:
        return self.coeffs[0]

    def coefficient(self, j: int) -> float:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0.0

    def __call__(self, z):
        return P.polyval(z, self.coeffs)

    def trimmed(self) -> Tuple[float, ...]:
        return self.coeffs[:self.degree + 1]

    def without_constant(self) -> 'Polynomial':
        return Polynomial((0.0,) + self.coeffs[1:])

    def minus_identity(self) -> Tuple[float, ...]:
        """Coefficients of F(z) - z with trailing zeros stripped."""
        coeffs = list(self.coeffs) + [0.0] * max(0, 2 - len(self.coeffs))
        coeffs[1] -= 1.0
        return _trim(coeffs)

    def is_identity(self) -> bool:
        return not self.minus_identity()

    def as_monomial(self) -> Optional[Tuple[float, int]]:
        """(delta, m) when F = delta*z**m with m >= 1."""
        nonzero = [(j, c) for j, c in enumerate(self.coeffs) if c != 0]
        if len(nonzero) == 1 and nonzero[0][0] >= 1:
            return nonzero[0][1], nonzero[0][0]
        return None

    def __str__(self) -> str:
        return _format_poly(self.trimmed(), var='z')


def _coeffs_of(F) -> Tuple[float, ...]:
    if isinstance(F, Polynomial):
        return F.coeffs
    return tuple(float(c) for c in F)


@dataclass(frozen=True)
class Carrier:
    """The sinusoid sin(omega*t + phi), canonical omega > 0, phi in [0, pi)."""

    omega: float
    phi: float = 0.0

    def __call__(self, t):
        return np.sin(self.omega * np.asarray(t, dtype=float) + self.phi)

    def matches(self, other: 'Carrier') -> bool:
        return (abs(self.omega - other.omega) <= ENDPOINT_TOL * max(1.0, abs(self.omega))
                and abs(self.phi - other.phi) <= ENDPOINT_TOL)

    def __str__(self) -> str:
        omega = self.omega / math.pi
        w = ('pi' if abs(omega - 1) <= ENDPOINT_TOL
             else f"{_format_number(round(omega, 12))}pi" if abs(omega * 1e6 - round(omega * 1e6)) < 1e-6
             else _format_number(self.omega))
        phase = f" + {_format_number(self.phi)}" if self.phi else ''
        return f"sin({w}*t{phase})"


def _canonical_carrier(terms, omega: float, phi: float):
    """Bring (omega, phi) to canonical form, flipping odd powers as needed."""
    if abs(omega) <= ENDPOINT_TOL:
        s = math.sin(phi)
        folded = ()
        for k, p in enumerate(terms):
            folded = _padd(folded, _pscale(p, s ** k))
        return [folded], None

    sign = 1.0
    if omega < 0:
        omega, phi, sign = -omega, -phi, -sign
    phi = math.fmod(phi, 2 * math.pi)
    if phi < 0:
        phi += 2 * math.pi
    while phi >= math.pi - ENDPOINT_TOL:
        phi -= math.pi
        sign = -sign
    if abs(phi) <= ENDPOINT_TOL:
        phi = 0.0
    if sign < 0:
        terms = [_pscale(p, (-1.0) ** k) for k, p in enumerate(terms)]
    return list(terms), Carrier(omega, phi)


@dataclass(frozen=True)
class AtomicExpr:
    """sum_k terms[k](t) * carrier(t)**k; terms[k] are polynomial coefficients.

    terms[0] is the sinusoid-free polynomial part. Without a carrier only
    terms[0] is meaningful.
    """

    terms: Tuple[Tuple[float, ...], ...] = ((),)
    carrier: Optional[Carrier] = None

    def __post_init__(self):
        terms = [tuple(float(c) for c in p) for p in self.terms] or [()]
        carrier = self.carrier
        if carrier is not None:
            terms, carrier = _canonical_carrier(terms, float(carrier.omega), float(carrier.phi))
        terms = [_trim(p) for p in terms]
        while len(terms) > 1 and not terms[-1]:
            terms.pop()
        if len(terms) == 1:
            carrier = None
        object.__setattr__(self, 'terms', tuple(terms))
        object.__setattr__(self, 'carrier', carrier)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> 'AtomicExpr':
        return cls((tuple(coeffs),))

    @classmethod
    def constant(cls, value: float) -> 'AtomicExpr':
        return cls(((float(value),),))

    @classmethod
    def sinusoid(cls, omega: float, phi: float = 0.0,
                 poly: Sequence[float] = (1.0,),
                 offset: Sequence[float] = ()) -> 'AtomicExpr':
        """offset(t) + poly(t)*sin(omega*t + phi)."""
        return cls((tuple(offset), tuple(poly)), Carrier(omega, phi))

    def is_zero(self) -> bool:
        return all(not p for p in self.terms)

    def constant_value(self) -> Optional[float]:
        if self.carrier is not None or len(self.terms[0]) > 1:
            return None
        return self.terms[0][0] if self.terms[0] else 0.0

    def has_carrier(self) -> bool:
        return self.carrier is not None

    def magnitude(self) -> float:
        return max((_magnitude(p) for p in self.terms), default=0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        value = np.zeros(t.shape) + _peval(self.terms[0], t)
        if self.carrier is not None:
            s = self.carrier(t)
            power = np.ones(t.shape)
            for p in self.terms[1:]:
                power = power * s
                if p:
                    value = value + _peval(p, t) * power
        return value

    def __str__(self) -> str:
        parts = []
        if self.terms[0]:
            parts.append(_format_poly(self.terms[0]))
        for k, p in enumerate(self.terms[1:], start=1):
            if not p:
                continue
            carrier = str(self.carrier) if k == 1 else f"{self.carrier}^{k}"
            coef = _format_poly(p)
            parts.append(carrier if coef == '1' else f"({coef})*{carrier}")
        return ' + '.join(parts) if parts else '0'

    def _joint_carrier(self, other: 'AtomicExpr') -> Optional[Carrier]:
        if self.carrier is None:
            return other.carrier
        if other.carrier is None or self.carrier.matches(other.carrier):
            return self.carrier
        raise ExprClassOverflow(
            f"Two different sinusoids meet: {self.carrier} and {other.carrier}"
        )

    def add(self, other: 'AtomicExpr') -> 'AtomicExpr':
        carrier = self._joint_carrier(other)
        n = max(len(self.terms), len(other.terms))
        scale = max(self.magnitude(), other.magnitude())
        terms = []
        for k in range(n):
            p = self.terms[k] if k < len(self.terms) else ()
            q = other.terms[k] if k < len(other.terms) else ()
            terms.append(_trim(_padd(p, q), scale))
        return AtomicExpr(tuple(terms), carrier)

    def scale(self, c: float) -> 'AtomicExpr':
        return AtomicExpr(tuple(_pscale(p, c) for p in self.terms), self.carrier)

    def sub(self, other: 'AtomicExpr') -> 'AtomicExpr':
        return self.add(other.scale(-1.0))

    def mul(self, other: 'AtomicExpr') -> 'AtomicExpr':
        carrier = self._joint_carrier(other)
        terms = [()] * (len(self.terms) + len(other.terms) - 1)
        for i, p in enumerate(self.terms):
            for j, q in enumerate(other.terms):
                terms[i + j] = _padd(terms[i + j], _pmul(p, q))
        scale = self.magnitude() * other.magnitude()
        return AtomicExpr(tuple(_trim(p, scale) for p in terms), carrier)

    def compose_poly(self, F) -> 'AtomicExpr':
        """F(self) by Horner's scheme."""
        coeffs = _coeffs_of(F)
        result = AtomicExpr.constant(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            result = result.mul(self).add(AtomicExpr.constant(c))
        return result

    def compose_affine(self, slope: float, intercept: float) -> 'AtomicExpr':
        """self(slope*t + intercept)."""
        inner = (float(intercept), float(slope))
        terms = []
        for p in self.terms:
            out = ()
            for c in reversed(p):
                out = _padd(_pmul(out, inner), (c,))
            terms.append(out)
        carrier = None
        if self.carrier is not None:
            carrier = Carrier(self.carrier.omega * slope,
                              self.carrier.omega * intercept + self.carrier.phi)
        return AtomicExpr(tuple(terms), carrier)


ZERO = AtomicExpr()


@dataclass(frozen=True)
class Piece:
    domain: IntervalSet
    expr: AtomicExpr


@dataclass(frozen=True)
class PiecewiseExpr:
    """Finitely many (domain, expression) pieces, zero outside all of them."""

    pieces: Tuple[Piece, ...] = ()

    def __post_init__(self):
        pieces = tuple(p for p in self.pieces if not p.domain.is_empty())
        object.__setattr__(self, 'pieces', pieces)

    @classmethod
    def zero(cls) -> 'PiecewiseExpr':
        return cls(())

    @classmethod
    def constant(cls, value: float, domain: IntervalSet = None) -> 'PiecewiseExpr':
        domain = IntervalSet.real_line() if domain is None else domain
        return cls((Piece(domain, AtomicExpr.constant(value)),))

    @classmethod
    def indicator(cls, domain: IntervalSet) -> 'PiecewiseExpr':
        return cls.constant(1.0, domain)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], domain: IntervalSet = None) -> 'PiecewiseExpr':
        domain = IntervalSet.real_line() if domain is None else domain
        return cls((Piece(domain, AtomicExpr.polynomial(coeffs)),))

    @classmethod
    def of(cls, *pairs: Tuple[IntervalSet, AtomicExpr]) -> 'PiecewiseExpr':
        return cls(tuple(Piece(d, e) for d, e in pairs))

    def covered(self) -> IntervalSet:
        out = IntervalSet.empty()
        for piece in self.pieces:
            out = out.union(piece.domain)
        return out

    def breakpoints(self) -> Tuple[float, ...]:
        points = set()
        for piece in self.pieces:
            points.update(piece.domain.breakpoints())
        return tuple(sorted(points))

    def has_carrier(self) -> bool:
        return any(piece.expr.has_carrier() for piece in self.pieces)

    def magnitude(self) -> float:
        return max((piece.expr.magnitude() for piece in self.pieces), default=0.0)

    def __call__(self, t):
        scalar = np.isscalar(t)
        shape = np.shape(t)
        t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
        out = np.zeros(t.shape)
        assigned = np.zeros(t.shape, dtype=bool)
        for piece in self.pieces:
            mask = piece.domain.contains(t) & ~assigned
            if mask.any():
                out[mask] = piece.expr(t[mask])
                assigned |= mask
        return float(out[0]) if scalar else out.reshape(shape)

    def __str__(self) -> str:
        if not self.pieces:
            return '0'
        return '; '.join(f"{p.expr} on {p.domain}" for p in self.pieces)

    def pruned(self) -> 'PiecewiseExpr':
        """Drop zero pieces and merge pieces carrying the same expression."""
        merged = {}
        order = []
        for piece in self.pieces:
            if piece.expr.is_zero():
                continue
            if piece.expr in merged:
                merged[piece.expr] = merged[piece.expr].union(piece.domain)
            else:
                merged[piece.expr] = piece.domain
                order.append(piece.expr)
        return PiecewiseExpr(tuple(Piece(merged[e], e) for e in order))


def _combine(f: PiecewiseExpr, g: PiecewiseExpr, op, keep_outside: bool) -> PiecewiseExpr:
    pieces = []
    for pf in f.pieces:
        for pg in g.pieces:
            domain = pf.domain.intersect(pg.domain)
            if not domain.is_empty():
                pieces.append(Piece(domain, op(pf.expr, pg.expr)))
    if keep_outside:
        f_cover, g_cover = f.covered(), g.covered()
        for pf in f.pieces:
            domain = pf.domain.difference(g_cover)
            if not domain.is_empty():
                pieces.append(Piece(domain, op(pf.expr, ZERO)))
        for pg in g.pieces:
            domain = pg.domain.difference(f_cover)
            if not domain.is_empty():
                pieces.append(Piece(domain, op(ZERO, pg.expr)))
    return PiecewiseExpr(tuple(pieces)).pruned()


def expr_add(f: PiecewiseExpr, g: PiecewiseExpr) -> PiecewiseExpr:
    return _combine(f, g, AtomicExpr.add, keep_outside=True)


def expr_sub(f: PiecewiseExpr, g: PiecewiseExpr) -> PiecewiseExpr:
    return _combine(f, g, AtomicExpr.sub, keep_outside=True)


def expr_mul(f: PiecewiseExpr, g: PiecewiseExpr) -> PiecewiseExpr:
    return _combine(f, g, AtomicExpr.mul, keep_outside=False)


def expr_scale(f: PiecewiseExpr, c: float) -> PiecewiseExpr:
    return PiecewiseExpr(tuple(Piece(p.domain, p.expr.scale(c)) for p in f.pieces)).pruned()


def expr_product(exprs: Iterable[PiecewiseExpr]) -> PiecewiseExpr:
    total = PiecewiseExpr.constant(1.0)
    for e in exprs:
        total = expr_mul(total, e)
    return total


def poly_compose(F, f: PiecewiseExpr) -> PiecewiseExpr:
    """F(f(t)); outside f's pieces f = 0, so F(f) = F(0) there."""
    coeffs = _coeffs_of(F)
    pieces = [Piece(p.domain, p.expr.compose_poly(coeffs)) for p in f.pieces]
    if coeffs[0] != 0:
        outside = f.covered().complement()
        pieces.append(Piece(outside, AtomicExpr.constant(coeffs[0])))
    return PiecewiseExpr(tuple(pieces)).pruned()


def compose_affine(f: PiecewiseExpr, slope: float, intercept: float) -> PiecewiseExpr:
    """t -> f(slope*t + intercept)."""
    return PiecewiseExpr(tuple(
        Piece(p.domain.preimage(slope, intercept), p.expr.compose_affine(slope, intercept))
        for p in f.pieces
    )).pruned()


def support(f: PiecewiseExpr, window: IntervalSet) -> IntervalSet:
    """Essential support of f inside window, exact up to a null set.

    Zeros of a nonzero piece are null and stay inside the result.
    """
    out = IntervalSet.empty()
    for piece in f.pieces:
        if not piece.expr.is_zero():
            out = out.union(piece.domain.intersect(window))
    return out


def _one_sided_expr(f: PiecewiseExpr, x: float, side: str) -> AtomicExpr:
    for piece in f.pieces:
        for iv in piece.domain:
            if side == 'left':
                hit = iv.lo < x - ENDPOINT_TOL and iv.hi >= x - ENDPOINT_TOL
            else:
                hit = iv.hi > x + ENDPOINT_TOL and iv.lo <= x + ENDPOINT_TOL
            if hit:
                return piece.expr
    return ZERO


def continuity_defects(f: PiecewiseExpr, window: IntervalSet,
                       tol: float = 1e-9) -> Tuple[float, ...]:
    """Points of window where f jumps (left limit, value, right limit differ)."""
    lo, hi = window.hull()
    defects = []
    for x in f.breakpoints():
        if x < lo - ENDPOINT_TOL or x > hi + ENDPOINT_TOL:
            continue
        values = [float(f(x))]
        if x > lo + ENDPOINT_TOL:
            values.append(float(_one_sided_expr(f, x, 'left')(x)))
        if x < hi - ENDPOINT_TOL:
            values.append(float(_one_sided_expr(f, x, 'right')(x)))
        scale = max(1.0, max(abs(v) for v in values))
        if max(values) - min(values) > tol * scale:
            defects.append(x)
    return tuple(defects)


def constant_on_open_subinterval(f: PiecewiseExpr, window: IntervalSet) -> Optional[Interval]:
    """An interval of positive length inside window where f is constant, if any.

    Nonconstant pieces are analytic, so they are constant on no open
    interval; only constant pieces and uncovered gaps (f = 0) qualify.
    """
    for piece in f.pieces:
        if piece.expr.constant_value() is not None:
            for iv in piece.domain.intersect(window).positive_components():
                return iv
    for iv in window.difference(f.covered()).positive_components():
        return iv
    return None


_SAMPLE_FRACTIONS = (0.5, 0.3819660112501051, 0.6180339887498949, 0.25, 0.75,
                    0.1, 0.9, 0.4142135623730951, 0.7320508075688772)


def nonzero_point(region: IntervalSet, *exprs: PiecewiseExpr) -> Optional[float]:
    """A point of a positive-measure part of region where every expr is nonzero."""
    components = region.positive_components()
    for iv in components:
        for fraction in _SAMPLE_FRACTIONS:
            t = iv.interior_point(fraction)
            if all(abs(float(e(t))) > COEFF_TOL * e.magnitude() for e in exprs):
                return t
    if components:
        return components[0].interior_point()
    return None
