"""Problem files: JSON documents describing an operator pair and a relation.

    {
      "schema": "covarkit/1",
      "name": "piecewise_scalar_holds",
      "window": "[0,1]",
      "form": "AB=BF(A)",
      "F": [0, 0, 0, 0, 0, 1],
      "A": {"class": "piecewise_mult", "alphas": [1, 1, 2],
            "parts": ["[0,1/3]", "(1/3,1/2)", "[1/2,1]"]},
      "B": {"class": "piecewise_mult", "alphas": [1], "parts": ["(1/3,1/2)"]},
      "oracle": {"grid_n": 4096},
      "expect": {"status": "Holds", "exit_code": 0}
    }

Coefficients given as strings that are not numbers are free parameters
(search templates). Expressions are lists of pieces
{"domain", "poly", "sin": {"omega", "phi", "terms"}}; a bare number is a
constant on the whole line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Tuple

import sympy

from core.errors import ProblemFormatError, ValidationError
from core.funcalg import (
    AtomicExpr,
    Carrier,
    IntervalSet,
    Piece,
    PiecewiseExpr,
    Polynomial,
)
from core.logger import log_debug
from core.operators import (
    AB_BFA,
    BA_FAB,
    AffineMap,
    Mult,
    PiecewiseMult,
    PointEval,
    TranslateDilate,
    WeightedComposition,
    integer_cells,
)
from utils.validators import validate_operator, validate_polynomial, validate_window

SCHEMA = 'covarkit/1'

FORMS = {
    'AB=BF(A)': AB_BFA, 'AB_BFA': AB_BFA,
    'BA=F(A)B': BA_FAB, 'BA_FAB': BA_FAB,
}

_NUMERIC_RE = re.compile(r'^[0-9A-Za-z.+\-*/() ]+$')
_NUMERIC_WORDS = {'pi', 'sqrt', 'e', 'E'}
_NAME_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_\']*$')


@dataclass(frozen=True)
class ProblemFile:
    name: str
    window: IntervalSet
    form: str
    F: Polynomial
    A: Any
    B: Any
    oracle: Dict[str, Any] = field(default_factory=dict)
    expect: Dict[str, Any] = field(default_factory=dict)

    def bounds(self) -> Tuple[float, float]:
        return self.window.hull()

    def free_parameters(self) -> Tuple[str, ...]:
        names = []
        for op in (self.A, self.B):
            if isinstance(op, PiecewiseMult):
                names.extend(op.free_parameters())
        return tuple(names)

    def is_family(self) -> bool:
        return bool(self.free_parameters())

    def bind(self, values: Dict[str, float], name: str, expect: Dict[str, Any] = None) -> 'ProblemFile':
        """Concrete problem with every free parameter replaced by its value."""
        def concrete(op):
            return op.substitute(values) if isinstance(op, PiecewiseMult) else op
        return replace(self, name=name, A=concrete(self.A), B=concrete(self.B),
                       expect=dict(expect or {}))


def parse_real(value) -> float:
    """A number, or a short expression such as "1/3", "pi/2", "2**-0.5", "sqrt(2)"."""
    if isinstance(value, bool):
        raise ProblemFormatError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in ('inf', '+inf', '-inf'):
            return float(text)
        words = set(re.findall(r'[A-Za-z]+', text))
        if text and _NUMERIC_RE.match(text) and words <= _NUMERIC_WORDS:
            try:
                return float(sympy.sympify(text, rational=True))
            except (sympy.SympifyError, TypeError, ValueError) as e:
                raise ProblemFormatError(f"Bad number {value!r}: {e}")
    raise ProblemFormatError(f"Expected a number, got {value!r}")


def _coefficient(value):
    """Number, or the name of a free parameter."""
    if isinstance(value, str) and _NAME_RE.match(value.strip()) and value.strip() not in ('pi', 'inf'):
        return value.strip()
    return parse_real(value)


def _cell_coefficient(value):
    """i -> alpha_i from an expression in the cell index i, such as "2**(-i/2)"."""
    text = str(value).strip()
    words = set(re.findall(r'[A-Za-z]+', text))
    if not (text and _NUMERIC_RE.match(text) and words <= _NUMERIC_WORDS | {'i'}):
        raise ProblemFormatError(f"Bad cell coefficient {value!r}")
    i = sympy.Symbol('i')
    try:
        expr = sympy.sympify(text, locals={'i': i}, rational=True)
    except (sympy.SympifyError, TypeError) as e:
        raise ProblemFormatError(f"Bad cell coefficient {value!r}: {e}")

    def coefficient(k: int) -> float:
        try:
            return float(expr.subs(i, k))
        except (TypeError, ValueError) as e:
            raise ProblemFormatError(f"Cell coefficient {value!r} at i = {k}: {e}")

    return coefficient


def _interval_set(text) -> IntervalSet:
    if not isinstance(text, str):
        raise ProblemFormatError(f"Interval sets are bracket strings, got {text!r}")
    try:
        return IntervalSet.parse(text)
    except ValueError as e:
        raise ProblemFormatError(str(e))


def _poly(values) -> Tuple[float, ...]:
    if not isinstance(values, list):
        raise ProblemFormatError(f"Polynomial coefficients must be a list, got {values!r}")
    return tuple(parse_real(v) for v in values)


def parse_expr(data) -> PiecewiseExpr:
    if isinstance(data, (int, float, str)) and not isinstance(data, bool):
        return PiecewiseExpr.constant(parse_real(data))
    if not isinstance(data, list):
        raise ProblemFormatError(f"Expression must be a number or a list of pieces, got {data!r}")
    pieces = []
    for item in data:
        if not isinstance(item, dict) or 'domain' not in item:
            raise ProblemFormatError(f"Piece needs a domain: {item!r}")
        poly = _poly(item.get('poly', []))
        sin = item.get('sin')
        if sin is None:
            expr = AtomicExpr((poly,))
        else:
            terms = sin.get('terms', [[1]])
            carrier = Carrier(parse_real(sin.get('omega', 1)), parse_real(sin.get('phi', 0)))
            expr = AtomicExpr((poly,) + tuple(_poly(t) for t in terms), carrier)
        pieces.append(Piece(_interval_set(item['domain']), expr))
    return PiecewiseExpr(tuple(pieces))


def _parts(data, key='parts'):
    values = data.get(key)
    if not isinstance(values, list):
        raise ProblemFormatError(f"'{key}' must be a list of bracket strings")
    return tuple(_interval_set(v) for v in values)


def parse_operator(data: dict, window: IntervalSet = None):
    """Build one operator. window is needed only for per-cell coefficients."""
    if not isinstance(data, dict) or 'class' not in data:
        raise ProblemFormatError(f"Operator needs a 'class' tag: {data!r}")
    kind = data['class']
    if kind == 'piecewise_mult':
        alphas = tuple(_coefficient(a) for a in data.get('alphas', []))
        weight = parse_expr(data.get('weight', 1))
        return PiecewiseMult(alphas, _parts(data), weight)
    if kind == 'mult':
        return Mult(parse_expr(data.get('weight', 1)))
    if kind == 'weighted_composition':
        m = data.get('map', {})
        return WeightedComposition(parse_expr(data.get('weight', 1)),
                                   AffineMap(parse_real(m.get('slope', 1)),
                                             parse_real(m.get('intercept', 0))))
    if kind == 'point_eval':
        if 'gamma' not in data:
            raise ProblemFormatError("point_eval needs 'gamma'")
        return PointEval(parse_expr(data.get('weight', 1)), parse_real(data['gamma']))
    if kind == 'translate_dilate':
        if 'cell_alpha' in data:
            # alpha_i on [i, i+1), kept for the cells meeting the window
            if window is None:
                raise ProblemFormatError("'cell_alpha' needs a window")
            alphas, parts = integer_cells(_cell_coefficient(data['cell_alpha']), window)
        else:
            alphas = tuple(parse_real(a) for a in data.get('alphas', [1]))
            parts = _parts(data) if 'parts' in data else (IntervalSet.real_line(),)
        return TranslateDilate(alphas, parts, parse_real(data.get('shift', 0)),
                               parse_real(data.get('scale', 1)))
    raise ProblemFormatError(f"Unknown operator class {kind!r}")


def parse_problem(data: dict, name: str = '') -> ProblemFile:
    """Build and validate a problem from its JSON dictionary.

    Raises:
        ProblemFormatError: malformed document
        ValidationError: operator invariants violated
    """
    if not isinstance(data, dict):
        raise ProblemFormatError("Problem file must hold a JSON object")
    schema = data.get('schema', SCHEMA)
    if schema != SCHEMA:
        raise ProblemFormatError(f"Unsupported schema {schema!r}, expected {SCHEMA!r}")
    for key in ('window', 'F', 'A', 'B'):
        if key not in data:
            raise ProblemFormatError(f"Missing '{key}'")
    form = FORMS.get(str(data.get('form', AB_BFA)).replace(' ', ''))
    if form is None:
        raise ProblemFormatError(f"Unknown relation form {data.get('form')!r}")

    window = _interval_set(data['window'])
    is_valid, error = validate_window(window)
    if not is_valid:
        raise ValidationError(error)
    F = Polynomial(_poly(data['F']))
    problem = ProblemFile(
        name=str(data.get('name', name)),
        window=window,
        form=form,
        F=F,
        A=parse_operator(data['A'], window),
        B=parse_operator(data['B'], window),
        oracle=dict(data.get('oracle', {})),
        expect=dict(data.get('expect', {})),
    )

    checks = [validate_polynomial(F),
              validate_operator(problem.A, 'A'), validate_operator(problem.B, 'B')]
    for is_valid, error in checks:
        if not is_valid:
            raise ValidationError(error)
    return problem


def load_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ProblemFormatError(f"Could not read {path}: {e}")
    problem = parse_problem(data, name=path.stem)
    log_debug(f"Loaded problem {problem.name} from {path}")
    return problem


def serialize_expr(f: PiecewiseExpr) -> list:
    pieces = []
    for piece in f.pieces:
        item = {'domain': str(piece.domain), 'poly': list(piece.expr.terms[0])}
        if piece.expr.carrier is not None:
            item['sin'] = {
                'omega': piece.expr.carrier.omega,
                'phi': piece.expr.carrier.phi,
                'terms': [list(t) for t in piece.expr.terms[1:]],
            }
        pieces.append(item)
    return pieces


def serialize_operator(op) -> dict:
    if isinstance(op, PiecewiseMult):
        return {'class': 'piecewise_mult', 'alphas': list(op.alphas),
                'parts': [str(p) for p in op.parts], 'weight': serialize_expr(op.weight)}
    if isinstance(op, Mult):
        return {'class': 'mult', 'weight': serialize_expr(op.weight)}
    if isinstance(op, WeightedComposition):
        return {'class': 'weighted_composition', 'weight': serialize_expr(op.weight),
                'map': {'slope': op.map.slope, 'intercept': op.map.intercept}}
    if isinstance(op, PointEval):
        return {'class': 'point_eval', 'weight': serialize_expr(op.weight), 'gamma': op.gamma}
    if isinstance(op, TranslateDilate):
        return {'class': 'translate_dilate', 'alphas': list(op.alphas),
                'parts': [str(p) for p in op.parts], 'shift': op.shift, 'scale': op.scale}
    raise TypeError(f"Not an operator: {type(op).__name__}")


def serialize_problem(problem: ProblemFile) -> dict:
    data = {
        'schema': SCHEMA,
        'name': problem.name,
        'window': str(problem.window),
        'form': problem.form,
        'F': list(problem.F.coeffs),
        'A': serialize_operator(problem.A),
        'B': serialize_operator(problem.B),
    }
    if problem.oracle:
        data['oracle'] = dict(problem.oracle)
    if problem.expect:
        data['expect'] = dict(problem.expect)
    return data


def dump_problem(problem: ProblemFile, path) -> bool:
    """Write a problem file. Returns True on success."""
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(serialize_problem(problem), f, indent=2)
        return True
    except OSError:
        return False
