"""Text and JSON rendering of command results."""

import json
from typing import Optional, Sequence

from core.batch_processor import CheckResult
from core.criteria import FixedPointSet, Verdict
from core.funcalg import Polynomial
from core.oracle import OracleConfig, ResidualRow
from core.search import SolutionSet


def to_json(data) -> str:
    return json.dumps(data, indent=2, default=str)


def format_verdict(verdict: Verdict) -> list:
    lines = [f"Verdict: {verdict.status.value}"]
    if verdict.rule:
        lines.append(f"  rule: {verdict.rule}")
    for fact in verdict.certificate:
        lines.append(f"  certificate: {fact}")
    if verdict.witness is not None:
        lines.append(f"  witness: {verdict.witness}")
    for constraint in verdict.constraints:
        lines.append(f"  constraint: {constraint}")
    if verdict.reason:
        lines.append(f"  reason: {verdict.reason}")
    return lines


def format_check(result: CheckResult) -> str:
    """Human-readable report for the check command."""
    lines = [f"Problem: {result.name}"]
    lines.extend(format_verdict(result.verdict))
    if result.solutions is not None:
        lines.extend(format_solutions(result.solutions).splitlines())
    if result.report is not None:
        report = result.report
        lines.append(f"Oracle: residual {report.residual:.3e} -> {report.status.value}")
        if report.message:
            lines.append(f"  {report.message}")
    lines.append(f"Exit code: {result.exit_code}")
    return '\n'.join(lines)


def format_residuals(rows: Sequence[ResidualRow], cfg: OracleConfig) -> str:
    """Residual table, one row per test function."""
    lo, hi = cfg.window
    header = (f"Oracle on [{lo:g}, {hi:g}], {cfg.grid_n} grid points, "
              f"{cfg.p}-norm, seed {cfg.seed}")
    width = max([len('function')] + [len(row.function) for row in rows])
    lines = [header, f"{'function'.ljust(width)}  {'residual':>12}  {'|lhs-rhs|':>12}  {'|rhs|':>12}"]
    for row in rows:
        lines.append(f"{row.function.ljust(width)}  {row.residual:12.3e}  "
                     f"{row.difference_norm:12.3e}  {row.rhs_norm:12.3e}")
    worst = max((row.residual for row in rows), default=0.0)
    lines.append(f"max residual: {worst:.3e}")
    return '\n'.join(lines)


def residuals_to_dict(rows: Sequence[ResidualRow], cfg: OracleConfig) -> dict:
    return {
        'window': list(cfg.window),
        'grid_n': cfg.grid_n,
        'norm': cfg.p,
        'seed': cfg.seed,
        'rows': [
            {'function': r.function, 'residual': r.residual,
             'difference_norm': r.difference_norm, 'rhs_norm': r.rhs_norm}
            for r in rows
        ],
        'max_residual': max((r.residual for r in rows), default=0.0),
    }


def format_solutions(solutions: SolutionSet) -> str:
    if solutions.all_fixed:
        lines = ["Fix(F) = all reals"]
    else:
        lines = [f"Fix(F) = {solutions.fixed}" if solutions.fixed is not None else "Fix(F) not needed"]
    if solutions.is_empty():
        lines.append("No parameter values satisfy the relation")
    lines.extend(solutions.description)
    if solutions.truncated:
        lines.append("(case list truncated)")
    if solutions.note:
        lines.append(f"Note: {solutions.note}")
    return '\n'.join(lines)


def format_fixpoints(F: Polynomial, fix: Optional[FixedPointSet]) -> str:
    """fix is None when every real number is fixed."""
    if fix is None:
        return f"F(z) = {F}\nFix(F) = all reals"
    lines = [f"F(z) = {F}", f"Fix(F) = {fix}"]
    for z, r in zip(fix.points, fix.residuals):
        lines.append(f"  z = {z:.15g}  |F(z) - z| = {r:.2e}")
    for z in fix.unresolved:
        lines.append(f"  z ~ {z:.15g}  unresolved: residual above {fix.tol:g}")
    return '\n'.join(lines)


def fixpoints_to_dict(F: Polynomial, fix: Optional[FixedPointSet]) -> dict:
    if fix is None:
        return {'F': list(F.coeffs), 'all_reals': True, 'points': [], 'residuals': [],
                'unresolved': []}
    return {'F': list(F.coeffs), 'all_reals': False,
            'points': list(fix.points), 'residuals': list(fix.residuals),
            'unresolved': list(fix.unresolved)}


def format_batch(stats: dict) -> str:
    lines = []
    for row in stats.get('results', []):
        line = f"{row['file']}: {row['status']} (exit {row['exit_code']})"
        if row.get('mismatch'):
            line += f" MISMATCH: {row['mismatch']}"
        lines.append(line)
    lines.append(f"Total: {stats.get('total', 0)}, matched: {stats.get('matched', 0)}, "
                 f"mismatched: {stats.get('mismatched', 0)}, errors: {stats.get('errors', 0)}, "
                 f"inconsistent: {stats.get('inconsistent', 0)}")
    return '\n'.join(lines)
