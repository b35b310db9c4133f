"""Input validation utilities."""

import math
from pathlib import Path

from core.funcalg import IntervalSet, Polynomial
from core.operators import (
    Mult,
    PiecewiseMult,
    PointEval,
    TranslateDilate,
    WeightedComposition,
)


def validate_positive_int(value, name: str) -> tuple[bool, str]:
    """Validate a positive integer setting.

    Args:
        value: Value to validate
        name: Setting name for the error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        val = int(value)
        if val >= 1 and val == float(value):
            return True, ""
        return False, f"{name} must be a positive integer"
    except (ValueError, TypeError):
        return False, f"{name} must be a valid number"


def validate_norm(value) -> tuple[bool, str]:
    """Validate norm selector (1, 2 or inf)."""
    if str(value).lower() in ('1', '2', 'inf'):
        return True, ""
    return False, "Norm must be 1, 2 or inf"


def validate_thresholds(tau_pass, tau_fail) -> tuple[bool, str]:
    """Validate the pass/fail residual thresholds.

    Args:
        tau_pass: Residual at or below which Holds is confirmed
        tau_fail: Residual at or above which Fails is confirmed

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        low, high = float(tau_pass), float(tau_fail)
    except (ValueError, TypeError):
        return False, "Thresholds must be valid numbers"
    if not 0 < low < high:
        return False, "Thresholds must satisfy 0 < tau_pass < tau_fail"
    return True, ""


def validate_window(window: IntervalSet) -> tuple[bool, str]:
    """Validate the evaluation window: one bounded interval of positive length."""
    if len(window) != 1:
        return False, f"Window must be a single interval, got {window}"
    lo, hi = window.hull()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return False, f"Window must be bounded, got {window}"
    if hi <= lo:
        return False, f"Window must have positive length, got {window}"
    return True, ""


def validate_polynomial(F: Polynomial) -> tuple[bool, str]:
    if not all(math.isfinite(c) for c in F.coeffs):
        return False, "Polynomial coefficients must be finite"
    return True, ""


def _validate_parts(alphas, parts, name: str) -> tuple[bool, str]:
    if len(alphas) != len(parts):
        return False, f"{name}: {len(alphas)} coefficients for {len(parts)} parts"
    if not parts:
        return False, f"{name}: at least one part is required"
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            overlap = parts[i].intersect(parts[j])
            if not overlap.is_null():
                return False, f"{name}: parts {parts[i]} and {parts[j]} overlap on {overlap}"
    return True, ""


def validate_operator(op, name: str = 'operator') -> tuple[bool, str]:
    """Validate operator invariants.

    Args:
        op: Operator class instance
        name: Label for error messages

    Returns:
        Tuple of (is_valid, error_message)
    """
    if isinstance(op, PiecewiseMult):
        return _validate_parts(op.alphas, op.parts, name)
    if isinstance(op, TranslateDilate):
        valid, error = _validate_parts(op.alphas, op.parts, name)
        if not valid:
            return False, error
        if not op.scale > 0:
            return False, f"{name}: scale must be positive, got {op.scale:g}"
        return True, ""
    if isinstance(op, PointEval):
        if not math.isfinite(op.gamma):
            return False, f"{name}: gamma must be finite"
        return True, ""
    if isinstance(op, (Mult, WeightedComposition)):
        return True, ""
    return False, f"{name}: unknown operator class {type(op).__name__}"


def validate_folder_path(path: str) -> tuple[bool, str]:
    """Validate folder path exists and is a directory.

    Args:
        path: Folder path to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not path or str(path).strip() == "":
        return False, "Path cannot be empty"

    folder = Path(path)

    if not folder.exists():
        return False, f"Folder does not exist: {path}"

    if not folder.is_dir():
        return False, f"Path is not a directory: {path}"

    return True, ""


def validate_settings(settings: dict) -> tuple[bool, str]:
    """Validate all toolkit settings.

    Args:
        settings: Dictionary of settings to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    for key in ('grid_n', 'max_cases', 'bump_cells'):
        valid, error = validate_positive_int(settings.get(key, 1), key)
        if not valid:
            return False, error

    valid, error = validate_norm(settings.get('norm', 'inf'))
    if not valid:
        return False, error

    valid, error = validate_thresholds(settings.get('tau_pass', 1e-9), settings.get('tau_fail', 1e-6))
    if not valid:
        return False, error

    try:
        int(settings.get('seed', 0))
    except (ValueError, TypeError):
        return False, "Seed must be an integer"

    try:
        exclusion = float(settings.get('exclusion', 0.5))
        fixpoint_tol = float(settings.get('fixpoint_tol', 1e-10))
    except (ValueError, TypeError):
        return False, "exclusion and fixpoint_tol must be valid numbers"
    if not 0 <= exclusion < 1:
        return False, "Exclusion must be in [0, 1) grid steps"
    if not fixpoint_tol > 0:
        return False, "Fixed-point tolerance must be positive"

    return True, ""
