"""Subcommand handlers. Each returns a process exit code."""

import sys
from pathlib import Path
from typing import Optional

import numpy as np

from cli.report import (
    format_batch,
    format_check,
    format_fixpoints,
    format_residuals,
    format_solutions,
    fixpoints_to_dict,
    residuals_to_dict,
    to_json,
)
from core.batch_processor import BatchProcessor, check_problem
from core.criteria import fixed_points
from core.errors import (
    EXIT_BAD_INPUT,
    EXIT_FAILS,
    EXIT_HOLDS,
    EXIT_INCONSISTENT,
    CovarKitError,
    DegenerateAllFixed,
    exit_code_for_error,
)
from core.funcalg import Polynomial
from core.logger import log_error, log_info, log_warning
from core.oracle import OracleConfig, residual_table
from core.problem import dump_problem, load_problem
from core.search import FamilySpec, enumerate_solutions, sample_case
from utils.config import Config
from utils.validators import validate_folder_path, validate_settings


def _fail(error: Exception) -> int:
    code = exit_code_for_error(error)
    log_error(f"{type(error).__name__}: {error} (exit {code})")
    print(f"error: {error}", file=sys.stderr)
    return code


def _settings(config: Config, problem, overrides: Optional[dict]) -> dict:
    """Merged settings for one problem.

    Raises:
        ValueError: if the merged settings are invalid
    """
    settings = config.resolve(problem.oracle if problem is not None else None, overrides)
    valid, error = validate_settings(settings)
    if not valid:
        raise ValueError(f"Invalid settings: {error}")
    return settings


def run_check(path, config: Config, overrides: Optional[dict] = None, as_json: bool = False) -> int:
    """Decide a problem file and crosscheck it with the oracle.

    Returns:
        0 Holds (or a parameter family), 1 Fails, 2 Unknown, 3 INCONSISTENT,
        64 bad input, 65 window too small, 66 unsupported family
    """
    try:
        problem = load_problem(path)
        result = check_problem(problem, _settings(config, problem, overrides))
    except (CovarKitError, ValueError) as e:
        return _fail(e)
    print(to_json(result.to_dict()) if as_json else format_check(result))
    log_info(f"check {path}: {result.verdict.status.value}, exit {result.exit_code}")
    return result.exit_code


def run_oracle(path, config: Config, overrides: Optional[dict] = None, as_json: bool = False) -> int:
    """Print the per-function residual table of a problem file."""
    try:
        problem = load_problem(path)
        if problem.is_family():
            raise ValueError("the oracle needs concrete coefficients; use 'search' for families")
        cfg = OracleConfig.from_settings(_settings(config, problem, overrides), problem.bounds())
        rows = residual_table(problem.A, problem.B, problem.F, problem.form, cfg)
    except (CovarKitError, ValueError) as e:
        return _fail(e)
    print(to_json(residuals_to_dict(rows, cfg)) if as_json else format_residuals(rows, cfg))
    return EXIT_HOLDS


def _emit_cases(problem, solutions, folder, seed: int) -> int:
    """Write one sampled concrete problem per solution case, each expected to hold.

    Raises:
        ValueError: if a file cannot be written
    """
    folder = Path(folder)
    try:
        folder.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValueError(f"could not create {folder}: {e}")
    rng = np.random.default_rng(seed)
    names = problem.free_parameters()
    for k, case in enumerate(solutions.cases, start=1):
        values = sample_case(case, solutions, rng, names)
        if not case.allows(values, solutions.fixed):
            log_warning(f"search: sample {values} falls outside case {k}")
        concrete = problem.bind(values, f"{problem.name}_case{k}",
                                {'status': 'Holds', 'exit_code': EXIT_HOLDS})
        target = folder / f"{concrete.name}.json"
        if not dump_problem(concrete, target):
            raise ValueError(f"could not write {target}")
        log_info(f"search: case {k} written to {target} with {values}")
    return len(solutions.cases)


def run_search(path, config: Config, overrides: Optional[dict] = None, as_json: bool = False,
               emit=None) -> int:
    """Enumerate the parameter cases of a family file.

    With emit, also write one concrete problem per case into that folder,
    ready for the batch command.
    """
    try:
        problem = load_problem(path)
        settings = _settings(config, problem, overrides)
        fam = FamilySpec(problem.A, problem.B, problem.F, problem.form, problem.window)
        solutions = enumerate_solutions(fam, max_cases=int(settings['max_cases']))
        written = _emit_cases(problem, solutions, emit, int(settings['seed'])) if emit else None
    except (CovarKitError, ValueError) as e:
        return _fail(e)
    print(to_json(solutions.to_dict()) if as_json else format_solutions(solutions))
    if written is not None and not as_json:
        print(f"Wrote {written} problem file(s) to {emit}")
    return EXIT_HOLDS


def run_fixpoints(source: str, config: Config, as_json: bool = False) -> int:
    """Fixed points of F, read from a problem file or from inline coefficients "0,0,0,1"."""
    try:
        if Path(source).is_file():
            F = load_problem(source).F
        else:
            F = Polynomial.parse(source)
        try:
            fix = fixed_points(F, tol=float(config.get('fixpoint_tol', 1e-10)))
        except DegenerateAllFixed:
            fix = None
    except (CovarKitError, ValueError) as e:
        return _fail(e)
    print(to_json(fixpoints_to_dict(F, fix)) if as_json else format_fixpoints(F, fix))
    return EXIT_HOLDS


def run_batch(folder, config: Config, overrides: Optional[dict] = None, as_json: bool = False) -> int:
    """Check every problem file in a folder against its expect block.

    Returns:
        0 when every file matches, 1 on any mismatch, 3 on any INCONSISTENT crosscheck
    """
    valid, error = validate_folder_path(folder)
    if not valid:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_BAD_INPUT

    processor = BatchProcessor(
        folder,
        settings_for=lambda problem: _settings(config, problem, overrides),
    )
    success, error, stats = processor.process_all_files()
    if not success:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_BAD_INPUT

    if as_json:
        print(to_json(stats))
    else:
        print(format_batch(stats))
    if stats['inconsistent']:
        return EXIT_INCONSISTENT
    return EXIT_FAILS if stats['mismatched'] else EXIT_HOLDS
