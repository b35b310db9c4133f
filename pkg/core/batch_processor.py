"""Problem checking pipeline and batch runs over fixture folders."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from core.criteria import Status, Verdict, decide
from core.errors import (
    EXIT_FAILS,
    EXIT_HOLDS,
    EXIT_INCONSISTENT,
    EXIT_UNKNOWN,
    CovarKitError,
    exit_code_for_error,
)
from core.logger import log_error, log_info, log_warning
from core.oracle import Consistency, ConsistencyReport, OracleConfig, crosscheck, residual
from core.problem import ProblemFile, load_problem
from core.search import FamilySpec, SolutionSet, conditional_verdict, enumerate_solutions
from utils.file_utils import scan_for_problems


_STATUS_EXIT = {
    Status.HOLDS: EXIT_HOLDS,
    Status.CONDITIONAL: EXIT_HOLDS,
    Status.FAILS: EXIT_FAILS,
    Status.UNKNOWN: EXIT_UNKNOWN,
}


@dataclass
class CheckResult:
    """Outcome of checking one problem."""

    name: str
    verdict: Verdict
    report: Optional[ConsistencyReport] = None
    solutions: Optional[SolutionSet] = None

    @property
    def residual(self) -> Optional[float]:
        return None if self.report is None else self.report.residual

    @property
    def exit_code(self) -> int:
        return exit_code_for(self.verdict, self.report)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'verdict': self.verdict.to_dict(),
            'crosscheck': None if self.report is None else self.report.to_dict(),
            'solutions': None if self.solutions is None else self.solutions.to_dict(),
            'exit_code': self.exit_code,
        }


def exit_code_for(verdict: Verdict, report: Optional[ConsistencyReport] = None) -> int:
    """Exit code from the verdict and its crosscheck.

    An INCONSISTENT crosscheck overrides the verdict.
    """
    if report is not None and report.status is Consistency.INCONSISTENT:
        return EXIT_INCONSISTENT
    return _STATUS_EXIT[verdict.status]


def check_problem(problem: ProblemFile, settings: dict) -> CheckResult:
    """Decide a problem symbolically and crosscheck it on a grid.

    Families (free coefficients) are answered by the parameter search and
    are not crosschecked.

    Raises:
        WindowTooSmall: the oracle would read outside the window
        NotContinuous: a continuous-space criterion met a jump
        UnsupportedFamily: free parameters the search cannot handle
    """
    if problem.is_family():
        fam = FamilySpec(problem.A, problem.B, problem.F, problem.form, problem.window)
        solutions = enumerate_solutions(fam, max_cases=int(settings.get('max_cases', 64)))
        return CheckResult(problem.name, conditional_verdict(solutions), solutions=solutions)

    verdict = decide(problem.A, problem.B, problem.F, problem.form, problem.window)
    cfg = OracleConfig.from_settings(settings, problem.bounds())
    r = residual(problem.A, problem.B, problem.F, problem.form, cfg)
    report = crosscheck(verdict, r, cfg)
    if report.status is Consistency.INCONSISTENT:
        log_error(f"{problem.name}: {report.message}")
    elif report.status is Consistency.AMBIGUOUS:
        log_warning(f"{problem.name}: {report.message}")
    return CheckResult(problem.name, verdict, report)


def expectation_mismatch(expect: dict, result: Optional[CheckResult], exit_code: int) -> str:
    """Compare against a problem's expect block. Empty string when it matches."""
    wanted_code = expect.get('exit_code')
    if wanted_code is not None and int(wanted_code) != exit_code:
        return f"exit code {exit_code}, expected {wanted_code}"
    wanted_status = expect.get('status')
    if wanted_status is not None:
        actual = result.verdict.status.value if result is not None else 'error'
        if actual != wanted_status:
            return f"status {actual}, expected {wanted_status}"
    return ''


def _raw_expect(path: Path) -> dict:
    """Expect block of a file that failed to load, if it is readable JSON."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, ValueError):
        return {}
    expect = data.get('expect') if isinstance(data, dict) else None
    return expect if isinstance(expect, dict) else {}


class BatchProcessor:
    """Runs the check pipeline over every problem file in a folder."""

    def __init__(self, input_folder=None, settings_for: Callable[[ProblemFile], dict] = None,
                 progress_callback=None, log_callback=None):
        """Initialize batch processor.

        Args:
            input_folder: Folder holding problem files
            settings_for: Callable(problem) -> merged settings for that problem
            progress_callback: Callback(current, total, message) for progress updates
            log_callback: Callback(message) for per-file status lines
        """
        self.input_folder = input_folder
        self.settings_for = settings_for or (lambda problem: dict(problem.oracle))
        self.progress_callback = progress_callback
        self.log_callback = log_callback
        self.cancel_flag = False

    def cancel(self):
        """Request cancellation of current processing."""
        self.cancel_flag = True
        log_info("Batch cancellation requested")

    def reset_cancel(self):
        """Reset cancellation flag."""
        self.cancel_flag = False

    def _status(self, message: str):
        if self.log_callback:
            self.log_callback(message)

    def process_all_files(self) -> tuple[bool, str, dict]:
        """Check every problem file in the input folder.

        A broken file is recorded and the batch moves on.

        Returns:
            Tuple of (success, error_message, statistics). success is False
            only when the folder holds nothing to check.
        """
        self.reset_cancel()
        try:
            files = scan_for_problems(Path(self.input_folder))
        except OSError as e:
            log_error(f"Could not scan {self.input_folder}: {e}")
            return False, f"Could not scan folder: {e}", {}

        if not files:
            return False, "No problem files found in input folder", {}

        stats = {
            'total': len(files),
            'processed': 0,
            'matched': 0,
            'mismatched': 0,
            'errors': 0,
            'inconsistent': 0,
            'results': [],
        }
        log_info(f"Batch check of {len(files)} problem file(s) in {self.input_folder}")

        for i, path in enumerate(files, start=1):
            if self.cancel_flag:
                log_warning("Batch cancelled by user")
                break
            if self.progress_callback:
                self.progress_callback(i, len(files), f"Checking {path.name}")

            problem, result, error = None, None, ''
            try:
                problem = load_problem(path)
                result = check_problem(problem, self.settings_for(problem))
                exit_code = result.exit_code
            except (CovarKitError, ValueError) as e:
                exit_code = exit_code_for_error(e)
                error = str(e)
                stats['errors'] += 1
                log_error(f"{path.name}: {e}")
            except Exception as e:
                exit_code = EXIT_INCONSISTENT
                error = f"Unexpected error: {e}"
                stats['errors'] += 1
                log_error(f"{path.name}: unexpected error: {e}")

            expect = problem.expect if problem is not None else _raw_expect(path)
            if expect:
                mismatch = expectation_mismatch(expect, result, exit_code)
            else:
                # Without an expect block only errors and inconsistencies count
                mismatch = error or ('' if exit_code < EXIT_INCONSISTENT else f"exit code {exit_code}")

            if exit_code == EXIT_INCONSISTENT:
                stats['inconsistent'] += 1
            if mismatch:
                stats['mismatched'] += 1
            else:
                stats['matched'] += 1
            stats['processed'] += 1

            status = result.verdict.status.value if result is not None else 'error'
            stats['results'].append({
                'file': path.name,
                'status': status,
                'exit_code': exit_code,
                'residual': None if result is None else result.residual,
                'mismatch': mismatch,
                'error': error,
            })
            line = f"[{i}/{len(files)}] {path.name}: {status} (exit {exit_code})"
            self._status(line + (f" MISMATCH: {mismatch}" if mismatch else ''))

        log_info(f"Batch complete: {stats['matched']} matched, {stats['mismatched']} mismatched, "
                 f"{stats['errors']} error(s)")
        return True, "", stats
