"""Locating problem files on disk."""

import re
from pathlib import Path
from typing import List


# Problem files are JSON documents; ".family" marks search templates
PROBLEM_EXTENSIONS = {'.json', '.problem', '.family'}


def scan_for_problems(folder: Path) -> List[Path]:
    """Problem files directly inside folder, in natural name order.

    The extension match ignores case. Hidden files (".name") and
    subfolders are skipped; the batch command does not recurse.

    Args:
        folder: Folder to scan

    Returns:
        List of problem file paths
    """
    found = [
        p for p in Path(folder).iterdir()
        if p.is_file() and not p.name.startswith('.') and p.suffix.lower() in PROBLEM_EXTENSIONS
    ]
    return sorted(found, key=lambda p: natural_sort_key(p.name))


def natural_sort_key(s: str) -> list:
    """Key that orders case2 before case10, ignoring case."""
    return [int(c) if c.isdigit() else c.lower() for c in re.split(r'(\d+)', s)]
