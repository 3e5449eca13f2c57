"""Acceptance criteria 1-8, one test each.

Each test prints (and records for the terminal summary) a line
"criterion k: PASS|FAIL".  Failing checks are reported, not hidden.
Run directly with ``python3 tests/test_acceptance.py`` for the lines alone.
"""

import json
import subprocess
import sys
import time

import pytest

from einfty import acceptance

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = {}

LIMITS = {1: 10, 2: 120, 3: 300, 4: 60, 5: 300, 6: 600, 7: 300, 8: 1200}


def _record(k: int, title: str, passed: bool, seconds: float, failed=()) -> str:
    line = f"criterion {k}: {'PASS' if passed else 'FAIL'} ({title}, {seconds:.1f}s)"
    if failed:
        line += " failed checks: " + "; ".join(failed)
    ACCEPTANCE_LINES[k] = line
    print(line)
    return line


def _run(k: int):
    start = time.perf_counter()
    res = acceptance.CRITERIA[k]()
    seconds = time.perf_counter() - start
    failed = [c["name"] for c in res["checks"] if not c["passed"]]
    passed = res["passed"] and seconds < LIMITS[k]
    if seconds >= LIMITS[k]:
        failed.append(f"runtime {seconds:.0f}s over the {LIMITS[k]}s budget")
    _record(k, res["title"], passed, seconds, failed)
    return passed, failed, res


@pytest.mark.parametrize("k", sorted(acceptance.CRITERIA))
def test_criterion(k):
    passed, failed, res = _run(k)
    assert passed, json.dumps([c for c in res["checks"] if not c["passed"]], indent=1)[:4000]


def _selftest_stdout() -> bytes:
    proc = subprocess.run([sys.executable, "-m", "einfty", "selftest"],
                          capture_output=True, timeout=LIMITS[8])
    return proc.stdout


def test_criterion_8_determinism():
    start = time.perf_counter()
    first = _selftest_stdout()
    second = _selftest_stdout()
    seconds = time.perf_counter() - start
    ok = bool(first) and first == second
    if ok:
        json.loads(first)  # a single well-formed JSON report
    _record(8, "selftest output is byte-identical across runs", ok, seconds)
    assert ok


if __name__ == "__main__":
    results = [_run(k)[0] for k in sorted(acceptance.CRITERIA)]
    start = time.perf_counter()
    same = _selftest_stdout() == _selftest_stdout()
    _record(8, "selftest output is byte-identical across runs", same, time.perf_counter() - start)
    sys.exit(0 if all(results) and same else 1)
