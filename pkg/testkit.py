"""
Tiny runner so every test_*.py file also works as `python test_x.py`.
"""
import sys
import traceback
from typing import Any, Dict

import pytest


class TestResults:
    """Track test results"""
    def __init__(self):
        self.passed = 0
        self.failed = 0
        self.skipped = 0
        self.errors = []

    def record_pass(self, test_name: str):
        self.passed += 1
        print(f"✓ {test_name}")

    def record_skip(self, test_name: str, reason: str):
        self.skipped += 1
        print(f"- {test_name}: skipped ({reason})")

    def record_fail(self, test_name: str, reason: str):
        self.failed += 1
        self.errors.append({"test": test_name, "reason": reason})
        print(f"✗ {test_name}: {reason}")

    def summary(self) -> bool:
        total = self.passed + self.failed
        print(f"\n{'=' * 60}")
        print(f"Test Results: {self.passed}/{total} passed, {self.skipped} skipped")
        if self.errors:
            print("\nFailed Tests:")
            for error in self.errors:
                print(f"  - {error['test']}: {error['reason']}")
        print(f"{'=' * 60}\n")
        return self.failed == 0


def run_tests(namespace: Dict[str, Any]) -> None:
    results = TestResults()
    for name, fn in list(namespace.items()):
        if not name.startswith("test_") or not callable(fn):
            continue
        try:
            fn()
            results.record_pass(name)
        except pytest.skip.Exception as e:
            results.record_skip(name, e.msg)
        except AssertionError as e:
            results.record_fail(name, str(e) or traceback.format_exc(limit=-1).strip())
        except Exception as e:
            results.record_fail(name, f"{type(e).__name__}: {e}")
    sys.exit(0 if results.summary() else 1)
