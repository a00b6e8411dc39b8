"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

LINES = {}


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    LINES[number] = line
    print(line)
    return passed
