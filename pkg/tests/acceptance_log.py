"""Collects one status line per acceptance criterion for the terminal summary."""

LINES: dict = {}


def record(number: int, line: str) -> None:
    LINES[number] = line
