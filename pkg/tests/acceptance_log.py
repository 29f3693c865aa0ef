"""Collects PASS/FAIL lines from the acceptance suite for the terminal summary."""

LINES: list[str] = []
