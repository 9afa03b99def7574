"""Shared state between the acceptance tests and the terminal summary hook."""

ACCEPTANCE_LINES: list[str] = []
