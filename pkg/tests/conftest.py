from __future__ import annotations

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))


def acceptance_lines() -> list[str]:
    lines = []
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for p, _ in parts)
        lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  " + "; ".join(d for _, d in parts))
    return lines


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines():
            terminalreporter.write_line(line)
