"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

RESULTS: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    RESULTS.append(line)
    print(line)
    return ok


def finding(criterion: str, detail: str) -> None:
    line = f"criterion {criterion}: FINDING  ({detail})"
    RESULTS.append(line)
    print(line)
