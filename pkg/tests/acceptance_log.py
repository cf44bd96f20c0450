"""Collector for one-line pass/fail records printed after the test run."""

lines: list[str] = []


def record(name: str, passed: bool, detail: str) -> bool:
    verdict = "PASS" if passed else "FAIL"
    lines.append(f"[{verdict}] {name}: {detail}")
    print(lines[-1], flush=True)
    return passed
