import pytest

CRITERIA = {
    1: "golden metrics, kappa_s/kappa = 0.2",
    2: "golden metrics, kappa_s/kappa = 0",
    3: "ideal circuits match I2+X and I6+X on every branch",
    4: "intermediate states, amplitude by amplitude",
    5: "closed-form vs simulated CNOT fidelity",
    6: "norm preservation and lost-sector accounting",
    7: "general coefficients at resonance vs resonant formula",
    8: "feasibility numbers within 15%",
    9: "sweeps non-increasing in kappa_s at fixed g",
}

# criterion -> list of (label, passed, detail)
_results: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, label: str, passed: bool, detail: str = "") -> bool:
        _results.setdefault(criterion, []).append((label, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title in CRITERIA.items():
        checks = _results.get(number)
        if not checks:
            tr.write_line(f"[NOT RUN] {number}. {title}")
            continue
        failed = [c for c in checks if not c[1]]
        status = "PASS" if not failed else "FAIL"
        line = f"[{status}] {number}. {title} ({len(checks) - len(failed)}/{len(checks)} checks)"
        tr.write_line(line)
        for label, _, detail in failed:
            tr.write_line(f"         failed: {label}: {detail}")
