"""Shared fixtures: the bundled example knowledge base and acceptance reporting."""

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

DATA = Path(__file__).parent.parent / "src" / "tmln" / "data"


@pytest.fixture(scope="session")
def oresme_text() -> str:
    return (DATA / "oresme.tmln").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def oresme(oresme_text):
    from tmln.kbformat import parse

    outcome = parse(oresme_text)
    assert outcome.ok, [str(d) for d in outcome.diagnostics]
    return outcome.tmln


@pytest.fixture(scope="session")
def oresme_mi(oresme):
    from tmln.network import ground

    return ground(oresme)


_acceptance_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if name.startswith("test_criterion_"):
        _acceptance_results[name] = report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results, key=_criterion_order):
        verdict = "PASS" if _acceptance_results[name] else "FAIL"
        terminalreporter.write_line(f"{_pretty(name)}: {verdict}")


def _criterion_order(name: str):
    digits = "".join(c for c in name.split("_")[2] if c.isdigit())
    return int(digits or 0)


def _pretty(name: str) -> str:
    parts = name.replace("test_criterion_", "criterion ").split("_")
    return parts[0] + " (" + " ".join(parts[1:]) + ")" if len(parts) > 1 else parts[0]


@pytest.fixture(scope="session")
def names(oresme, oresme_mi):
    """Short handles for the example's facts, rules and rule instances."""
    out = {}
    for wf in oresme.facts:
        text = str(wf.formula)
        key = {
            "Person(NO, 1320, 1382)": "F1",
            "Philosopher(NO, 1320, 1382)": "F2",
            "LivePeriod(NO, MA, 1320, 1382)": "F3",
            "Studied(NO, CoN, 1340, 1354)": "F4",
            "Studied(NO, CoN, 1355, 1360)": "F5",
            "!Studied(NO, CoN, 1353, 1370)": "F6",
        }[text]
        out[key] = wf
    for wf in oresme.rules:
        out[wf.formula.label] = wf
    for wf in oresme_mi:
        if wf not in oresme.facts:
            text = str(wf.formula)
            if "1340" in text:
                out["GR11"] = wf
            elif "1355" in text:
                out["GR12"] = wf
            else:
                out["GR2"] = wf
    return out
