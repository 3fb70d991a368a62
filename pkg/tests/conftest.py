import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from demonic_ol.parser import parse_program

CORPUS = Path(__file__).resolve().parents[1] / "src" / "demonic_ol" / "corpus"

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def corpus_program(name: str):
    return parse_program((CORPUS / f"{name}.dol").read_text())


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


@pytest.fixture
def corpus():
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for row in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_line(*row))
