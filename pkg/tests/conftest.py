import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def groups():
    from galdelta.simplex import cyclic_group, symmetric_group

    return {"z1": cyclic_group(1), "z2": cyclic_group(2), "z3": cyclic_group(3), "s3": symmetric_group(3)}


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
