import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wmlab.cli import BUNDLED_SUITE  # noqa: E402
from wmlab.litmus import load_litmus, parse_litmus  # noqa: E402

SB_SOURCE = """\
name SB
init v=0 w=0
thread T0:
  write v 1
  read w -> r1
thread T1:
  write w 1
  read v -> r2
exists T0:r1=0 /\\ T1:r2=0
"""

MP_SOURCE = """\
name MP
init x=0 flag=0
thread T0:
  write x 1
  write flag 1
thread T1:
  read flag -> r1
  read x -> r2
forbidden T1:r1=1 /\\ T1:r2=0
"""

SF_SOURCE = """\
name SF
init v=0
thread T0:
  write v 5
  read v -> r
always T0:r=5 /\\ v=5
"""

SUITE_FILES = sorted(BUNDLED_SUITE.glob("*.litmus"))
# 12-access tests; their undeduplicated trees run to millions of nodes.
STRESS_FILES = sorted((Path(__file__).parent / "data").glob("*.litmus"))


@pytest.fixture
def sb():
    return parse_litmus(SB_SOURCE)


@pytest.fixture
def mp():
    return parse_litmus(MP_SOURCE)


@pytest.fixture
def sf():
    return parse_litmus(SF_SOURCE)


@pytest.fixture(scope="session")
def suite_tests():
    return [load_litmus(p) for p in SUITE_FILES]
