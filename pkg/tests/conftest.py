from fractions import Fraction as F

import pytest

from hybridprice.model import PriceSchedule


@pytest.fixture
def p0():
    """Reference schedule used throughout the worked examples."""
    return PriceSchedule(p_n=F(1), p_b=F(4), p_std=F(2), p_u=F(4), s=F(1, 10))


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number} {status}: {title} ({detail})")
