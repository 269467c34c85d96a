"""The acceptance suite, one test per criterion.

Every dimension claim and identity is exact: equality over the rationals,
no tolerances.  Each test prints its pass line so a verbose run reads as
the full verification report.
"""

import pytest

from divlab.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA,
                         ids=[f"c{c.ident:02d}" for c in CRITERIA])
def test_criterion(criterion, capsys):
    detail = criterion.fn()
    with capsys.disabled():
        print(f"\n[PASS] criterion {criterion.ident}: {criterion.title} — {detail}")
