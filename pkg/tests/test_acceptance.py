"""Acceptance battery: every deliverable criterion, one printed verdict
line per criterion, at the frozen tolerances baked into the check
battery.  Run with -s to see the verdict lines even on success:

    pytest tests/test_acceptance.py -v -s
"""

import pytest

from ncgeo import checks

# criterion number -> battery record names that must all pass
CRITERIA = {
    1: ("c01-reference-action-value",),
    2: ("c02-distinguished-connection-solves-system",),
    3: ("c03-ricci-flatness",),
    4: ("c04a-critical-action-zero", "c04b-ricci-trace-zero"),
    5: ("c05-stationarity-fd",),
    6: ("c06a-plain-trace-system", "c06b-plain-action-zero",
        "c06c-plain-ricci-trace-zero"),
    7: ("c07a-koszul-equals-torsion-part",
        "c07b-koszul-torsion-free-compatible"),
    8: ("c08-closed-form-vs-pipeline",),
    9: ("c09-torus-split-constant-gq",),
    10: ("c10a-lattice-convergence-order", "c10b-classical-engine-vs-oracle"),
    11: ("c11a-solver-basin", "c11b-solver-critical-value-zero"),
    12: ("c12-asymmetric-inverse-blocks",),
}


@pytest.fixture(scope="module")
def battery():
    records = checks.run_battery(seed=0)
    return {r.name: r for r in records}


def test_battery_is_complete(battery):
    expected = sorted(name for names in CRITERIA.values() for name in names)
    assert sorted(battery) == expected
    assert len(battery) == 18


def _verdict(number, battery, names):
    ok = all(battery[name].passed for name in names)
    detail = "; ".join(
        "%s: %.6g vs tol %.3g" % (name, battery[name].computed,
                                  battery[name].tolerance)
        for name in names)
    print("criterion %02d: %s (%s)" % (number, "PASS" if ok else "FAIL",
                                       detail))
    for name in names:
        record = battery[name]
        assert record.passed, "%s failed: computed %.6g, tolerance %.3g" % (
            name, record.computed, record.tolerance)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, battery):
    _verdict(number, battery, CRITERIA[number])
