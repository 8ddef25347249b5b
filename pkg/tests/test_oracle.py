"""Independent branch-by-branch checks of every gadget family."""

import pytest

from adbqc import rng
from adbqc.oracle import (
    GADGET_FIDELITY_ATOL,
    ORACLE_GADGETS,
    BranchRow,
    admissible_octants,
    branch_table,
    soundness_sweep,
    table_passes,
)
from adbqc.qsim import StateVector, haar_random_state


def test_gadget_roster():
    assert ORACLE_GADGETS == ("hrz-sueki", "p1-a", "p1-b", "p2", "cz")


def test_admissible_octants():
    assert admissible_octants("hrz-sueki") == tuple(range(8))
    assert admissible_octants("p2") == tuple(range(8))
    assert admissible_octants("p1-a") == (0, 2, 4, 6)
    assert admissible_octants("p1-b") == (1, 3, 5, 7)
    assert admissible_octants("cz") == (0,)


def test_admissible_octants_unknown_gadget():
    with pytest.raises(ValueError):
        admissible_octants("teleport")


def test_sueki_table_on_zero_input():
    rows = branch_table("hrz-sueki", 0, StateVector.zero(1), hidden=(2, 0, +1))
    assert len(rows) == 4
    for row in rows:
        assert row.probability == pytest.approx(0.25, abs=1e-12)
        assert row.fidelity >= 1.0 - GADGET_FIDELITY_ATOL
        assert row.announced is not None
    assert sum(r.probability for r in rows) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("octant", range(8))
def test_gate_lending_table(octant):
    rows = branch_table("p2", octant)
    assert len(rows) == 2
    for row in rows:
        assert row.probability == pytest.approx(0.5, abs=1e-9)
        assert row.fidelity >= 1.0 - GADGET_FIDELITY_ATOL
        assert row.announced is None


@pytest.mark.parametrize("gadget,octant", [("p1-a", 2), ("p1-a", 6), ("p1-b", 1), ("p1-b", 7)])
def test_measure_only_tables(gadget, octant):
    state = haar_random_state(1, rng.stream(170, "oracle-p1", octant))
    rows = branch_table(gadget, octant, state)
    assert sum(r.probability for r in rows) == pytest.approx(1.0, abs=1e-9)
    for row in rows:
        assert row.fidelity >= 1.0 - GADGET_FIDELITY_ATOL


def test_cz_table():
    state = haar_random_state(2, rng.stream(171, "oracle-cz"))
    rows = branch_table("cz", 0, state)
    assert len(rows) == 2
    assert sum(r.probability for r in rows) == pytest.approx(1.0, abs=1e-9)
    for row in rows:
        assert row.fidelity >= 1.0 - GADGET_FIDELITY_ATOL


@pytest.mark.parametrize("gadget,octant", [("p1-a", 1), ("p1-b", 2), ("cz", 3)])
def test_inadmissible_octants_rejected(gadget, octant):
    with pytest.raises(ValueError):
        branch_table(gadget, octant)


def test_table_passes_flags_low_fidelity():
    rows = branch_table("p2", 3)
    assert table_passes(rows)
    broken = list(rows) + [BranchRow((0,), 0.0, 0.9)]
    assert not table_passes(broken)


def test_soundness_sweep_small():
    worst, count = soundness_sweep(states_per_octant=1, seed=321)
    assert count == 25
    assert worst >= 1.0 - GADGET_FIDELITY_ATOL


def test_soundness_sweep_is_seeded():
    a = soundness_sweep(states_per_octant=1, seed=99)
    b = soundness_sweep(states_per_octant=1, seed=99)
    assert a == b
