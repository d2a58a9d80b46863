import pytest

from restriction_lab import acceptance
from restriction_lab.acceptance import run_acceptance
from restriction_lab.exceptions import RefinementError


def test_raising_criterion_is_recorded_as_failed(lab, monkeypatch):
    def broken(lab, full):
        raise RefinementError("grid too coarse for the box")

    monkeypatch.setattr(acceptance, "CRITERIA", [("broken", broken), ("parseval", acceptance.parseval)])
    items = run_acceptance(lab)
    assert [item.name for item in items] == ["broken", "parseval"]
    assert not items[0].passed
    assert "grid too coarse" in items[0].detail
    assert items[1].passed


def test_parseval(lab):
    item = acceptance.parseval(lab, False)
    assert item.passed
    assert item.value <= acceptance.PARSEVAL_TOL


def test_lorentz_anchor(lab):
    item = acceptance.lorentz_anchor(lab, False)
    assert item.passed


@pytest.mark.slow
def test_quick_suite_passes(lab):
    items = run_acceptance(lab)
    assert [item.criterion for item in items] == list(range(1, 11))
    failed = [f"{item.name}: {item.detail}" for item in items if not item.passed]
    assert not failed
    assert items[5].detail.startswith("quick: 20 densities against 20 calibration densities")


def test_quick_knapp_states_its_size(lab):
    item = acceptance.knapp_necessity(lab, False)
    assert item.detail.startswith("quick: 1 of 36 slope fits")
