import pytest

from matsubdiff.exceptions import UnknownExample
from matsubdiff.repro import EXAMPLE_NAMES, build_example


@pytest.mark.parametrize("name", EXAMPLE_NAMES)
def test_all_facts_hold(name):
    ex = build_example(name)
    assert ex.facts
    results = ex.run()
    assert all(ok for _, ok in results), [d for d, ok in results if not ok]


def test_run_is_repeatable():
    ex = build_example("abs-sum-2x2")
    assert ex.run() == ex.run()


def test_unknown():
    with pytest.raises(UnknownExample):
        build_example("nope")
