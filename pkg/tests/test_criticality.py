import pytest

from einfty import criticality as cr
from einfty.criticality import INF
from einfty.level_trees import tree_from_barcode


@pytest.mark.parametrize("n,h,want", [
    (2, INF, INF), (3, 2, INF), (4, INF, 4), (4, 2, INF), (5, 2, INF),
    (6, 2, 6), (4, 3, 4), (7, 1, INF),
])
def test_d_crit(n, h, want):
    assert cr.d_crit(n, h) == want


def test_tamarkin_certificate():
    res = cr.classify(6, 2)
    assert not res["regular"]
    assert res["witness"] == "[1|2||3|4||5|6]"
    assert res["certificate"]["amputated"] == "[1|2|3]"


def test_no_source_target_in_regular_range():
    assert cr.source_target_witnesses(tree_from_barcode("[1|2||3]")) == []


def test_mar_counterterm():
    t = tree_from_barcode("[1|2|||3|4]")
    u = cr.find_counterterm(t)
    assert cr.verify_counterterm(t, list(u.terms))
    assert cr.verify_counterterm(t, ["[[1|||3]|[4||2]]", "[[1||3]|[2|||4]]"])
    assert not cr.verify_counterterm(t, ["[[1|||3]|[4||2]]"])


def test_figures_match():
    assert all(not bad for bad in cr.compare_figures().values())
