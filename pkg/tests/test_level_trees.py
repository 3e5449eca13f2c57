import pytest

from einfty.errors import ValidationError
from einfty.level_trees import (
    LevelTree, enumerate_labeled, enumerate_reduced, flag_to_tree, parse_barcode,
    perm_inverse, perm_mul, perm_sign, tree_from_barcode, tree_to_flag,
)


@pytest.mark.parametrize("d", range(7))
def test_reduced_count_is_power_of_two(d):
    assert len(enumerate_reduced(None, d)) == 2 ** d


def test_barcode_round_trip():
    for text in ["[1|2||3]", "[1|2|||3|4]", "[2||1]"]:
        assert tree_from_barcode(text).barcode() == text


def test_dimension_from_gaps():
    t = tree_from_barcode("[1|2||3|4||5|6]")
    assert t.dim == 6
    assert t.height == 2


def test_flag_round_trip():
    for t in enumerate_labeled(3, 2):
        assert flag_to_tree(tree_to_flag(t)).barcode() == t.barcode()


def test_labeled_count():
    # every reduced tree of arity n carries n! labelings
    assert len(enumerate_labeled(3, 1)) == 6 * len(enumerate_reduced(3, 1))


def test_permutations():
    s = (2, 3, 1)
    assert perm_mul(s, perm_inverse(s)) == (1, 2, 3)
    assert perm_sign((2, 1, 3)) == -1
    assert perm_sign((2, 3, 1)) == 1


def test_from_gaps_prune_reduce():
    t = LevelTree.from_gaps((1, 2))
    assert t.is_reduced
    assert t.suspend().reduce() == t


@pytest.mark.parametrize("bad", ["[1|2|", "[1|1]", "1|2", "[1|x]", "[]"])
def test_bad_barcodes_rejected(bad):
    with pytest.raises(ValidationError):
        parse_barcode(bad)
