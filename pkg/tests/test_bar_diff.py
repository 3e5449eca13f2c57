from einfty import bar_diff
from einfty.free_operad import FormalSum
from einfty.level_trees import enumerate_labeled, tree_from_barcode


def test_known_linear_part():
    got = bar_diff.d_lin(tree_from_barcode("[1|2||3]"))
    assert got == FormalSum.parse("[1|2|3] - [1|3|2] + [3|1|2]")


def test_linear_square_zero_small():
    for n in (2, 3, 4):
        for d in range(n - 2, 5):
            for t in enumerate_labeled(n, d):
                acc = {}
                for (l2, g2), c in bar_diff.d_lin_pairs(t.labels, t.tree.gaps).items():
                    for k, c2 in bar_diff.d_lin_pairs(l2, g2).items():
                        acc[k] = acc.get(k, 0) + c * c2
                assert not any(acc.values()), t.barcode()


def test_transport_matches_oracle():
    for t in enumerate_labeled(4, 3):
        assert (bar_diff.d_lin_pairs(t.labels, t.tree.gaps)
                == bar_diff.d_lin_pairs(t.labels, t.tree.gaps, oracle=True))


def test_redundant_generators_arity_three():
    # two different generators of the n = 3 tree complex share a boundary
    assert (bar_diff.d_lin(tree_from_barcode("[1|2||3]"))
            == bar_diff.d_lin(tree_from_barcode("[3||1|2]")))
