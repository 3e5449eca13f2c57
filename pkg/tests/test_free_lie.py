from einfty import free_lie as fl


def test_bracket_is_lie():
    f = fl.bracket({(1,): 1}, {(2,): 1})
    assert f == {(1, 2): 1, (2, 1): -1}
    assert fl.ree_test(f, 2)


def test_non_lie_rejected():
    assert not fl.ree_test({(1, 2): 1}, 2)
    assert fl.lie_coordinates({(1, 2): 1}, 2) is None


def test_coordinates_of_left_normed():
    f = fl.expand_left_normed((1, 3, 2))
    assert fl.lie_coordinates(f, 4) == {(1, 3, 2): 1}


def test_exhaustive_n3():
    ex = fl.ree_exhaustive(3)
    assert ex["agree"] == ex["total"] == 729


def test_quotient_reports():
    for signed in (False, True):
        rep = fl.ush_quotient_report(4, signed)
        assert rep["torsion_free"] and rep["quotient_rank"] == 6
        assert abs(rep["pairing_det"]) == 1


def test_tree_boundaries_match_signed():
    assert fl.tree_boundary_matches_signed_ush(4)
