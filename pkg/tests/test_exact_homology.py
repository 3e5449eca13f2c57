from einfty import exact_homology as eh
from einfty.exact_homology import INF, IntegerMatrix, smith_normal_form


def test_smith_normal_form_torsion():
    m = IntegerMatrix.from_dense([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    s = smith_normal_form(m)
    assert list(s.divisors) == [2, 6, 12]


def test_smith_zero_matrix():
    assert smith_normal_form(IntegerMatrix.from_dense([[0, 0], [0, 0]])).rank == 0


def test_matrix_market_round_trip():
    m = IntegerMatrix.from_dense([[1, 0, -3], [0, 5, 0]])
    assert IntegerMatrix.from_matrix_market(m.to_matrix_market()).to_dense() == m.to_dense()


def test_colimit_arity_four():
    rep = eh.homology_report(4, INF, 5)
    assert {r["degree"]: r["rank"] for r in rep if r["rank"]} == {2: 6}


def test_finite_height_matches_expected():
    rep = eh.homology_report(3, 2)
    assert {r["degree"]: r["rank"] for r in rep if r["rank"]} == eh.expected_ranks(3, 2)
