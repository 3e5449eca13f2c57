from einfty import faces
from einfty.level_trees import enumerate_reduced, tree_from_barcode


def test_codim1_faces_exist():
    t = tree_from_barcode("[1|2||3]")
    fs = list(faces.iter_faces(t, 1))
    assert fs
    assert all(t.dim - f.element().degree == 1 for f in fs)


def test_signed_square_zero_regular():
    table = faces.default_table(4, 3)
    for n in (2, 3, 4):
        for d in range(n - 2, 4):
            for tree in enumerate_reduced(n, d):
                assert not table.d(table.boundary_unlabeled(tree.gaps)), tree.barcode()


def test_mod2_agrees_with_signed():
    t = tree_from_barcode("[1||2||3]")
    assert faces.d_reg_signed(t).to_ring("F2") == faces.d_reg_mod2(t)
