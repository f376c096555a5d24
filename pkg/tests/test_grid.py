import numpy as np
import pytest

from monoscheme.grid import (
    BoundaryData1D,
    InvalidMeshError,
    Mesh1D,
    Mesh3D,
    MeshFunction,
    flat_index,
    make_mesh_3d,
    norm_c,
    sample,
    unflatten_index,
    with_boundary,
)


class TestMesh1D:
    def test_step_and_nodes(self):
        mesh = Mesh1D(0.0, 1.0, 9)
        assert mesh.h == pytest.approx(0.1, abs=0)
        assert mesh.x(0) == 0.0
        assert mesh.x(10) == pytest.approx(1.0)
        assert len(mesh.interior_x()) == 9
        assert len(mesh.all_x()) == 11

    def test_step_relation_exact(self):
        for a, b, n in ((0.0, 1.0, 7), (-2.0, 3.0, 13), (0.0, 1 / 30, 19)):
            mesh = Mesh1D(a, b, n)
            assert mesh.h == (b - a) / (n + 1)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidMeshError):
            Mesh1D(0.0, 1.0, 0)
        with pytest.raises(InvalidMeshError):
            Mesh1D(1.0, 1.0, 5)


class TestMesh3D:
    def test_trivial_example(self):
        mesh = make_mesh_3d(1.0, 2)
        assert mesh.h == 0.5
        assert mesh.cell_count == 8

    def test_fine_mesh(self):
        mesh = make_mesh_3d(1 / 30, 20)
        assert mesh.h == pytest.approx((1 / 30) / 20)
        assert mesh.cell_count == 8000

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidMeshError):
            make_mesh_3d(1.0, 0)
        with pytest.raises(InvalidMeshError):
            make_mesh_3d(-1.0, 4)

    def test_cell_centers(self):
        mesh = make_mesh_3d(1.0, 2)
        assert mesh.center(0, 0, 0) == (0.25, 0.25, 0.25)
        assert mesh.center(1, 1, 1) == (0.75, 0.75, 0.75)


class TestFlatIndex:
    def test_corners(self):
        assert flat_index(0, 0, 0, 20) == 0
        assert flat_index(19, 19, 19, 20) == 7999

    def test_arithmetic(self):
        assert flat_index(1, 2, 3, 4) == 1 + 8 + 48

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            flat_index(4, 0, 0, 4)
        with pytest.raises(IndexError):
            flat_index(0, -1, 0, 4)

    @pytest.mark.parametrize("N", [2, 3, 5, 8])
    def test_roundtrip_is_identity(self, N):
        for p in range(N**3):
            i, j, k = unflatten_index(p, N)
            assert flat_index(i, j, k, N) == p

    def test_grid_view_matches_flat_order(self):
        mesh = make_mesh_3d(1.0, 3)
        values = np.arange(27, dtype=float)
        mf = MeshFunction(mesh, values)
        g = mf.as_grid()
        for p in range(27):
            i, j, k = unflatten_index(p, 3)
            assert g[i, j, k] == p


class TestMeshFunction:
    def test_length_validation(self):
        mesh = Mesh1D(0.0, 1.0, 3)
        with pytest.raises(ValueError):
            MeshFunction(mesh, np.zeros(4))

    def test_values_frozen(self):
        mesh = Mesh1D(0.0, 1.0, 3)
        mf = MeshFunction(mesh, np.zeros(3))
        with pytest.raises(ValueError):
            mf.values[0] = 1.0

    def test_grid_roundtrip(self):
        mesh = make_mesh_3d(1.0, 4)
        values = np.random.default_rng(0).standard_normal(64)
        mf = MeshFunction(mesh, values)
        again = MeshFunction.from_grid(mesh, mf.as_grid())
        assert np.array_equal(again.values, values)


class TestSample:
    def test_linear_1d(self):
        mesh = Mesh1D(0.0, 1.0, 3)
        mf = sample(mesh, lambda x: x)
        assert np.allclose(mf.values, [0.25, 0.5, 0.75])

    def test_zero_function(self):
        mesh = Mesh1D(0.0, 1.0, 5)
        assert np.all(sample(mesh, lambda x: 0.0).values == 0.0)

    def test_cell_centers_3d(self):
        mesh = make_mesh_3d(1.0, 2)
        mf = sample(mesh, lambda x, y, z: x)
        assert set(np.round(mf.values, 12)) == {0.25, 0.75}


class TestBoundaryData:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            BoundaryData1D(float("nan"), 0.0)

    def test_with_boundary(self):
        mesh = Mesh1D(0.0, 1.0, 2)
        mf = MeshFunction(mesh, [1.0, 2.0])
        full = with_boundary(mf, BoundaryData1D(0.0, 3.0))
        assert np.array_equal(full, [0.0, 1.0, 2.0, 3.0])


def test_norm_c():
    assert norm_c(np.array([1.0, -3.0, 2.0])) == 3.0
    assert norm_c(np.array([])) == 0.0
