import numpy
import pytest
from scipy.spatial.transform import Rotation

from dvgan.data.rotation import (
    elementary_rotmat,
    euler_to_rotmat,
    expmap_to_rotmat,
    geodesic_distance,
    rotmat_to_euler,
    rotmat_to_expmap,
)

orders = ["XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX"]


def _random_expmaps(num: int, seed: int = 0):
    rng = numpy.random.RandomState(seed)
    axis = rng.normal(size=(num, 3))
    axis /= numpy.linalg.norm(axis, axis=1, keepdims=True)
    angle = rng.uniform(0, numpy.pi - 1e-3, size=(num, 1))
    return axis * angle


def test_expmap_round_trip():
    for v in _random_expmaps(10000):
        r = expmap_to_rotmat(v)
        assert geodesic_distance(r, expmap_to_rotmat(rotmat_to_expmap(r))) < 1e-9
        numpy.testing.assert_allclose(rotmat_to_expmap(r), v, atol=1e-9)


def test_expmap_to_rotmat_matches_scipy():
    for v in _random_expmaps(100, seed=1):
        numpy.testing.assert_allclose(
            expmap_to_rotmat(v), Rotation.from_rotvec(v).as_matrix(), atol=1e-12
        )


def test_expmap_small_angle():
    numpy.testing.assert_array_equal(expmap_to_rotmat(numpy.zeros(3)), numpy.eye(3))
    v = numpy.array([1e-10, -2e-10, 3e-10])
    numpy.testing.assert_allclose(
        expmap_to_rotmat(v), Rotation.from_rotvec(v).as_matrix(), atol=1e-15
    )


def test_rotation_is_orthonormal():
    for v in _random_expmaps(100, seed=2):
        r = expmap_to_rotmat(v)
        numpy.testing.assert_allclose(r @ r.T, numpy.eye(3), atol=1e-12)
        assert numpy.linalg.det(r) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("order", orders)
def test_euler_round_trip(order: str):
    rng = numpy.random.RandomState(3)
    for _ in range(1000):
        angles = rng.uniform(-numpy.pi, numpy.pi, size=3)
        angles[1] = rng.uniform(-numpy.pi / 2 + 1e-3, numpy.pi / 2 - 1e-3)
        r = euler_to_rotmat(angles, order)
        numpy.testing.assert_allclose(rotmat_to_euler(r, order), angles, atol=1e-8)


@pytest.mark.parametrize("order", orders)
def test_euler_matches_scipy_intrinsic(order: str):
    angles = numpy.array([0.3, -0.5, 1.2])
    numpy.testing.assert_allclose(
        euler_to_rotmat(angles, order),
        Rotation.from_euler(order, angles).as_matrix(),
        atol=1e-12,
    )


@pytest.mark.parametrize("order", orders)
def test_euler_gimbal_lock(order: str):
    angles = numpy.array([0.4, numpy.pi / 2, 0.0])
    r = euler_to_rotmat(angles, order)
    recovered = rotmat_to_euler(r, order)
    assert recovered[2] == 0
    assert geodesic_distance(r, euler_to_rotmat(recovered, order)) < 1e-7


def test_elementary_rotmat():
    numpy.testing.assert_allclose(
        elementary_rotmat("Z", numpy.pi / 2) @ numpy.array([1, 0, 0]),
        numpy.array([0, 1, 0]),
        atol=1e-15,
    )
    with pytest.raises(ValueError):
        elementary_rotmat("W", 0)


def test_invalid_order():
    with pytest.raises(ValueError):
        euler_to_rotmat([0, 0, 0], "XXY")
