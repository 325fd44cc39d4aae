from typing import Sequence

import numpy
from scipy.spatial.transform import Rotation

small_angle_threshold = 1e-8
gimbal_lock_threshold = 1e-7

_axis_index = {"X": 0, "Y": 1, "Z": 2}


def _skew(v: numpy.ndarray):
    return numpy.array(
        [
            [0, -v[2], v[1]],
            [v[2], 0, -v[0]],
            [-v[1], v[0], 0],
        ],
        dtype=numpy.float64,
    )


def expmap_to_rotmat(v: Sequence[float]):
    """
    Rodrigues formula. Below `small_angle_threshold` the sin/cos coefficients are
    replaced with their Taylor series so the result stays smooth at the origin.
    """
    v = numpy.asarray(v, dtype=numpy.float64)
    assert v.shape == (3,), v.shape

    theta2 = float(v @ v)
    theta = numpy.sqrt(theta2)
    if theta < small_angle_threshold:
        a = 1 - theta2 / 6
        b = 0.5 - theta2 / 24
    else:
        a = numpy.sin(theta) / theta
        b = (1 - numpy.cos(theta)) / theta2

    k = _skew(v)
    return numpy.eye(3) + a * k + b * (k @ k)


def rotmat_to_expmap(r: numpy.ndarray):
    return Rotation.from_matrix(numpy.asarray(r, dtype=numpy.float64)).as_rotvec()


def elementary_rotmat(axis: str, angle: float):
    c, s = numpy.cos(angle), numpy.sin(angle)
    if axis == "X":
        return numpy.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "Y":
        return numpy.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    if axis == "Z":
        return numpy.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    raise ValueError(axis)


def _check_order(order: str):
    order = order.upper()
    if len(order) != 3 or set(order) != {"X", "Y", "Z"}:
        raise ValueError(f"unsupported euler order: {order}")
    return order


def euler_to_rotmat(angles: Sequence[float], order: str):
    """
    `order` is read left to right as in BVH channel lists: "ZXY" means
    R = Rz(angles[0]) @ Rx(angles[1]) @ Ry(angles[2]).
    """
    order = _check_order(order)
    r = numpy.eye(3)
    for axis, angle in zip(order, angles):
        r = r @ elementary_rotmat(axis, angle)
    return r


def rotmat_to_euler(r: numpy.ndarray, order: str):
    """
    Inverse of `euler_to_rotmat`. At gimbal lock (|middle angle| = pi/2) the third
    angle is set to 0 and the first absorbs the remaining rotation.
    """
    order = _check_order(order)
    r = numpy.asarray(r, dtype=numpy.float64)
    i, j, k = (_axis_index[a] for a in order)
    sign = 1.0 if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1.0

    sin_b = numpy.clip(sign * r[i, k], -1.0, 1.0)
    b = numpy.arcsin(sin_b)

    if abs(abs(b) - numpy.pi / 2) < gimbal_lock_threshold:
        a = numpy.arctan2(sign * r[k, j], r[j, j])
        c = 0.0
    else:
        a = numpy.arctan2(-sign * r[j, k], r[k, k])
        c = numpy.arctan2(-sign * r[i, j], r[i, i])

    return numpy.array([a, b, c])


def geodesic_distance(r1: numpy.ndarray, r2: numpy.ndarray):
    # arccos of the trace loses precision near identity
    return float(numpy.linalg.norm(rotmat_to_expmap(r1.T @ r2)))
