from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy
from bvh import Bvh

from dvgan.data.motion_data import MotionClip
from dvgan.data.skeleton import Joint, Skeleton, channel_labels


class BvhParseError(ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class BvhHierarchyError(BvhParseError):
    pass


class BvhChannelCountError(BvhParseError):
    pass


class BvhFrameDataError(BvhParseError):
    pass


class _Statements:
    """
    Non-blank hierarchy lines as word lists, one statement per line.
    """

    def __init__(self, lines: List[str]):
        self.items: List[Tuple[int, List[str]]] = [
            (i + 1, line.split()) for i, line in enumerate(lines) if line.strip()
        ]
        self.last_line_number = len(lines)
        self.position = 0

    def peek(self) -> Optional[Tuple[int, List[str]]]:
        if self.position < len(self.items):
            return self.items[self.position]
        return None

    def next(self) -> Tuple[int, List[str]]:
        item = self.peek()
        if item is None:
            raise BvhHierarchyError("unexpected end of hierarchy", self.last_line_number)
        self.position += 1
        return item

    def expect(self, keyword: str, size: int):
        line_number, words = self.next()
        if words[0] != keyword or len(words) != size:
            raise BvhHierarchyError(
                f"expected '{keyword}' with {size - 1} values, got '{' '.join(words)}'",
                line_number,
            )
        return line_number, words[1:]


def _check_floats(words: List[str], line_number: int):
    try:
        values = numpy.array([float(w) for w in words])
    except ValueError as e:
        raise BvhHierarchyError(f"invalid number: {e}", line_number) from None
    if not numpy.all(numpy.isfinite(values)):
        raise BvhHierarchyError("offset must be finite", line_number)


def _check_offset(statements: _Statements):
    line_number, words = statements.expect("OFFSET", 4)
    _check_floats(words, line_number)


def _check_channels(words: List[str], line_number: int):
    try:
        count = int(words[1]) if len(words) > 1 else -1
    except ValueError:
        count = -1
    if count < 0:
        raise BvhHierarchyError("invalid channel count", line_number)
    if len(words) != count + 2:
        raise BvhHierarchyError(
            f"CHANNELS declares {count}, lists {len(words) - 2}", line_number
        )
    for channel in words[2:]:
        if channel not in channel_labels:
            raise BvhHierarchyError(f"unknown channel '{channel}'", line_number)
    return count


def _check_joint(statements: _Statements) -> int:
    """
    Checks one joint block after its ROOT or JOINT line; returns the channel count of the subtree.
    """
    statements.expect("{", 1)
    _check_offset(statements)

    width = 0
    item = statements.peek()
    if item is not None and item[1][0] == "CHANNELS":
        line_number, words = statements.next()
        width += _check_channels(words, line_number)

    has_end_site = False
    while True:
        line_number, words = statements.next()
        if words == ["}"]:
            return width
        elif words[0] == "JOINT" and len(words) == 2:
            width += _check_joint(statements)
        elif words == ["End", "Site"]:
            if has_end_site:
                raise BvhHierarchyError("duplicated End Site", line_number)
            has_end_site = True
            statements.expect("{", 1)
            _check_offset(statements)
            statements.expect("}", 1)
        else:
            raise BvhHierarchyError(f"unexpected '{' '.join(words)}'", line_number)


def _check_hierarchy(lines: List[str]) -> int:
    statements = _Statements(lines)
    statements.expect("HIERARCHY", 1)
    statements.expect("ROOT", 2)
    width = _check_joint(statements)
    item = statements.peek()
    if item is not None:
        raise BvhHierarchyError(f"unexpected '{' '.join(item[1])}' after root", item[0])
    return width


def _check_motion(lines: List[str], motion_index: int, width: int):
    def _header(index: int, key: str):
        if index >= len(lines) or not lines[index].strip().startswith(key):
            raise BvhFrameDataError(f"expected '{key}'", index + 1)
        return lines[index].strip()[len(key) :].strip()

    frame_num_text = _header(motion_index + 1, "Frames:")
    frame_time_text = _header(motion_index + 2, "Frame Time:")
    try:
        frame_num = int(frame_num_text)
    except ValueError:
        raise BvhFrameDataError("invalid frame count", motion_index + 2) from None
    try:
        frame_time = float(frame_time_text)
    except ValueError:
        raise BvhFrameDataError("invalid frame time", motion_index + 3) from None
    if not frame_time > 0:
        raise BvhFrameDataError("frame time must be positive", motion_index + 3)

    found = 0
    for i in range(motion_index + 3, len(lines)):
        words = lines[i].split()
        if len(words) == 0:
            continue
        if len(words) != width:
            raise BvhChannelCountError(
                f"frame has {len(words)} values, hierarchy declares {width} channels",
                i + 1,
            )
        try:
            values = numpy.array([float(w) for w in words])
        except ValueError as e:
            raise BvhFrameDataError(f"non-numeric frame data: {e}", i + 1) from None
        if not numpy.all(numpy.isfinite(values)):
            raise BvhFrameDataError("frame data must be finite", i + 1)
        found += 1

    if found != frame_num:
        raise BvhFrameDataError(f"declared {frame_num} frames, found {found}", len(lines))


def _skeleton(mocap: Bvh):
    nodes = mocap.get_joints()
    indexes = {id(node): i for i, node in enumerate(nodes)}

    joints: List[Joint] = []
    for node in nodes:
        end_site = next(node.filter("End"), None)
        joints.append(
            Joint(
                name=node.name,
                parent=indexes.get(id(node.parent), -1),
                offset=numpy.array(node["OFFSET"], dtype=numpy.float64),
                channels=[c for child in node.filter("CHANNELS") for c in child.value[2:]],
                end_site=(
                    numpy.array(end_site["OFFSET"], dtype=numpy.float64)
                    if end_site is not None
                    else None
                ),
            )
        )
    return Skeleton(joints=joints)


def parse_bvh(text: str) -> Tuple[Skeleton, MotionClip]:
    """
    Line-numbered checks first; the checked text is then read with `bvh`,
    which needs one statement per line and no blank lines.
    """
    lines = text.splitlines()
    motion_index = next(
        (i for i, line in enumerate(lines) if line.strip() == "MOTION"), None
    )
    if motion_index is None:
        raise BvhHierarchyError("MOTION section not found", len(lines))

    width = _check_hierarchy(lines[:motion_index])
    _check_motion(lines, motion_index, width)

    mocap = Bvh("".join(f"{line.strip()}\n" for line in lines if line.strip()))
    skeleton = _skeleton(mocap)
    assert skeleton.channel_count == width

    array = numpy.array(mocap.frames, dtype=numpy.float64).reshape(len(mocap.frames), width)
    clip = MotionClip(array=array, rate=1 / mocap.frame_time, skeleton=skeleton)
    return skeleton, clip


def load_bvh(path: Path):
    return parse_bvh(Path(path).read_text())


def _format_vector(v: numpy.ndarray):
    return " ".join(f"{x:.6f}" for x in v)


def _write_joints(skeleton: Skeleton) -> Iterator[str]:
    children = {i: [] for i in range(len(skeleton.joints))}
    for i, joint in enumerate(skeleton.joints):
        if joint.parent >= 0:
            children[joint.parent].append(i)

    def _write(index: int, depth: int) -> Iterator[str]:
        joint = skeleton.joints[index]
        indent = "\t" * depth
        keyword = "ROOT" if joint.parent == -1 else "JOINT"
        yield f"{indent}{keyword} {joint.name}"
        yield f"{indent}{{"
        yield f"{indent}\tOFFSET {_format_vector(joint.offset)}"
        if len(joint.channels) > 0:
            yield f"{indent}\tCHANNELS {len(joint.channels)} {' '.join(joint.channels)}"
        for child in children[index]:
            yield from _write(child, depth + 1)
        if joint.end_site is not None:
            yield f"{indent}\tEnd Site"
            yield f"{indent}\t{{"
            yield f"{indent}\t\tOFFSET {_format_vector(joint.end_site)}"
            yield f"{indent}\t}}"
        yield f"{indent}}}"

    yield from _write(0, 0)


def write_bvh(skeleton: Skeleton, clip: MotionClip) -> str:
    if clip.array.shape[1] != skeleton.channel_count:
        raise ValueError(
            f"clip has {clip.array.shape[1]} channels, skeleton has {skeleton.channel_count}"
        )
    if len(clip) == 0:
        raise ValueError("cannot write an empty clip")

    lines = ["HIERARCHY"]
    lines += list(_write_joints(skeleton))
    lines.append("MOTION")
    lines.append(f"Frames: {len(clip)}")
    lines.append(f"Frame Time: {1 / clip.rate!r}")
    lines += [_format_vector(row) for row in clip.array]
    return "\n".join(lines) + "\n"


def save_bvh(path: Path, skeleton: Skeleton, clip: MotionClip):
    Path(path).write_text(write_bvh(skeleton=skeleton, clip=clip))
