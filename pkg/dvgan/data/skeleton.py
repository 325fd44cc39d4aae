from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy

position_channels = ("Xposition", "Yposition", "Zposition")
rotation_channels = ("Xrotation", "Yrotation", "Zrotation")
channel_labels = position_channels + rotation_channels


@dataclass
class Joint:
    name: str
    parent: int  # -1 for root
    offset: numpy.ndarray  # shape: (3,)
    channels: List[str]
    end_site: Optional[numpy.ndarray] = None  # shape: (3,)

    @property
    def rotation_order(self):
        """
        >>> Joint("Hips", -1, numpy.zeros(3), ["Zrotation", "Xrotation", "Yrotation"]).rotation_order
        'ZXY'
        """
        return "".join(c[0] for c in self.channels if c in rotation_channels)


@dataclass
class Skeleton:
    joints: List[Joint] = field(default_factory=list)

    def __post_init__(self):
        for i, joint in enumerate(self.joints):
            assert joint.parent < i, f"{joint.name}: parent must precede child"
            assert (i == 0) == (joint.parent == -1), f"{joint.name}: only first joint is root"
            for c in joint.channels:
                assert c in channel_labels, f"{joint.name}: unknown channel {c}"

    @property
    def channel_count(self):
        return sum(len(j.channels) for j in self.joints)

    @property
    def channel_names(self):
        return [f"{j.name}_{c}" for j in self.joints for c in j.channels]

    @property
    def expmap_channel_names(self):
        names = self.channel_names
        owners = [j.name for j in self.joints for _ in j.channels]
        for columns, _ in self.rotation_groups():
            for column, axis in zip(columns, "xyz"):
                names[column] = f"{owners[column]}_expmap_{axis}"
        return names

    def rotation_groups(self) -> List[Tuple[List[int], str]]:
        """
        Column indexes of each joint's three rotation channels, with its euler order.
        """
        groups = []
        index = 0
        for joint in self.joints:
            columns = [
                index + n for n, c in enumerate(joint.channels) if c in rotation_channels
            ]
            if len(columns) == 3:
                groups.append((columns, joint.rotation_order))
            elif len(columns) > 0:
                raise ValueError(f"{joint.name}: expected 3 rotation channels")
            index += len(joint.channels)
        return groups

    def equal_structure(self, other: "Skeleton", atol: float = 1e-6):
        if len(self.joints) != len(other.joints):
            return False
        for a, b in zip(self.joints, other.joints):
            if (a.name, a.parent, a.channels) != (b.name, b.parent, b.channels):
                return False
            if not numpy.allclose(a.offset, b.offset, atol=atol, rtol=0):
                return False
            if (a.end_site is None) != (b.end_site is None):
                return False
            if a.end_site is not None and not numpy.allclose(
                a.end_site, b.end_site, atol=atol, rtol=0
            ):
                return False
        return True
