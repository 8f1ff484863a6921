"""
Invasiveness grades of pulmonary adenocarcinoma, in clinical order.
"""

from enum import IntEnum


class InvasivenessLabel(IntEnum):
    AAH = 0
    AIS = 1
    MIA = 2
    IA = 3

    @classmethod
    def parse(cls, value: "int | str | InvasivenessLabel") -> "InvasivenessLabel":
        """Accept a label code, a label name ("MIA") or a member."""
        if isinstance(value, str) and not value.lstrip("-").isdigit():
            return cls[value.upper()]
        return cls(int(value))


NUM_CLASSES = len(InvasivenessLabel)
LABEL_NAMES = [label.name for label in InvasivenessLabel]
