"""Label scale shared by every module.

Labels are integers 0..4: 0 means no misogyny, 1..4 grade its severity.
"""

NUM_CLASSES = 5
LABEL_VALUES = tuple(range(NUM_CLASSES))

SCALE_NAMES = {
    0: "none",
    1: "mild",
    2: "present",
    3: "strong",
    4: "extreme",
}


def is_valid_label(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and 0 <= value <= 4


def check_label(value) -> int:
    if not is_valid_label(value):
        raise ValueError(f"label must be an integer in 0..4, got {value!r}")
    return value


def binarize(label: int) -> int:
    """Collapse the 5-point scale to presence/absence: 0 stays 0, 1..4 become 1."""
    check_label(label)
    return 0 if label == 0 else 1
