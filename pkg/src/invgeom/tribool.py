from enum import Enum


class TriBool(Enum):
    """Outcome of a semi-decision: proven, disproven, or undecided in budget."""

    CONFIRMED = 0
    REFUTED = 1
    UNKNOWN = 2

    @property
    def exit_code(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self is TriBool.CONFIRMED

    def __str__(self) -> str:
        return self.name.lower()


Confirmed = TriBool.CONFIRMED
Refuted = TriBool.REFUTED
Unknown = TriBool.UNKNOWN
