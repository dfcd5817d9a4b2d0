"""Exception taxonomy shared by all roadtwin modules.

The CLI maps these onto exit codes: input/format problems exit with 2,
domain problems (valid input, undefined result) with 3, and anything
else with 4.
"""


class RoadTwinError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 4


class InputError(RoadTwinError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class ParseError(InputError):
    """Unparseable input bytes (XML, CSV, JSON)."""


class FormatError(InputError):
    """Structurally valid file whose content violates the expected schema."""


class StructuralError(InputError):
    """Cross-record inconsistency, e.g. a way referencing a missing node."""


class ArgumentError(InputError):
    """API misuse: bad dimensions, unknown identifiers, out-of-range values."""


class DomainError(RoadTwinError):
    """Input is well-formed but the requested quantity is undefined on it."""

    exit_code = 3


class SnapError(DomainError):
    """No road edge within the snap threshold of a sensor position."""


class AvailabilityError(DomainError):
    """Requested date is absent or incomplete in the source series."""
