"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input data or configuration violates a documented contract."""


class AlignmentError(ValidationError):
    """Two parallel inputs disagree on how many items they contain."""


class FormatError(ValidationError):
    """A structured input file (TSV, JSONL) is malformed."""
