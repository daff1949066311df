"""Decision procedures for regular theories over substructural calculi."""

__version__ = "0.1.0"
