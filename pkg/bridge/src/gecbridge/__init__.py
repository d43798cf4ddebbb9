"""gecbridge: teacher-signal export for the geckit toolkit via its file formats."""

__version__ = "0.1.0"
