"""Joint run-time adaptation of a robot's software architecture and its task plan."""

__version__ = "0.1.0"
