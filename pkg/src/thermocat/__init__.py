"""Thermal-operation reachable sets, elementary thermal operations and catalysis."""

__version__ = "0.1.0"
