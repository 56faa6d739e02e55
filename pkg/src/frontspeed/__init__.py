"""Minimal KPP front speeds in space-time periodic incompressible flows."""

__version__ = "0.1.0"
