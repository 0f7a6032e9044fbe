"""freelab: modeling, simulation, and control workbench for FREE soft actuators."""

__version__ = "0.1.0"
