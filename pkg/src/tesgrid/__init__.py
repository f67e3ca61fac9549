"""Transactive smart-grid simulator.

Desk-scale feeder simulation with a double-auction energy market,
price-responsive HVAC controllers, and configurable cyber/physical
attack scenarios.
"""

__version__ = "0.1.0"
