"""Analytical model and simulator for Wi-Fi sharing a channel with duty-cycled LTE."""

__version__ = "0.1.0"
