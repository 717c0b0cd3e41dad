"""fpsim: fingerprinting localization simulator."""

__version__ = "0.1.0"
