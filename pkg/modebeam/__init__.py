"""Modebeam: analytical simulator for multimode MIMO antenna beamforming."""

__version__ = "1.0.0"
