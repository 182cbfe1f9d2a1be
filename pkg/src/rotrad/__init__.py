"""Radiation, friction and heating of a spinning polarizable particle moving
through an equilibrium photon gas."""

__version__ = "0.1.0"
