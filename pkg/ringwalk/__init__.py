"""Compile Kitaev-basis circuits onto a programmable ring of 8-state sites,
enumerate the computation trajectory and drive it as a quantum walk or an adiabatic run."""

__version__ = "0.1.0"
