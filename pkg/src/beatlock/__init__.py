"""Beat-note stabilization of a mode-locked-laser comb driving a Raman qubit."""

__version__ = "0.1.0"
