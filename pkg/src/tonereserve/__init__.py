"""Tone-reservation peak reduction for the discrete Fourier and Walsh systems.

Modules
-------
systems
    Index sets, coefficient vectors, dyadic step signals and the Walsh,
    Hadamard and DFT bases.
papr_core
    Peak-to-average power ratio and the square-root-N witness.
walsh_tools
    Correlations, the splitting witness, dyadic projections and optimal
    subset search.
fourier_tools
    Arithmetic progressions, progression witnesses and kernel norms.
extension_solver
    Min-sup compensation solvers and extension-constant estimates.
experiments, cli
    Experiment registry and the ``tonereserve`` command.
"""
