"""Distributed average-consensus control with online Gaussian process learning.

Subpackages are organized by responsibility:

- ``topology``: communication graphs and Laplacian spectra
- ``gp``: exact Gaussian process regression with incremental updates
- ``triggers``: decentralized event-trigger rules for online learning
- ``plants``: agent dynamics and measurement models
- ``control``: consensus control laws and accuracy bounds
- ``config`` / ``presets``: run configuration and the four study cases
- ``engine``: fixed-step simulation loop and Monte Carlo driver
- ``analysis``: trajectory metrics and closed-form references
- ``reporting``: CSV emission
- ``cli``: command-line entry point
"""

__version__ = "0.1.0"
