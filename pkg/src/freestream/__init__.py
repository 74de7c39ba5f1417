"""Divergence-free metric terms and free-stream preservation for
curvilinear spectral-element discretisations.

The package provides, bottom up:

* ``polybasis``  - LGL rules, barycentric interpolation, edge functions
* ``mimetic``    - interpolation/histopolation projections and the
  collocation grad/curl/div operators on one reference element
* ``geometry``   - element mappings, periodic Cartesian meshes, analytic
  metric terms
* ``metrics``    - the four discrete metric-term constructions and their
  divergence-defect / error diagnostics
* ``euler``      - a collocated DG solver for the compressible Euler
  equations on curvilinear hexahedral meshes
* ``timeint``    - low-storage Runge-Kutta time integration
* ``harness``    - experiment sweeps behind the command line interface
"""

from .polybasis import QuadRule1D, lgl_rule

__all__ = ["QuadRule1D", "lgl_rule"]
__version__ = "0.1.0"
