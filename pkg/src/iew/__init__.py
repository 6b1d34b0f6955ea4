"""iew: a numerical workbench for linear and nonlinear integral equations.

Subpackages by problem family:

* ``iew.quadrature``  -- rules, kernels, Nystrom assembly
* ``iew.fredholm``    -- second-kind solvers and alternative diagnostics
* ``iew.volterra``    -- triangular direct solve and Picard iteration
* ``iew.illposed``    -- s-values, TSVD, Tikhonov with discrepancy choice
* ``iew.singular``    -- Cauchy operator, Riemann problem, Wiener-Hopf
* ``iew.estimation``  -- exponential-kernel closed-form filter
* ``iew.nonlinear``   -- contraction, monotone bracketing, continuation
* ``iew.scattering``  -- small bodies, many-body fields, effective media
* ``iew.cli``         -- the ``iew run`` / ``iew study`` batch front end
"""

__version__ = "0.1.0"
