"""Workbench for quadratic characters, Fekete polynomials, and their statistics.

Submodules:

- ``arith``        -- primes, Kronecker symbols, fundamental discriminants
- ``character``    -- quadratic characters, partial sums, sign-change counting
- ``fekete``       -- Fekete polynomial evaluation and real-zero counting
- ``analytic``     -- L-function surrogates, theta functions, transform identities
- ``random_model`` -- the multiplicative random model and Monte Carlo checks
- ``family``       -- family-level sweeps, moments, discrepancy, persistence
- ``construct``    -- discriminants with all-positive initial character values
- ``cli``          -- command-line front end
"""

__version__ = "0.1.0"
