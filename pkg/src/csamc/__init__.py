"""csamc: pricing and no-arbitrage verification of collateralized
derivatives on dividend-paying jump-diffusion underlyings.

Analytic layer: CSA-discounted prices, forwards (equity, FX, repo,
securities lending, quanto), futures. Simulation layer: correlated
jump-diffusion / Vasicek / FX paths, discrete margin-call ledgers, and the
martingale, replication and P&L-zero checks that make the prices testable.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
