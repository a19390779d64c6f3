"""Chen iterated integrals, A-infinity de Rham maps, and infinity-holonomy
of Z-graded connections on foliated charts, with machine-checkable
residuals for every identity the library claims.
"""

__version__ = "0.1.0"

from .chen import chen_eval, chen_eval_adaptive, bar_differential
from .ainfty import phi, derham_chain_residual, ainfty_relation_residual
from .holonomy import (psi_series, psi_k_simplex, rh0, rh1,
                       ode_transport_oracle)

__all__ = [
    "__version__",
    "chen_eval", "chen_eval_adaptive", "bar_differential",
    "phi", "derham_chain_residual", "ainfty_relation_residual",
    "psi_series", "psi_k_simplex", "rh0", "rh1", "ode_transport_oracle",
]
