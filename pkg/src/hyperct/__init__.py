"""Hyperbolic gamma function, root systems and hyperbolic constant-term identities."""

from .hypergamma import HyperbolicGamma, QuasiPeriods, gamma, shintani_product
from .identities import (BCParameters, bc_rhs, bc_specialize, constant_K, density_Delta,
                         density_DeltaTilde, integrand_I, integrand_I_alt, macdonald_N,
                         macdonald_Ntilde, rhs_CMalternative, rhs_thm)
from .rootsys import Multiplicity, build
from .verifier import (VerificationReport, sweep, verify_bc, verify_hyperbolic_ct,
                       verify_q_constant_term, verify_q_sum, verify_shintani, verify_split)

__version__ = "0.1.0"
