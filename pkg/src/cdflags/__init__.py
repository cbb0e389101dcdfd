"""Truncated matrix models of flag-structured Cowen-Douglas operators.

Modules
-------
kernels       diagonal reproducing kernels and their jets
geometry      curvature and second fundamental form
flags         weighted-shift flag models and holomorphic frames
invariants    unitary invariants and equivalence / homogeneity decisions
verification  commutants, irreducibility and rigidity probes
harness       randomized verification suites (PASS / FAIL report)
jets          polynomial jet-module actions and localization kernels
cli           command-line front end
"""

__version__ = "0.1.0"
