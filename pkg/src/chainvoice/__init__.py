"""chainvoice: invoice-financing decision support on simulated private blockchains.

A discrete Bayesian network engine (exact inference by variable elimination,
with a joint-enumeration oracle), object-oriented network composition, the
invoice-financing decision models, a simulated world of private permissioned
ledgers, an atomic crosschain transaction coordinator, and the 12-step
financing sequence that ties them together.  A CLI and a small HTTP API sit
on top.
"""

__version__ = "0.1.0"
