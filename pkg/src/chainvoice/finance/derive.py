"""Closed-form CPT reconstruction for the two sub-networks.

Published CPTs do not exist; what is published is a set of scenario
posteriors.  With uniform roots the system is linear in the CPT entries:
a both-parents-observed scenario reads a row directly, a single-parent
scenario reads a row average, and the no-evidence scenario reads the grand
mean (0.5).  Each sub-network is solved exactly, then every published
posterior is re-derived through the enumeration oracle; any residual above
RESIDUAL_TOL means a transcription error, not a modeling choice, and is
rejected.
"""

from __future__ import annotations

from ..bn import build_network, enumerate_joint
from ..bn.oobn import OobnClass
from ..errors import InconsistentTargets
from . import networks
from .networks import financial_incentive_class, supplier_profile_class

RESIDUAL_TOL = 0.01

# (evidence, posterior of the first output state); the published set
SUPPLIER_TARGETS = (
    ({}, 0.500),
    ({networks.GWAL: "Yes"}, 0.795),
    ({networks.TIER1: "Yes"}, 0.695),
    ({networks.TIER1: "Yes", networks.GWAL: "Yes"}, 0.990),
)
INCENTIVE_TARGETS = (
    ({}, 0.500),
    ({networks.FINANCIAL_REWARDS: "Additional"}, 0.600),
    ({networks.CREDIT_RATING: "Passed"}, 0.900),
    ({networks.CREDIT_RATING: "Failed", networks.FINANCIAL_REWARDS: "Additional"}, 0.200),
    ({networks.CREDIT_RATING: "Passed", networks.FINANCIAL_REWARDS: "Standard"}, 0.800),
    ({networks.CREDIT_RATING: "Passed", networks.FINANCIAL_REWARDS: "Additional"}, 0.990),
)


def _solve_supplier() -> tuple[float, float, float, float]:
    # row order (Tier1, GWaL): YY, YN, NY, NN
    both = SUPPLIER_TARGETS[3][1]
    yy = both
    # single-evidence scenarios pin the average of the two rows they touch
    ny = 2 * SUPPLIER_TARGETS[1][1] - yy  # GWaL=Yes averages YY and NY
    yn = 2 * SUPPLIER_TARGETS[2][1] - yy  # Tier1=Yes averages YY and YN
    nn = 4 * SUPPLIER_TARGETS[0][1] - yy - yn - ny
    return (yy, yn, ny, nn)


def _solve_incentive() -> tuple[float, float, float, float]:
    # row order (CreditRating, FinancialRewards): PA, PS, FA, FS; three rows
    # are read directly from both-parent scenarios, the grand mean gives the
    # fourth; the two single-evidence posteriors are then verification only
    pa = INCENTIVE_TARGETS[5][1]
    fa = INCENTIVE_TARGETS[3][1]
    ps = INCENTIVE_TARGETS[4][1]
    fs = 4 * INCENTIVE_TARGETS[0][1] - pa - ps - fa
    return (pa, ps, fa, fs)


def _check(cls: OobnClass, output: str, targets, label: str) -> None:
    net = build_network(cls.spec)
    first_state = net.states_of(output)[0]
    bad = {}
    for ev, expected in targets:
        got = enumerate_joint(net, ev, output)[first_state]
        if abs(got - expected) > RESIDUAL_TOL:
            bad[repr(ev)] = got - expected
    if bad:
        raise InconsistentTargets(f"{label}: residuals over {RESIDUAL_TOL}: {bad}")


def derive_submodel_cpts() -> tuple[OobnClass, OobnClass]:
    """Solve both sub-network CPTs and verify them against every published
    posterior through the enumeration oracle."""
    supplier = supplier_profile_class(_solve_supplier())
    incentive = financial_incentive_class(_solve_incentive())
    _check(supplier, networks.SUPPLIER_PROFILE, SUPPLIER_TARGETS, "supplier profile")
    _check(incentive, networks.FINANCIAL_INCENTIVE, INCENTIVE_TARGETS, "financial incentive")
    return supplier, incentive
