"""Exception hierarchy shared across the package."""


class ChainvoiceError(Exception):
    """Base class for all domain errors raised by this package."""


# --- Bayesian network engine ---------------------------------------------

class CycleDetected(ChainvoiceError):
    pass


class CptShapeMismatch(ChainvoiceError):
    pass


class CptRowNotNormalized(ChainvoiceError):
    pass


class UnknownNode(ChainvoiceError):
    pass


class UnknownState(ChainvoiceError):
    pass


class ImpossibleEvidence(ChainvoiceError):
    """Evidence assignment has probability zero under the model."""


class StateSpaceTooLarge(ChainvoiceError):
    """Joint enumeration refused: full state space exceeds the cap."""


# --- OOBN composition ------------------------------------------------------

class DuplicateInstanceName(ChainvoiceError):
    pass


class BindingToNonOutput(ChainvoiceError):
    pass


class CycleAfterFlatten(ChainvoiceError):
    pass


# --- Finance model fitting ---------------------------------------------------

class InconsistentTargets(ChainvoiceError):
    """Closed-form CPT solve does not reproduce its own targets."""


class FitFailed(ChainvoiceError):
    def __init__(self, message: str, residuals: dict[str, float] | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


class UnknownScenario(ChainvoiceError):
    pass


# --- Ledger simulation -----------------------------------------------------

class DuplicateChainId(ChainvoiceError):
    pass


class UnknownChain(ChainvoiceError):
    pass


class UnknownAddress(ChainvoiceError):
    pass


class NotAMember(ChainvoiceError):
    pass


class BadSignature(ChainvoiceError):
    pass


class PrivacyViolation(ChainvoiceError):
    pass


class InsufficientBalance(ChainvoiceError):
    pass


class ContractLocked(ChainvoiceError):
    pass


# --- Crosschain coordinator --------------------------------------------------

class EmptyPlan(ChainvoiceError):
    pass


class LockConflict(ChainvoiceError):
    pass


class NoGrant(ChainvoiceError):
    pass


class StepFailed(ChainvoiceError):
    def __init__(self, step_index: int, cause: str, detail: dict | None = None):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause
        self.detail = detail or {}


class CoordinatorCrash(ChainvoiceError):
    """Injected fault: the coordinator halts at a configured crash point."""

    def __init__(self, point: str):
        super().__init__(f"coordinator crashed at {point}")
        self.point = point


# --- Financing flow -----------------------------------------------------------

class NotCountersigned(ChainvoiceError):
    pass


class ValidationFailed(ChainvoiceError):
    pass


class FundingDeclined(ChainvoiceError):
    """Business rejection: the decision model said DoNotFund."""


class RateOutOfRange(ChainvoiceError):
    pass
