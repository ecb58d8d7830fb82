"""Exception types raised across the package.

Every error carries enough context to name the offending record, file or
numeric condition, so CLI diagnostics can be produced without re-parsing.
"""

from __future__ import annotations


class KolsimError(Exception):
    """Base class for all package errors."""


# --- dataset ---------------------------------------------------------------

class MissingFile(KolsimError):
    def __init__(self, path):
        super().__init__(f"required file not found: {path}")
        self.path = path


class MalformedRecord(KolsimError):
    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: malformed record: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class DanglingReference(KolsimError):
    def __init__(self, ref_id, where=""):
        detail = f" in {where}" if where else ""
        super().__init__(f"reference to unknown id {ref_id!r}{detail}")
        self.ref_id = ref_id
        self.where = where


class InvalidSpec(KolsimError):
    """Synthetic-dataset spec violates its own constraints."""


# --- timeline --------------------------------------------------------------

class TooFewSamples(KolsimError):
    def __init__(self, n, required):
        super().__init__(f"{n} samples given, at least {required} required")
        self.n = n
        self.required = required


class DegenerateComponent(KolsimError):
    """A mixture component collapsed (responsibility mass below 1e-12)."""


# --- lifecycle -------------------------------------------------------------

class AllZeroSeries(KolsimError):
    """Content was never interacted with; cannot derive lifecycle covariates."""


class NoEvents(KolsimError):
    def __init__(self, n_events, required=2):
        super().__init__(f"{n_events} uncensored events given, at least {required} required")
        self.n_events = n_events


class NonConvergence(KolsimError):
    def __init__(self, grad_norm, iterations):
        super().__init__(
            f"optimizer did not converge after {iterations} iterations "
            f"(gradient max-norm {grad_norm:.3e})"
        )
        self.grad_norm = grad_norm
        self.iterations = iterations


class SingularHessian(KolsimError):
    def __init__(self, condition_estimate):
        super().__init__(f"Hessian is singular or near-singular (cond ~ {condition_estimate:.3e})")
        self.condition_estimate = condition_estimate


# --- graph -----------------------------------------------------------------

class NoSuchPeriod(KolsimError):
    def __init__(self, period, last):
        super().__init__(f"period {period} does not exist (last appended: {last})")
        self.period = period
        self.last = last


class PeriodOutOfOrder(KolsimError):
    def __init__(self, period, expected):
        super().__init__(f"period {period} appended out of order (expected {expected})")
        self.period = period
        self.expected = expected


# --- agents / simulator ----------------------------------------------------

class BackendUnavailable(KolsimError):
    """External agent-policy service could not be reached after retries."""


class UnfittedModel(KolsimError):
    """A fitted timeline/lifecycle model is required but was not provided."""


# --- metrics ---------------------------------------------------------------

class EmptyGold(KolsimError):
    """Ranking metrics require a non-empty gold set."""
