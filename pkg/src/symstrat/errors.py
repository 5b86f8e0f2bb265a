"""Exception types shared across the toolkit."""


class SymstratError(Exception):
    """Base class for all toolkit errors."""


# --- symbol expression language ---

class SymbolSyntaxError(SymstratError):
    """Malformed symbol text. Carries the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DimensionError(SymstratError):
    """Variable index exceeds the declared dimension (or is zero)."""


class EvalError(SymstratError):
    """Evaluation failure: division by zero, or a branch-cut demand the
    evaluator refuses to resolve silently."""


# --- symbol order / ellipticity ---

class GridError(SymstratError):
    """Frequency grid specification violates its preconditions."""


class DegenerateFit(SymstratError):
    """Order fit impossible: the symbol vanishes along the requested ray."""


# --- geometry ---

class DegenerateConeError(SymstratError):
    """Cone contains a line, or is not full-dimensional."""


class UnsupportedModelError(SymstratError):
    """Unknown model domain name."""


class CoverageError(SymstratError):
    """Greedy covering left a required point uncovered (eps too small for
    the sampling density)."""


# --- factorization ---

class NonEllipticOnLine(SymstratError):
    """Reduced symbol vanishes on the quadrature line."""


class BranchJumpError(SymstratError):
    """Adjacent-sample phase jump exceeded pi/2; the quadrature grid is too
    coarse to track a continuous argument branch."""


class ZeroOnCircle(SymstratError):
    """Laurent symbol vanishes (numerically) on the unit circle."""


class ProductMismatch(SymstratError):
    """Candidate factors do not multiply back to the symbol."""


class GrowthViolation(SymstratError):
    """A factor's growth exponent along a dual-cone ray disagrees with the
    declared index."""


class SupportLeak(SymstratError):
    """Inverse-factor transform mass escapes the required cone."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SlopeDisagreement(SymstratError):
    """Growth slopes measured along different rays disagree too much to
    average."""


class MissingStratumReport(SymstratError):
    """A boundary stratum has no factorization report."""


# --- lattice lab ---

class OrderMismatch(SymstratError):
    """Target space order does not equal source order minus symbol order."""


class EmptyDomainError(SymstratError):
    """Domain (or its complement) contains no lattice point."""


class SupportOverlapError(SymstratError):
    """Cutoff functions overlap or are closer than the required separation."""


class MissingPatchError(SymstratError):
    """Partition bump without a matching operator in the patch family."""


class DuplicateComponentError(SymstratError):
    """Two index entries claim the same component label."""


class UnstableRank(SymstratError):
    """Numerical kernel count did not stabilize between section sizes."""


# --- pipeline ---

class ConfigError(SymstratError):
    """Invalid analysis configuration."""
