"""Exception hierarchy.

Each class carries a short ``kind`` string used by the command line front
end for structured error reports.
"""


class PolyPdfError(ValueError):
    kind = "error"

    def to_dict(self):
        out = {"kind": self.kind, "detail": str(self)}
        witness = getattr(self, "witness", None)
        if witness is not None:
            out["witness"] = witness
        return out


class DomainError(PolyPdfError):
    kind = "domain"


class UnsupportedDegreeError(PolyPdfError):
    kind = "unsupported-degree"


class ConvergenceError(PolyPdfError):
    """Iterative method stopped at its cap; ``best`` holds the last iterate."""

    kind = "convergence"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NonRealPolynomialError(PolyPdfError):
    kind = "non-real"


class DistinctPoleError(PolyPdfError):
    kind = "distinct-pole"


class NonConvergentIntegralError(PolyPdfError):
    kind = "non-convergent-integral"


class NegativityError(PolyPdfError):
    """A polynomial takes negative values on the support."""

    kind = "negativity"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
        self.witness = None
        if report is not None and report.witnesses:
            self.witness = float(report.witnesses[0])


class MassError(PolyPdfError):
    kind = "mass"


class DegenerateError(PolyPdfError):
    kind = "degenerate"


class IllConditionedError(PolyPdfError):
    kind = "ill-conditioned"


class InfeasibleError(PolyPdfError):
    kind = "infeasible"

    def __init__(self, message, violated=None):
        super().__init__(message)
        self.violated = [] if violated is None else list(violated)
        self.witness = self.violated or None


class EnvelopeError(PolyPdfError):
    kind = "envelope"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = None if witness is None else float(witness)


class BoundUnavailableError(PolyPdfError):
    kind = "bound-unavailable"


class FormatError(Exception):
    """Malformed input file; not a validation failure."""

    kind = "parse"

    def to_dict(self):
        return {"kind": self.kind, "detail": str(self)}
