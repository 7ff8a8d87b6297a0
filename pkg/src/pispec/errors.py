"""Exception types.

Every error carries a short machine-readable ``code`` so the command line
layer can map failures onto exit codes and report payloads.
"""

from __future__ import annotations


class PispecError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def __init__(self, message: str, code: str | None = None, **details):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.details = details


class InputError(PispecError, ValueError):
    """Invalid arguments (wrong shapes, non-positive tolerances, ...)."""

    code = "input-error"


class LoadError(InputError):
    """A problem file could not be turned into a valid (A, G) pair."""

    code = "load-error"


class HypothesisViolated(PispecError):
    """The inputs are valid but a structural assumption fails.

    Differs from :class:`InputError` in that the computation itself reveals
    the problem, e.g. a singular Gram matrix where an invertible one is
    required.
    """

    code = "hypothesis-violated"


class NoKernel(PispecError):
    code = "no-kernel"


class RankAmbiguous(PispecError):
    """Singular values do not separate cleanly into zero and non-zero."""

    code = "rank-ambiguous"

    def __init__(self, message: str, gap: float, step: int | None = None):
        super().__init__(message, gap=gap, step=step)
        self.gap = gap
        self.step = step


class PairingDegenerate(PispecError):
    code = "pairing-degenerate"


class ContourThroughSpectrum(PispecError):
    code = "contour-through-spectrum"


class EndpointInSpectrum(HypothesisViolated):
    code = "endpoint-in-spectrum"


class QuadratureStagnation(PispecError):
    code = "quadrature-stagnation"

    def __init__(self, message: str, residual: float, nodes: int):
        super().__init__(message, residual=residual, nodes=nodes)
        self.residual = residual
        self.nodes = nodes


class AtSpectrum(PispecError):
    code = "at-spectrum"
