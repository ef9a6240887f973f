"""Exception types raised across the toolkit.

Every exception carries enough structured data (a witness) for the caller
to re-check the failure independently; messages are derived from it.
"""

from __future__ import annotations


class RoeError(Exception):
    """Base class for all toolkit errors."""


class MetricViolation(RoeError):
    """A distance table fails a metric axiom.

    ``kind`` is one of ``"shape"``, ``"diagonal"``, ``"symmetry"``,
    ``"positivity"``, ``"triangle"``; ``witness`` holds the offending
    points (a pair, or a triple for the triangle inequality).
    """

    def __init__(self, kind, witness, detail=""):
        self.kind = kind
        self.witness = witness
        super().__init__(f"metric axiom violated ({kind}) at {witness!r}{detail}")


class DisconnectedGraph(RoeError):
    """Graph input has more than one connected component."""

    def __init__(self, component):
        self.component = tuple(component)
        super().__init__(
            f"graph is disconnected; one component is {list(self.component)!r}"
        )


class UnknownPoint(RoeError):
    def __init__(self, point, space_label=""):
        self.point = point
        super().__init__(f"point {point!r} is not in space {space_label!r}")


class DomainMismatch(RoeError):
    """Two maps do not share the domain/codomain the operation requires."""


class SpaceMismatch(RoeError):
    """Operator spaces do not line up for the requested operation."""


class NumericalFailure(RoeError):
    """A numerical routine failed to produce a certified result."""

    def __init__(self, diagnostic):
        self.diagnostic = diagnostic
        super().__init__(f"numerical failure: {diagnostic}")


class EmptySet(RoeError):
    pass


class NonpositiveRadius(RoeError):
    pass


class OverlappingSupports(RoeError):
    """Bump supports that must be pairwise disjoint overlap."""

    def __init__(self, witness_point, indices):
        self.witness_point = witness_point
        self.indices = tuple(indices)
        super().__init__(
            f"supports {self.indices} overlap at point {witness_point!r}"
        )


class NotBijective(RoeError):
    """A map expected to be a bijection is not.

    ``collision`` is a pair of domain points with equal image, or None;
    ``missed`` is a codomain point with no preimage, or None.
    """

    def __init__(self, collision=None, missed=None):
        self.collision = collision
        self.missed = missed
        parts = []
        if collision is not None:
            parts.append(f"collision {collision!r}")
        if missed is not None:
            parts.append(f"missed point {missed!r}")
        super().__init__("map is not bijective: " + "; ".join(parts or ["empty"]))


class NonUnitPhase(RoeError):
    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(f"phase at {point!r} has modulus {abs(value)!r}, expected 1")


class NotUnitary(RoeError):
    def __init__(self, deviation):
        self.deviation = deviation
        super().__init__(f"matrix is not unitary: deviation {deviation:.3e}")


class NotInjective(RoeError):
    def __init__(self, witness_pair, image):
        self.witness_pair = witness_pair
        self.image = image
        super().__init__(
            f"points {witness_pair!r} share the image {image!r}"
        )


class NoFeasibleEps(RoeError):
    """No grid threshold meets the requested residual bound."""

    def __init__(self, best_eps, best_residual, table):
        self.best_eps = best_eps
        self.best_residual = best_residual
        self.table = table
        super().__init__(
            f"no feasible threshold; best residual {best_residual:.6g} at eps={best_eps!r}"
        )


class HallFailed(RoeError):
    """The support family admits no injective selection."""

    def __init__(self, deficiency, neighborhood):
        self.deficiency = tuple(deficiency)
        self.neighborhood = tuple(neighborhood)
        super().__init__(
            f"matching condition fails: |A|={len(self.deficiency)} > "
            f"|union|={len(self.neighborhood)} for A={list(self.deficiency)!r}"
        )


class ExtractionFailed(RoeError):
    """The parameter grid was exhausted without passing the matching condition.

    This signals that the finite truncation or the chosen parameters defeat
    the estimate, not that extraction is impossible in principle.
    """

    def __init__(self, stage, witness, residuals):
        self.stage = stage
        self.witness = witness
        self.residuals = residuals
        super().__init__(f"extraction failed at stage {stage!r}; witness {witness!r}")


class CertificateInvalid(RoeError):
    def __init__(self, field, expected, found):
        self.field = field
        self.expected = expected
        self.found = found
        super().__init__(
            f"certificate field {field!r} invalid: expected {expected!r}, found {found!r}"
        )


class InvalidParams(RoeError):
    pass


class FormatError(RoeError):
    """A file does not conform to the documented on-disk format."""
