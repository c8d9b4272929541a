"""Exception types shared across the package."""


class GogError(Exception):
    """Base class for all errors raised by this package."""


# -- group oracles ----------------------------------------------------------

class GroupTableError(GogError):
    """A multiplication table fails the group axioms."""


class IdOutOfRange(GogError):
    """An element id does not belong to the oracle."""


class OracleMismatch(GogError):
    """An element was used with an oracle it does not belong to."""


# -- paths ------------------------------------------------------------------

class EndpointMismatch(GogError):
    """Paths were concatenated at non-matching vertices."""


class NotClosed(GogError):
    """A loop operation was applied to a non-closed path."""


# -- representatives --------------------------------------------------------

class NotIrreducible(GogError):
    """A Perron-Frobenius computation was requested for a reducible matrix."""


class IterationCapExceeded(GogError):
    """A legality iteration failed to close (should be unreachable)."""


class MarkingMissing(GogError):
    """An outer-class comparison needs markings that are not present."""


# -- moves ------------------------------------------------------------------

class PositionOutOfRange(GogError):
    """A subdivision position is outside the image path."""


class ImagesDisagree(GogError):
    """A fold was requested for edges without a common image segment."""


class BothEndpointsNontrivial(GogError):
    """A fold would merge two nontrivial vertex groups (changes pi_1)."""


class FoldCollapsesLoop(GogError):
    """A fold would identify parallel edges and kill a free rank."""


class NotInvariant(GogError):
    """A collapse was requested for a subgraph that is not invariant."""


class NotCollapsible(GogError):
    """A collapse was requested for a subgraph that is not a collapsible forest."""


class NotInessentialValenceOne(GogError):
    """Valence-one homotopy applied at an ineligible vertex."""


class NotInessentialValenceTwo(GogError):
    """Valence-two homotopy applied at an ineligible vertex."""


class NotEG(GogError):
    """A stratum operation needs an exponentially-growing stratum."""


class ImageNotTrivial(GogError):
    """Connecting-path collapse needs a path with trivial image."""


# -- algorithms -------------------------------------------------------------

class Reducible(GogError):
    """The train track algorithm was given a reducible representative.

    Carries the invariant subgraph witness in ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(GogError):
    """The move budget ran out; carries the trace collected so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class DescentStuck(GogError):
    """A descent assertion failed (diagnostic; indicates bad input or a bug)."""


# -- automorphism input -----------------------------------------------------

class EmptySignature(GogError):
    """A thistle needs at least one prickle or petal."""


class Malformed(GogError):
    """An automorphism description is not well-formed."""


class InconsistentVertexImage(GogError):
    """Factor generator images do not define vertex-group isomorphisms."""


# -- text format ------------------------------------------------------------

class ParseError(GogError):
    """Syntax error in a .gog file; carries line information."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", col {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class ResolveError(GogError):
    """A name in a .gog file does not resolve to a declared object."""
