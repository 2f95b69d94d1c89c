"""Exception types shared across the package."""


class GraphSignalError(Exception):
    """Base class for all graphsig errors."""


# graph construction and structure matrices

class EmptyGraph(GraphSignalError):
    """The operation needs at least one edge."""


class ZeroDegreeNode(GraphSignalError):
    """A degree-normalized matrix was requested but some node has zero degree."""


# spectral

class NonConvergedEigensolve(GraphSignalError):
    """The eigensolver failed to converge."""


class AsymmetricInput(GraphSignalError):
    """A symmetric (or symmetrizable) matrix was required."""


class DimensionMismatch(GraphSignalError):
    """Vector or matrix dimensions do not agree."""


class ZeroSpectralRadius(GraphSignalError):
    """Shift-type variation is undefined when the spectral radius is zero."""


class BandOutOfRange(GraphSignalError):
    """Bandwidth K outside [1, N]."""


class ZeroSignal(GraphSignalError):
    """The signal is identically zero."""


class NotUnitNorm(GraphSignalError):
    """A unit-norm signal was required."""


class EmptySet(GraphSignalError):
    """A nonempty node or band set was required."""


# partition / trees

class DisconnectedInput(GraphSignalError):
    """The induced subgraph of the input set is not connected."""


class DegenerateSet(GraphSignalError):
    """The set is too small to bipartition."""


class DisconnectedGraph(GraphSignalError):
    """The operation requires a connected graph."""


class LeafCountOutOfRange(GraphSignalError):
    """Requested leaf count is outside [1, N]."""


class PartialTree(GraphSignalError):
    """A full-depth decomposition tree was required."""


# dictionaries / models

class InvalidModel(GraphSignalError):
    """A signal model violates its own invariants."""


# approximation

class KOutOfRange(GraphSignalError):
    """Number of retained terms outside the valid range."""


class ZeroReference(GraphSignalError):
    """Normalized error is undefined for a zero reference signal."""


class RankDeficientSupport(GraphSignalError):
    """Selected atoms became linearly dependent."""


# sampling / recovery

class InsufficientSamples(GraphSignalError):
    """Fewer samples than basis columns."""


class SingularDesign(GraphSignalError):
    """No candidate node makes the sampled basis full rank."""


class RankDeficient(GraphSignalError):
    """Sampled basis does not have full column rank."""


class SingularSystem(GraphSignalError):
    """The recovery system is singular (for example an unsampled component)."""


class SampleCountMismatch(GraphSignalError):
    """One sample per leaf is required."""


# detection

class InvalidLevel(GraphSignalError):
    """Significance level outside (0, 1)."""


class EmptyDictionary(GraphSignalError):
    """The dictionary has no atoms."""


# CLI / IO

class ShapeMismatch(GraphSignalError):
    """Loaded data does not match the expected shape."""


class ParseError(GraphSignalError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(GraphSignalError):
    """Invalid experiment configuration."""


class IncompatibleRuns(GraphSignalError):
    """Run directories cannot be merged (different graphs)."""
