"""Exception types raised across the package."""


class SignedMboError(Exception):
    """Base class for all package errors."""


class DataError(SignedMboError):
    """Input data violates a precondition."""


class NumericalError(SignedMboError):
    """A numerical routine failed to deliver a result."""


class IsolatedNode(DataError):
    def __init__(self, node: int):
        super().__init__(f"node {node} has zero degree")
        self.node = node


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DegenerateEigenvector(DataError):
    pass


class DegenerateImage(DataError):
    pass


class NonPositivePrice(DataError):
    def __init__(self, i: int, t: int):
        super().__init__(f"non-positive price for instrument {i} at t={t}")
        self.i, self.t = i, t


class ZeroVarianceRow(DataError):
    def __init__(self, i: int):
        super().__init__(f"row {i} has zero variance")
        self.i = i


class EmptyMatrix(DataError):
    pass


class EmptyCluster(DataError):
    def __init__(self, cluster: int):
        super().__init__(f"cluster {cluster} is empty")
        self.cluster = cluster


class NoConvergence(NumericalError):
    def __init__(self, iterations: int):
        super().__init__(f"eigensolver did not converge after {iterations} iterations")
        self.iterations = iterations


class AllZeroSpectrum(NumericalError):
    pass
