"""Exception hierarchy.

Each family carries the process exit code the CLI maps it to.
"""


class TransRateError(Exception):
    exit_code = 1


class UsageError(TransRateError):
    exit_code = 1


# -- I/O (exit 2) -----------------------------------------------------------

class FileFormatError(TransRateError):
    exit_code = 2


class BadMagic(FileFormatError):
    pass


class VersionUnsupported(FileFormatError):
    pass


class TruncatedFile(FileFormatError):
    pass


class RaggedCsv(FileFormatError):
    pass


class NonFiniteValue(FileFormatError):
    def __init__(self, row, col, msg=None):
        self.row, self.col = row, col
        super().__init__(msg or f"non-finite value at row {row}, column {col}")


class NonInteger(FileFormatError):
    pass


class EmptyFile(FileFormatError):
    pass


class ManifestError(FileFormatError):
    pass


# -- numerics (exit 3) ------------------------------------------------------

class NumericError(TransRateError):
    exit_code = 3


class NumericOverflow(NumericError):
    pass


class NumericFailure(NumericError):
    def __init__(self, msg, index=None):
        self.index = index
        super().__init__(msg)


class SingularCovariance(NumericError):
    pass


class ZeroKernel(NumericError):
    pass


# -- degenerate data (exit 4) -----------------------------------------------

class DegenerateDataError(TransRateError):
    exit_code = 4


class EmptyClass(DegenerateDataError):
    def __init__(self, cls):
        self.cls = cls
        super().__init__(f"class {cls} has no samples")


class DegenerateLabels(DegenerateDataError):
    pass


class TooFewSamples(DegenerateDataError):
    pass


class ZeroVariance(DegenerateDataError):
    pass


class AllTied(DegenerateDataError):
    pass


class DimensionTooHigh(DegenerateDataError):
    pass


class MixedConfig(DegenerateDataError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass
