"""Exception hierarchy shared by every talim module.

Each error carries the process exit code the CLI maps it to:
2 for input/output problems, 3 for analysis failures.
"""


class TalimError(Exception):
    exit_code = 3

    def __init__(self, message: str = "", feature: str | None = None):
        super().__init__(message)
        self.feature = feature

    def __str__(self) -> str:
        msg = super().__str__()
        if self.feature:
            return f"[{self.feature}] {msg}"
        return msg


# -- input / output ---------------------------------------------------------

class SignalIOError(TalimError):
    exit_code = 2


class NotWav(SignalIOError):
    pass


class UnsupportedEncoding(SignalIOError):
    pass


class MultiChannel(SignalIOError):
    pass


class TruncatedData(SignalIOError):
    pass


class IoFailure(SignalIOError):
    pass


class EmptyManifest(SignalIOError):
    pass


class MalformedInput(SignalIOError):
    """A manifest or matrix CSV that cannot be parsed."""


# -- analysis ---------------------------------------------------------------

class AnalysisError(TalimError, ValueError):
    exit_code = 3


class InvalidClip(AnalysisError):
    pass


class BadFrameLength(AnalysisError):
    pass


class ClipTooShort(AnalysisError):
    pass


class SilentClip(AnalysisError):
    pass


class NoPitch(AnalysisError):
    pass


class NoPeaks(AnalysisError):
    pass


class FewerThanTwoPeaks(AnalysisError):
    pass


class F0OutOfRange(AnalysisError):
    pass


class ZeroSpectrum(AnalysisError):
    pass


class ZeroVariance(AnalysisError):
    def __init__(self, message: str = "", column: str | None = None):
        super().__init__(message)
        self.column = column


class SpecInvalid(AnalysisError):
    pass


# -- warnings ---------------------------------------------------------------

class DegenerateRetention(UserWarning):
    """Kaiser rule kept no factor; one factor is used instead."""


class DegenerateLoadings(UserWarning):
    """A loading row is all zero and skips Kaiser normalization."""
