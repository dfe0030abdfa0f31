class EvodepthError(ValueError):
    """Base class for every error raised by evodepth services"""


class PanelError(EvodepthError):
    """Invalid panel shape, ragged input or failed trimming"""


class IngestionError(EvodepthError):
    """Malformed CSV or panel archive"""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        location = ""
        if path is not None:
            location += f"{path}"
        if line is not None:
            location += f" line {line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class DepthError(EvodepthError):
    """Depth computed on a sample that cannot support it"""


class SmoothingError(EvodepthError):
    """Invalid basis size, rank-deficient basis or unsupported derivative order"""


class SimulationError(EvodepthError):
    """Invalid scenario or failed covariance factorization"""


class DetectionError(EvodepthError):
    """Precondition of the detection pipeline or its evaluation violated"""
