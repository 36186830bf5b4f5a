"""Live capture client for the agile-head pipeline."""
from .client import BrokerUnavailable, CaptureSession, stream
from .detector import MediapipeDetector, SyntheticDetector, make_detector

__all__ = ["BrokerUnavailable", "CaptureSession", "MediapipeDetector",
           "SyntheticDetector", "make_detector", "stream"]

__version__ = "0.1.0"
