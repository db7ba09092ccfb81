"""Home location detection from GPS trajectories by grid stay-time, with
baseline detectors, validation metrics and a parameter-sweep harness."""

__version__ = "0.1.0"

from .batch import DETECTORS, detect_batch
from .ghost import detect_home
from .model import DetectionParams, GpsPoint, HomeEstimate, UserTrajectory

__all__ = ["DETECTORS", "DetectionParams", "GpsPoint", "HomeEstimate", "UserTrajectory",
           "detect_batch", "detect_home"]
