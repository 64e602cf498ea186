"""Gaze dwell-time screening toolkit.

Fixation detection, five-zone dwell features, webcam noise simulation,
synthetic cohorts and a small fully connected classifier.
"""
from .core import (AoiRegion, AoiSet, FeatureVector, Familiarity, Fixation, GazeRecording,
                   GazeSample, Label, ScreenGeometry, ZoneLabel, ZONES, validate_recording, zone_of)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "AoiRegion", "AoiSet", "BACKEND", "FeatureVector", "Familiarity", "Fixation", "GazeRecording",
    "GazeSample", "Label", "ScreenGeometry", "ZONES", "ZoneLabel", "validate_recording", "zone_of",
]
