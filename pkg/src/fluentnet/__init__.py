"""Stuttered-speech synthesis, spectrogram features, and disfluency detectors."""

__version__ = "0.1.0"
