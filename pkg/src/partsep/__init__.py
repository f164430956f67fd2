"""partsep: part separation for symbolic multitrack music.

Given a single-track mixture of notes (as if played on one keyboard),
assign each note to an instrument/part, either online (causal, suitable
for live performance) or offline (whole-sequence). Ships heuristic
baselines, trained neural sequence classifiers on an internal autodiff
kernel, a corpus pipeline for Standard MIDI Files, and a live streaming
gateway.
"""

from partsep.core import Mixture, Note, Prediction, Song, Track, accuracy, downmix

__version__ = "0.1.0"

__all__ = [
    "Note",
    "Track",
    "Song",
    "Mixture",
    "Prediction",
    "downmix",
    "accuracy",
    "__version__",
]
