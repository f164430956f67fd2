"""Sequential live-labeling session behind the streaming gateway.

Wire frames (JSON text, field order free, unknown fields ignored):

    client -> server  {"t": "note", "ms": <int>, "pitch": <0..127>}
                      {"t": "switch", "part": <int>, "on": <bool>}
                      {"t": "reset"}
    server -> client  {"t": "label", "pitch": <int>, "part": <int>,
                       "scores": [<float> per part]}
                      {"t": "err", "msg": <str>}

Wall-clock milliseconds map to grid steps at a fixed tempo (default
125 qpm = 20 ms per step, the absolute-time corpus convention).  The
clock origin is the first note unless pinned, so replaying a recorded
mixture with ``ms = time * step`` and origin 0 feeds the model the exact
step values batch prediction sees — that is what makes stream and batch
labels identical rather than merely close.

Switches are the live form of entry hints: disabling a part zeroes its
hint and masks it out of the argmax, so it can never be assigned.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..features import Hints
from ..ingest import round_half_up
from ..neural import OnlineStepper, SeparationModel

DEFAULT_QPM = 125.0


class LiveSession:
    def __init__(self, model: SeparationModel, qpm: float = DEFAULT_QPM,
                 resolution: int = 24, origin: int | None = None,
                 pitch_hints: tuple[float, ...] | None = None):
        if not model.config.is_online:
            raise ValueError(f"{model.config.arch} cannot serve live sessions")
        if qpm <= 0:
            raise ValueError("qpm must be positive")
        self.k = model.config.k
        self.step_ms = 60_000.0 / (qpm * resolution)
        self.stepper = OnlineStepper(model, resolution)
        self.pitch_hints = pitch_hints or (0.0,) * self.k
        if len(self.pitch_hints) != self.k:
            raise ValueError("pitch_hints length must equal K")
        self._pinned_origin = origin
        self.reset()

    def reset(self) -> None:
        self.stepper.reset()
        self.enabled = [True] * self.k
        self.origin: Optional[int] = self._pinned_origin

    # -- message handling --------------------------------------------------

    def handle(self, msg) -> Optional[dict]:
        """One decoded client frame in, one reply frame (or None) out.

        Malformed input yields an err frame and leaves the session usable.
        """
        if not isinstance(msg, dict):
            return _err("frame must be a JSON object")
        kind = msg.get("t")
        if kind == "note":
            return self._on_note(msg)
        if kind == "switch":
            return self._on_switch(msg)
        if kind == "reset":
            self.reset()
            return None
        return _err(f"unknown message type {kind!r}")

    def _on_note(self, msg) -> dict:
        pitch = msg.get("pitch")
        ms = msg.get("ms")
        if not isinstance(pitch, int) or isinstance(pitch, bool) \
                or not 0 <= pitch <= 127:
            return _err("note needs an integer pitch in [0, 127]")
        if not isinstance(ms, int) or isinstance(ms, bool):
            return _err("note needs an integer ms timestamp")
        part, scores = self.note(ms, pitch)
        return {"t": "label", "pitch": pitch, "part": part,
                "scores": [float(s) for s in scores]}

    def _on_switch(self, msg) -> Optional[dict]:
        part = msg.get("part")
        on = msg.get("on")
        if not isinstance(part, int) or isinstance(part, bool) \
                or not 0 <= part < self.k:
            return _err(f"switch needs a part index in [0, {self.k - 1}]")
        if not isinstance(on, bool):
            return _err("switch needs a boolean 'on'")
        if not on and sum(self.enabled) == 1 and self.enabled[part]:
            return _err("cannot disable the last enabled part")
        self.enabled[part] = on
        return None

    # -- the model path ----------------------------------------------------

    def note(self, ms: int, pitch: int) -> tuple[int, np.ndarray]:
        """Label one played note; returns (part, per-part probabilities)."""
        if self.origin is None:
            self.origin = ms
        step = max(0, round_half_up((ms - self.origin) / self.step_ms))
        _, probs = self.stepper.step(step, pitch, self._hints())
        masked = np.where(self.enabled, probs, -1.0)
        return int(masked.argmax()), probs

    def _hints(self) -> Hints:
        # an enabled part has "entered" from the session's point of view
        onsets = tuple(0 if on else None for on in self.enabled)
        return Hints(onsets=onsets, mean_pitches=self.pitch_hints)


def _err(msg: str) -> dict:
    return {"t": "err", "msg": msg}


def replay_events(mixture, qpm: float = DEFAULT_QPM,
                  resolution: int = 24) -> list[dict]:
    """A recorded mixture as the note frames a client would have sent."""
    step_ms = 60_000.0 / (qpm * resolution)
    return [{"t": "note", "ms": int(round(n.time * step_ms)), "pitch": n.pitch}
            for n in mixture.notes]
