"""Closest-pitch baseline: follow each part's most recent pitch.

Each part's first note takes its ground-truth label (the model "knows"
which part enters where — the same information the entry hints carry).
Every later note i goes to

    argmin_j (p_i - p'_j)^2 + M * a_j

where p'_j is the last pitch assigned to part j, and a_j flags parts still
holding a note at time t_i.  Plain mode sets M = 0; mono mode uses a
penalty large enough to dominate any squared pitch gap, so an occupied
part only wins when every part is occupied.  Ties go to the lower part
index.  The state update uses the *predicted* labels, so mistakes
propagate — that is the point of the baseline.
"""

from __future__ import annotations

from ..core import Mixture, Prediction

# max squared pitch gap is 127^2 ~ 1.6e4; this swamps it
MONO_PENALTY = 1_000_000_000

__all__ = ["closest_pitch", "MONO_PENALTY"]


def closest_pitch(mixture: Mixture, mono: bool = False) -> Prediction:
    """Label a mixture by pitch proximity, in canonical note order."""
    k = mixture.K
    last_pitch: list[int | None] = [None] * k
    last_end = [0] * k

    onsets = {}
    for i, y in enumerate(mixture.labels):
        if y not in onsets:
            onsets[y] = i

    out = []
    for i, note in enumerate(mixture.notes):
        truth = mixture.labels[i]
        if onsets.get(truth) == i:
            y = truth
        else:
            y = None
            best = None
            for j in range(k):
                if last_pitch[j] is None:
                    continue
                cost = (note.pitch - last_pitch[j]) ** 2
                if mono and last_end[j] > note.time:
                    cost += MONO_PENALTY
                if best is None or cost < best:
                    best, y = cost, j
            if y is None:
                # unreachable with truth-derived onsets; guards misuse
                raise ValueError(f"note {i} arrives before any part onset")
        out.append(y)
        last_pitch[y] = note.pitch
        last_end[y] = note.time + note.duration
    return Prediction(labels=tuple(out))
