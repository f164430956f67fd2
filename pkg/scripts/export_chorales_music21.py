"""Export the Bach chorale corpus as .mid files for the experiments.

Needs the music21 package (and its bundled corpus), which this repo does
not depend on; run it anywhere music21 is available and copy the output
directory to ``data/chorales/``.  With that directory present the harness
trains on the real corpus instead of the generated stand-in.

    python3 scripts/export_chorales_music21.py data/chorales
"""

import sys
from pathlib import Path


def main(out_dir: str) -> int:
    try:
        from music21 import corpus
    except ImportError:
        print("music21 is not installed; run this somewhere it is",
              file=sys.stderr)
        return 1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for path in corpus.getComposer("bach"):
        name = Path(str(path)).stem
        if not name.startswith("bwv"):
            continue
        try:
            score = corpus.parse(path)
        except Exception as exc:  # a handful of corpus files are malformed
            print(f"skip {name}: {exc}", file=sys.stderr)
            continue
        if len(score.parts) != 4:
            continue  # the experiments use the four-voice chorales only
        score.write("midi", out / f"{name}.mid")
        written += 1
        if written % 50 == 0:
            print(f"{written} written...")
    print(f"{written} four-part chorales -> {out}")
    return 0 if written else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "data/chorales"))
