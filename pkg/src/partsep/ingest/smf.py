"""Standard MIDI File reading and writing.

The reader accepts format 0 and format 1 files and produces a raw `Song`
whose note times/durations are still in ticks (`Song.resolution` holds the
file's ticks per quarter note, `Song.tempo_map` the set-tempo events).
Notes are paired note-on/note-off per (channel, pitch), oldest-on first;
a note-on with velocity 0 counts as a note-off. One output track is built
per (channel, program) combination actually sounding notes, in order of
first appearance.

The writer emits a format 1 file with one track per part plus a conductor
track, used by the separation tool to render predictions back to MIDI.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from partsep.core import Note, Song, Track

log = logging.getLogger(__name__)

DRUM_CHANNEL = 9  # MIDI channel 10, General MIDI percussion

META_TRACK_NAME = 0x03
META_END_OF_TRACK = 0x2F
META_SET_TEMPO = 0x51

# data-byte count per channel-message status nibble
_MSG_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


class SmfParseError(ValueError):
    """Structurally invalid MIDI data; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass
class _Reader:
    data: bytes
    pos: int = 0

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SmfParseError(f"unexpected end of data wanting {n} bytes", self.pos)
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.read(1)[0]

    def u16(self) -> int:
        b = self.read(2)
        return (b[0] << 8) | b[1]

    def u32(self) -> int:
        b = self.read(4)
        return (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3]

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8()
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise SmfParseError("variable-length quantity longer than 4 bytes", self.pos)


def parse_smf(data: bytes, source_id: str = "", drop_drums: bool = False) -> Song:
    """Parse SMF bytes into a raw, tick-domain Song.

    `drop_drums` discards channel-10 events (used for corpora whose
    percussion tracks do not follow the 128-pitch system). The result may
    have fewer than two tracks; admission filtering happens downstream.
    """
    r = _Reader(data)
    if r.read(4) != b"MThd":
        raise SmfParseError("missing MThd header", 0)
    header_len = r.u32()
    if header_len < 6:
        raise SmfParseError(f"MThd length {header_len} < 6", r.pos)
    fmt = r.u16()
    ntrks = r.u16()
    division = r.u16()
    r.read(header_len - 6)
    if fmt not in (0, 1):
        raise SmfParseError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise SmfParseError("SMPTE time divisions are not supported", 12)
    if division == 0:
        raise SmfParseError("ticks-per-quarter of 0", 12)

    tempo_map: list[tuple[int, float]] = []
    # (channel, program) -> [ (onset_tick, pitch, duration_ticks) ... ]
    groups: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    group_names: dict[tuple[int, int], str] = {}

    for _ in range(ntrks):
        chunk_start = r.pos
        if r.read(4) != b"MTrk":
            raise SmfParseError("expected MTrk chunk", chunk_start)
        length = r.u32()
        end = r.pos + length
        if end > len(data):
            raise SmfParseError(f"MTrk length {length} runs past end of file", chunk_start + 4)
        tick = 0
        running_status: int | None = None
        track_name = ""
        program = [0] * 16
        # (channel, pitch) -> list of (onset_tick, group_key), oldest first
        open_notes: dict[tuple[int, int], list[tuple[int, tuple[int, int]]]] = {}

        def close_note(channel: int, pitch: int, off_tick: int) -> None:
            stack = open_notes.get((channel, pitch))
            if not stack:
                return
            onset, key = stack.pop(0)
            groups.setdefault(key, []).append((onset, pitch, max(1, off_tick - onset)))

        while r.pos < end:
            tick += r.varlen()
            status = r.u8()
            if status < 0x80:
                if running_status is None:
                    raise SmfParseError(
                        f"data byte 0x{status:02x} with no running status", r.pos - 1
                    )
                r.pos -= 1
                status = running_status
            if status == 0xFF:
                running_status = None
                meta_type = r.u8()
                meta_len = r.varlen()
                payload = r.read(meta_len)
                if meta_type == META_SET_TEMPO and len(payload) == 3:
                    usq = (payload[0] << 16) | (payload[1] << 8) | payload[2]
                    tempo_map.append((tick, float(usq)))
                elif meta_type == META_TRACK_NAME and not track_name:
                    track_name = payload.decode("latin-1", errors="replace").strip()
                continue
            if status in (0xF0, 0xF7):
                running_status = None
                r.read(r.varlen())
                continue
            if status & 0xF0 not in _MSG_LEN:
                raise SmfParseError(f"unexpected status byte 0x{status:02x}", r.pos - 1)
            running_status = status
            payload = r.read(_MSG_LEN[status & 0xF0])
            kind = status & 0xF0
            channel = status & 0x0F
            if channel == DRUM_CHANNEL and drop_drums:
                continue
            if kind == 0xC0:
                program[channel] = payload[0]
            elif kind == 0x90 and payload[1] > 0:
                key = (channel, program[channel])
                if key not in group_names:
                    group_names[key] = track_name
                open_notes.setdefault((channel, payload[0]), []).append((tick, key))
            elif kind == 0x80 or (kind == 0x90 and payload[1] == 0):
                close_note(channel, payload[0], tick)
        if r.pos != end:
            raise SmfParseError("track events overran the declared MTrk length", r.pos)
        leftovers = sum(len(v) for v in open_notes.values())
        if leftovers:
            log.warning(
                "%s: %d note-on event(s) without note-off; closed at track end",
                source_id or "<smf>", leftovers,
            )
            for (channel, pitch), stack in open_notes.items():
                for onset, key in stack:
                    groups.setdefault(key, []).append((onset, pitch, max(1, tick - onset)))

    tracks = []
    # group_names insertion order = first note-on appearance across the file
    for part_id, key in enumerate(k for k in group_names if k in groups):
        channel, prog = key
        name = group_names.get(key) or f"ch{channel + 1} prog{prog}"
        notes = tuple(Note(time=t, pitch=p, duration=d) for t, p, d in groups[key])
        tracks.append(Track(part_id=part_id, name=name, notes=notes, program=prog))

    tempo_map.sort()
    return Song(
        resolution=division,
        tracks=tuple(tracks),
        source_id=source_id,
        tempo_map=tuple(tempo_map),
    )


def _varlen_bytes(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(events: list[tuple[int, bytes]]) -> bytes:
    """Assemble absolute-tick events into an MTrk chunk."""
    events.sort(key=lambda e: e[0])
    body = bytearray()
    now = 0
    for tick, payload in events:
        body += _varlen_bytes(tick - now)
        body += payload
        now = tick
    body += _varlen_bytes(0) + bytes([0xFF, META_END_OF_TRACK, 0x00])
    return b"MTrk" + len(body).to_bytes(4, "big") + bytes(body)


def write_smf(song: Song, qpm: float = 120.0, velocity: int = 64) -> bytes:
    """Render a Song as a format 1 SMF: conductor track + one track per part.

    Ticks per quarter equal `song.resolution`, so step times map to ticks
    unchanged. Parts are assigned channels 0.. skipping the drum channel.
    """
    chunks = []
    tempo = int(round(60_000_000 / qpm))
    conductor = [(0, bytes([0xFF, META_SET_TEMPO, 0x03]) + tempo.to_bytes(3, "big"))]
    chunks.append(_track_chunk(conductor))

    channels = [c for c in range(16) if c != DRUM_CHANNEL]
    for idx, track in enumerate(song.tracks):
        channel = channels[idx % len(channels)]
        events: list[tuple[int, bytes]] = []
        name = track.name.encode("latin-1", errors="replace")
        events.append((0, bytes([0xFF, META_TRACK_NAME]) + _varlen_bytes(len(name)) + name))
        if track.program >= 0:
            events.append((0, bytes([0xC0 | channel, track.program & 0x7F])))
        for note in track.notes:
            events.append((note.time, bytes([0x90 | channel, note.pitch, velocity])))
            events.append((note.time + note.duration, bytes([0x80 | channel, note.pitch, 0])))
        chunks.append(_track_chunk(events))

    header = b"MThd" + (6).to_bytes(4, "big")
    header += (1).to_bytes(2, "big")
    header += len(chunks).to_bytes(2, "big")
    header += int(song.resolution).to_bytes(2, "big")
    return header + b"".join(chunks)
