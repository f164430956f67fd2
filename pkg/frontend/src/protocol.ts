/**
 * Wire protocol for the live gateway.
 *
 * Client frames:  {"t":"note","ms":<int>,"pitch":<0-127>}
 *                 {"t":"switch","part":<int>,"on":<bool>}
 *                 {"t":"reset"}
 * Server frames:  {"t":"hello","k":<int>,"names":[...]}
 *                 {"t":"label","pitch":<int>,"part":<int>,"scores":[...]}
 *                 {"t":"err","msg":<string>}
 *
 * Field order is free and unknown fields are ignored on both sides.
 */

export interface NoteFrame {
    t: "note";
    ms: number;
    pitch: number;
}

export interface SwitchFrame {
    t: "switch";
    part: number;
    on: boolean;
}

export interface ResetFrame {
    t: "reset";
}

export type ClientFrame = NoteFrame | SwitchFrame | ResetFrame;

export interface HelloFrame {
    t: "hello";
    k: number;
    names: string[];
}

export interface LabelFrame {
    t: "label";
    pitch: number;
    part: number;
    scores: number[];
}

export interface ErrFrame {
    t: "err";
    msg: string;
}

export type ServerFrame = HelloFrame | LabelFrame | ErrFrame;

function isInt(x: unknown): x is number {
    return typeof x === "number" && Number.isInteger(x);
}

/**
 * Decode one server frame, tolerating extra fields; returns null for
 * anything that is not a well-formed frame of a known type.
 */
export function parseServerFrame(raw: string): ServerFrame | null {
    let data: unknown;
    try {
        data = JSON.parse(raw);
    } catch {
        return null;
    }
    if (typeof data !== "object" || data === null) return null;
    const frame = data as Record<string, unknown>;
    switch (frame.t) {
        case "hello":
            if (!isInt(frame.k) || frame.k < 1) return null;
            if (!Array.isArray(frame.names)) return null;
            return { t: "hello", k: frame.k, names: frame.names.map(String) };
        case "label":
            if (!isInt(frame.pitch) || !isInt(frame.part)) return null;
            if (!Array.isArray(frame.scores)) return null;
            return {
                t: "label",
                pitch: frame.pitch,
                part: frame.part,
                scores: frame.scores.map(Number),
            };
        case "err":
            return { t: "err", msg: String(frame.msg ?? "") };
        default:
            return null;
    }
}

export function noteFrame(ms: number, pitch: number): NoteFrame {
    return { t: "note", ms: Math.round(ms), pitch };
}

export function switchFrame(part: number, on: boolean): SwitchFrame {
    return { t: "switch", part, on };
}

/**
 * Fixed part -> color table (distinct hue per part, same convention as
 * the separation figures); parts past the table wrap around.
 */
export const PART_COLORS = [
    "#e6194b", // red
    "#3c89d0", // blue
    "#3cb44b", // green
    "#f5a623", // orange
    "#911eb4", // purple
    "#46c5c0", // teal
    "#f032e6", // magenta
    "#808000", // olive
];

export function partColor(part: number): string {
    return PART_COLORS[((part % PART_COLORS.length) + PART_COLORS.length)
        % PART_COLORS.length];
}
