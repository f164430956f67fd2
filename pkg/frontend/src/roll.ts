/**
 * Scrolling piano roll of labeled notes.
 *
 * Every rectangle comes from exactly one server label frame; the roll
 * never invents or predicts colors client-side.  Layout is a pure
 * function of (rect, view) so it can be tested without a canvas.
 */

import { partColor } from "./protocol.js";

export interface NoteRect {
    ms: number;      // session-relative send time of the note
    pitch: number;
    part: number;
    color: string;
}

export interface RollView {
    width: number;    // css pixels
    height: number;
    windowMs: number; // how much session time the canvas spans
    nowMs: number;    // right edge of the view
    loPitch: number;
    hiPitch: number;
}

export interface LaidOutRect {
    x: number;
    y: number;
    w: number;
    h: number;
    color: string;
}

export const NOTE_WIDTH_MS = 150; // drawn length of one played note

export function layoutRect(rect: NoteRect, view: RollView): LaidOutRect | null {
    if (rect.ms + NOTE_WIDTH_MS < view.nowMs - view.windowMs) return null;
    if (rect.pitch < view.loPitch || rect.pitch > view.hiPitch) return null;
    const pxPerMs = view.width / view.windowMs;
    const x = (rect.ms - (view.nowMs - view.windowMs)) * pxPerMs;
    const rows = view.hiPitch - view.loPitch + 1;
    const rowH = view.height / rows;
    const y = (view.hiPitch - rect.pitch) * rowH;
    return {
        x,
        y: y + rowH * 0.1,
        w: Math.max(2, NOTE_WIDTH_MS * pxPerMs),
        h: rowH * 0.8,
        color: rect.color,
    };
}

export class PianoRoll {
    readonly rects: NoteRect[] = [];

    add(ms: number, pitch: number, part: number): NoteRect {
        const rect = { ms, pitch, part, color: partColor(part) };
        this.rects.push(rect);
        return rect;
    }

    clear(): void {
        this.rects.length = 0;
    }

    /** Parts present in the roll after a given time, for invariant checks. */
    partsAfter(ms: number): Set<number> {
        const parts = new Set<number>();
        for (const r of this.rects) if (r.ms >= ms) parts.add(r.part);
        return parts;
    }

    draw(ctx: CanvasRenderingContext2D, view: RollView): void {
        ctx.clearRect(0, 0, view.width, view.height);
        ctx.fillStyle = "#15161a";
        ctx.fillRect(0, 0, view.width, view.height);
        for (const rect of this.rects) {
            const laid = layoutRect(rect, view);
            if (laid === null) continue;
            ctx.fillStyle = laid.color;
            ctx.fillRect(laid.x, laid.y, laid.w, laid.h);
        }
    }
}
