import { describe, expect, it } from "vitest";

import { partColor } from "../src/protocol.js";
import {
    NOTE_WIDTH_MS,
    PianoRoll,
    layoutRect,
    type RollView,
} from "../src/roll.js";

const view: RollView = {
    width: 1000,
    height: 300,
    windowMs: 10_000,
    nowMs: 10_000,
    loPitch: 0,
    hiPitch: 99,
};

describe("layoutRect", () => {
    it("maps time to x and pitch to y", () => {
        const rect = { ms: 5000, pitch: 99, part: 0, color: "#fff" };
        const laid = layoutRect(rect, view)!;
        expect(laid.x).toBeCloseTo(500);
        expect(laid.y).toBeCloseTo(0.3); // top row, 10% inset of 3px rows
        expect(laid.w).toBeCloseTo(NOTE_WIDTH_MS * 0.1);
        expect(laid.color).toBe("#fff");
    });

    it("culls rectangles that scrolled out or sit off-range", () => {
        expect(layoutRect({ ms: -NOTE_WIDTH_MS - 1, pitch: 50, part: 0,
                            color: "x" }, view)).toBeNull();
        expect(layoutRect({ ms: 5000, pitch: 100, part: 0, color: "x" },
                          view)).toBeNull();
    });
});

describe("PianoRoll", () => {
    it("stamps the fixed part color onto every rectangle", () => {
        const roll = new PianoRoll();
        const rect = roll.add(0, 60, 3);
        expect(rect.color).toBe(partColor(3));
        expect(roll.rects).toHaveLength(1);
    });

    it("reports the set of parts used after a time", () => {
        const roll = new PianoRoll();
        roll.add(0, 60, 0);
        roll.add(100, 61, 1);
        roll.add(200, 62, 1);
        expect([...roll.partsAfter(50)].sort()).toEqual([1]);
        expect([...roll.partsAfter(0)].sort()).toEqual([0, 1]);
    });
});
