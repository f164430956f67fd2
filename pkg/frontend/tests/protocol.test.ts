import { describe, expect, it } from "vitest";

import {
    PART_COLORS,
    noteFrame,
    parseServerFrame,
    partColor,
    switchFrame,
} from "../src/protocol.js";

describe("parseServerFrame", () => {
    it("decodes the three server frame types", () => {
        expect(parseServerFrame('{"t":"hello","k":4,"names":["s","a","t","b"]}'))
            .toEqual({ t: "hello", k: 4, names: ["s", "a", "t", "b"] });
        expect(parseServerFrame(
            '{"t":"label","pitch":60,"part":2,"scores":[0.1,0.2,0.6,0.1]}'))
            .toEqual({ t: "label", pitch: 60, part: 2,
                       scores: [0.1, 0.2, 0.6, 0.1] });
        expect(parseServerFrame('{"t":"err","msg":"nope"}'))
            .toEqual({ t: "err", msg: "nope" });
    });

    it("ignores unknown fields", () => {
        const frame = parseServerFrame(
            '{"t":"label","pitch":60,"part":0,"scores":[1],"debug":"x","v":2}');
        expect(frame).toEqual({ t: "label", pitch: 60, part: 0, scores: [1] });
    });

    it("is order-insensitive", () => {
        expect(parseServerFrame('{"scores":[1],"part":0,"pitch":7,"t":"label"}'))
            .toMatchObject({ t: "label", pitch: 7 });
    });

    it("rejects garbage without throwing", () => {
        expect(parseServerFrame("{oops")).toBeNull();
        expect(parseServerFrame('"just a string"')).toBeNull();
        expect(parseServerFrame('{"t":"chord"}')).toBeNull();
        expect(parseServerFrame('{"t":"label","pitch":"60","part":0,"scores":[]}'))
            .toBeNull();
        expect(parseServerFrame('{"t":"label","pitch":60,"part":0}')).toBeNull();
        expect(parseServerFrame('{"t":"hello","k":0,"names":[]}')).toBeNull();
    });
});

describe("client frames", () => {
    it("builds protocol-shaped objects", () => {
        expect(noteFrame(123.4, 60)).toEqual({ t: "note", ms: 123, pitch: 60 });
        expect(switchFrame(2, false))
            .toEqual({ t: "switch", part: 2, on: false });
    });
});

describe("part colors", () => {
    it("gives each part a distinct color until the table wraps", () => {
        const colors = PART_COLORS.map((_, i) => partColor(i));
        expect(new Set(colors).size).toBe(PART_COLORS.length);
        expect(partColor(PART_COLORS.length)).toBe(partColor(0));
    });
});
