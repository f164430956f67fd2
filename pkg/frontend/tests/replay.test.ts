import { describe, expect, it } from "vitest";

import { deserializeLog, replayLog, serializeLog } from "../src/replay.js";
import { UiSession } from "../src/session.js";
import { MockGateway, MockSocket } from "./mock_gateway.js";

function scriptedSession(): UiSession {
    let t = 0;
    let socket: MockSocket | null = null;
    const gateway = new MockGateway();
    const session = new UiSession({
        url: "ws://test",
        connect: () => (socket = new MockSocket(gateway)),
        now: () => t,
        schedule: () => undefined,
    });
    session.start();
    socket!.open();
    for (let i = 0; i < 20; i++) {
        t += 50;
        session.playNote(40 + i);
    }
    session.togglePart(2, false);
    for (let i = 0; i < 20; i++) {
        t += 50;
        session.playNote(52 + i);
    }
    return session;
}

describe("replayLog", () => {
    it("reproduces the live roll rectangle for rectangle", () => {
        const live = scriptedSession();
        const replayed = replayLog(live.log);
        expect(replayed.roll.rects).toEqual(live.roll.rects);
        expect(replayed.roll.rects).toHaveLength(40);
    });

    it("reproduces the panel state", () => {
        const live = scriptedSession();
        const replayed = replayLog(live.log);
        expect(replayed.panel).not.toBeNull();
        for (let part = 0; part < 4; part++) {
            expect(replayed.panel!.isEnabled(part))
                .toBe(live.panel!.isEnabled(part));
        }
    });

    it("survives a serialize/deserialize round trip unchanged", () => {
        const live = scriptedSession();
        const wire = serializeLog(live.log);
        const back = replayLog(deserializeLog(wire));
        expect(back.roll.rects).toEqual(live.roll.rects);
    });

    it("replaying a replayed log is a fixed point", () => {
        const live = scriptedSession();
        const once = replayLog(live.log);
        const twice = replayLog(live.log);
        expect(twice.roll.rects).toEqual(once.roll.rects);
    });

    it("ignores labels before any hello", () => {
        const { roll, panel } = replayLog([
            {
                dir: "received",
                atMs: 0,
                frame: { t: "label", pitch: 60, part: 1, scores: [0, 1] },
            },
        ]);
        expect(roll.rects).toHaveLength(0);
        expect(panel).toBeNull();
    });
});
