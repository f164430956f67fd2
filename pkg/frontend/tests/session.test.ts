import { describe, expect, it } from "vitest";

import { UiSession } from "../src/session.js";
import { MockGateway, MockSocket } from "./mock_gateway.js";

interface Rig {
    session: UiSession;
    gateway: MockGateway;
    socket: () => MockSocket;
    tick: (ms?: number) => void;
    scheduled: Array<{ fn: () => void; delayMs: number }>;
}

function rig(): Rig {
    let t = 0;
    let socket: MockSocket | null = null;
    const gateway = new MockGateway();
    const scheduled: Array<{ fn: () => void; delayMs: number }> = [];
    const session = new UiSession({
        url: "ws://test",
        connect: () => {
            socket = new MockSocket(gateway);
            return socket;
        },
        now: () => t,
        schedule: (fn, delayMs) => scheduled.push({ fn, delayMs }),
    });
    return {
        session,
        gateway,
        socket: () => {
            if (socket === null) throw new Error("not connected");
            return socket;
        },
        tick: (ms = 50) => { t += ms; },
        scheduled,
    };
}

function goLive(r: Rig): void {
    r.session.start();
    r.socket().open();
}

describe("connection state machine", () => {
    it("walks disconnected -> connecting -> live on the hello frame", () => {
        const r = rig();
        expect(r.session.state).toBe("disconnected");
        r.session.start();
        expect(r.session.state).toBe("connecting");
        expect(r.session.playNote(60)).toBe(false); // nothing rendered yet
        r.socket().open();
        expect(r.session.state).toBe("live");
        expect(r.session.panel?.names)
            .toEqual(["soprano", "alto", "tenor", "bass"]);
    });

    it("schedules reconnects with doubling backoff after a drop", () => {
        const r = rig();
        goLive(r);
        r.socket().dropFromServer();
        expect(r.session.state).toBe("disconnected");
        expect(r.scheduled.map((s) => s.delayMs)).toEqual([500]);

        r.scheduled[0].fn(); // timer fires, reconnect attempt
        expect(r.session.state).toBe("connecting");
        r.socket().dropFromServer();
        expect(r.scheduled.map((s) => s.delayMs)).toEqual([500, 1000]);

        r.scheduled[1].fn();
        r.socket().open();
        expect(r.session.state).toBe("live");
        expect(r.session.roll.rects).toHaveLength(0); // fresh server session
    });

    it("does not reconnect after stop()", () => {
        const r = rig();
        goLive(r);
        r.session.stop();
        expect(r.session.state).toBe("disconnected");
        expect(r.scheduled).toHaveLength(0);
    });

    it("never renders a label outside live", () => {
        const r = rig();
        r.session.start();
        // a label sneaking in before the hello frame must not draw
        r.socket().onmessage?.(
            '{"t":"label","pitch":60,"part":1,"scores":[0,1,0,0]}');
        expect(r.session.roll.rects).toHaveLength(0);
        expect(r.session.state).toBe("connecting");
    });
});

describe("playing and switching", () => {
    it("renders one rectangle per server label frame, in order", () => {
        const r = rig();
        goLive(r);
        for (let i = 0; i < 10; i++) {
            r.tick();
            expect(r.session.playNote(48 + i)).toBe(true);
        }
        expect(r.session.roll.rects).toHaveLength(10);
        expect(r.session.roll.rects.map((x) => [x.pitch, x.part]))
            .toEqual(r.gateway.labelsSent.map((f) => [f.pitch, f.part]));
    });

    it("records round-trip latency per note", () => {
        const r = rig();
        goLive(r);
        r.session.playNote(60);
        expect(r.session.latency.count).toBe(1);
    });

    it("blocks disabling the last enabled part locally", () => {
        const r = rig();
        goLive(r);
        for (const part of [0, 1, 2]) {
            expect(r.session.togglePart(part, false)).toBe(true);
        }
        const sentBefore = r.socket().sentRaw.length;
        expect(r.session.togglePart(3, false)).toBe(false);
        expect(r.session.panel?.blockedReason).toMatch(/at least one/);
        expect(r.socket().sentRaw).toHaveLength(sentBefore); // nothing sent
        expect(r.session.panel?.isEnabled(3)).toBe(true);
    });

    it("scripted session: 20 notes, toggle, 20 notes -> 40 rectangles and "
        + "no disabled-part label after the toggle", () => {
        const r = rig();
        goLive(r);

        for (let i = 0; i < 20; i++) {
            r.tick();
            r.session.playNote(40 + i);
        }
        r.tick();
        const toggledAt = 21 * 50;
        expect(r.session.togglePart(2, false)).toBe(true);
        for (let i = 0; i < 20; i++) {
            r.tick();
            r.session.playNote(52 + i);
        }

        const rects = r.session.roll.rects;
        expect(rects).toHaveLength(40);
        expect(rects.map((x) => [x.pitch, x.part]))
            .toEqual(r.gateway.labelsSent.map((f) => [f.pitch, f.part]));

        const before = rects.filter((x) => x.ms < toggledAt);
        const after = rects.filter((x) => x.ms >= toggledAt);
        expect(before).toHaveLength(20);
        expect(after).toHaveLength(20);
        expect(before.some((x) => x.part === 2)).toBe(true);
        expect(after.some((x) => x.part === 2)).toBe(false);
        expect([...r.session.roll.partsAfter(toggledAt)].sort())
            .toEqual([0, 1, 3]);

        // re-enabling lets the part come back
        r.session.togglePart(2, true);
        r.tick();
        r.session.playNote(54); // 54 % 4 == 2
        expect(r.session.roll.rects.at(-1)?.part).toBe(2);
    });

    it("reset clears the roll and re-enables every part", () => {
        const r = rig();
        goLive(r);
        r.session.playNote(60);
        r.session.togglePart(1, false);
        r.session.resetSession();
        expect(r.session.roll.rects).toHaveLength(0);
        expect(r.session.panel?.isEnabled(1)).toBe(true);
        expect(r.gateway.enabled.every(Boolean)).toBe(true);
    });

    it("surfaces err frames without dying", () => {
        const r = rig();
        goLive(r);
        r.socket().send('{"t":"mystery"}');
        expect(r.session.lastError).toBe("unknown frame");
        expect(r.session.playNote(62)).toBe(true);
        expect(r.session.roll.rects).toHaveLength(1);
    });
});
