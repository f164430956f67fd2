/**
 * Replay: rebuild the rendered state from a session's event log.
 *
 * The log contains every frame sent and received with session-relative
 * times, which is exactly the information the live renderer consumed —
 * so replaying yields rectangle-for-rectangle identical output.
 */

import { SwitchPanel } from "./panel.js";
import { PianoRoll } from "./roll.js";
import type { LogEntry } from "./session.js";

export interface ReplayResult {
    roll: PianoRoll;
    panel: SwitchPanel | null;
}

export function replayLog(log: readonly LogEntry[]): ReplayResult {
    const roll = new PianoRoll();
    let panel: SwitchPanel | null = null;
    let live = false;
    let pendingMs: number[] = [];

    for (const entry of log) {
        const frame = entry.frame;
        if (entry.dir === "sent") {
            switch (frame.t) {
                case "note":
                    pendingMs.push(frame.ms);
                    break;
                case "switch":
                    panel?.toggle(frame.part, frame.on);
                    break;
                case "reset":
                    panel?.reset();
                    roll.clear();
                    pendingMs = [];
                    break;
            }
            continue;
        }
        switch (frame.t) {
            case "hello":
                panel = new SwitchPanel(frame.k, frame.names);
                roll.clear();
                pendingMs = [];
                live = true;
                break;
            case "label": {
                if (!live) break;
                const ms = pendingMs.shift() ?? entry.atMs;
                roll.add(ms, frame.pitch, frame.part);
                break;
            }
            case "err":
                break;
        }
    }
    return { roll, panel };
}

export function serializeLog(log: readonly LogEntry[]): string {
    return JSON.stringify(log);
}

export function deserializeLog(text: string): LogEntry[] {
    const data = JSON.parse(text);
    if (!Array.isArray(data)) throw new Error("log must be a JSON array");
    return data as LogEntry[];
}
