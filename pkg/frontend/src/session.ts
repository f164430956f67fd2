/**
 * Live session state machine: {disconnected, connecting, live}.
 *
 * The session owns the socket, the switch panel, the piano roll, the
 * latency window, and the event log.  Notes are rendered only from
 * server label frames — the client never guesses a part — and every
 * frame in or out is logged so a session can be replayed bit for bit.
 */

import { LatencyWindow } from "./latency.js";
import { SwitchPanel } from "./panel.js";
import {
    noteFrame,
    parseServerFrame,
    switchFrame,
    type ClientFrame,
    type ServerFrame,
} from "./protocol.js";
import { PianoRoll } from "./roll.js";

export type SessionState = "disconnected" | "connecting" | "live";

/** The slice of WebSocket the session needs; tests supply a mock. */
export interface SocketLike {
    send(data: string): void;
    close(): void;
    onopen: (() => void) | null;
    onmessage: ((data: string) => void) | null;
    onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface LogEntry {
    dir: "sent" | "received";
    atMs: number;         // session-relative
    frame: ClientFrame | ServerFrame;
}

interface PendingNote {
    ms: number;           // session-relative time stamped into the frame
    sentWall: number;     // wall clock, for the latency readout
}

export interface SessionOptions {
    url: string;
    connect: SocketFactory;
    now?: () => number;
    /** Called after every state/roll/panel change; drives rendering. */
    onChange?: () => void;
    reconnectDelayMs?: number;
    schedule?: (fn: () => void, delayMs: number) => void;
}

export class UiSession {
    state: SessionState = "disconnected";
    panel: SwitchPanel | null = null;
    readonly roll = new PianoRoll();
    readonly latency = new LatencyWindow();
    readonly log: LogEntry[] = [];
    lastError: string | null = null;

    private socket: SocketLike | null = null;
    private pending: PendingNote[] = [];
    private origin = 0;
    private retryMs: number;
    private closedByUs = false;

    private readonly url: string;
    private readonly connect: SocketFactory;
    private readonly now: () => number;
    private readonly onChange: () => void;
    private readonly baseRetryMs: number;
    private readonly schedule: (fn: () => void, delayMs: number) => void;

    constructor(opts: SessionOptions) {
        this.url = opts.url;
        this.connect = opts.connect;
        this.now = opts.now ?? (() => performance.now());
        this.onChange = opts.onChange ?? (() => undefined);
        this.baseRetryMs = opts.reconnectDelayMs ?? 500;
        this.retryMs = this.baseRetryMs;
        this.schedule = opts.schedule
            ?? ((fn, delay) => void setTimeout(fn, delay));
    }

    start(): void {
        this.closedByUs = false;
        this.state = "connecting";
        this.onChange();
        const socket = this.connect(this.url);
        this.socket = socket;
        socket.onopen = () => {
            // stay "connecting" until the hello frame delivers k and names
        };
        socket.onmessage = (data) => this.receive(data);
        socket.onclose = () => this.dropped(socket);
    }

    stop(): void {
        this.closedByUs = true;
        this.socket?.close();
        this.socket = null;
        this.state = "disconnected";
        this.onChange();
    }

    private dropped(socket: SocketLike): void {
        if (socket !== this.socket) return; // an old socket's close event
        this.socket = null;
        this.state = "disconnected";
        this.pending = [];
        this.onChange();
        if (this.closedByUs) return;
        const wait = this.retryMs;
        this.retryMs = Math.min(this.retryMs * 2, 10_000);
        this.schedule(() => {
            if (this.state === "disconnected" && !this.closedByUs) this.start();
        }, wait);
    }

    private send(frame: ClientFrame): void {
        if (this.socket === null) return;
        this.log.push({ dir: "sent", atMs: this.sessionMs(), frame });
        this.socket.send(JSON.stringify(frame));
    }

    private sessionMs(): number {
        return Math.round(this.now() - this.origin);
    }

    private receive(raw: string): void {
        const frame = parseServerFrame(raw);
        if (frame === null) return; // not a known frame; ignore
        this.log.push({ dir: "received", atMs: this.sessionMs(), frame });
        switch (frame.t) {
            case "hello": {
                // a (re)connect is a fresh gateway session: clean slate
                this.panel = new SwitchPanel(frame.k, frame.names);
                this.roll.clear();
                this.latency.clear();
                this.pending = [];
                this.origin = this.now();
                this.retryMs = this.baseRetryMs;
                this.state = "live";
                break;
            }
            case "label": {
                if (this.state !== "live") return; // never render outside live
                const sent = this.pending.shift();
                const ms = sent?.ms ?? this.sessionMs();
                if (sent !== undefined) {
                    this.latency.add(this.now() - sent.sentWall);
                }
                this.roll.add(ms, frame.pitch, frame.part);
                break;
            }
            case "err": {
                this.lastError = frame.msg;
                break;
            }
        }
        this.onChange();
    }

    /** Send one played note; rendering happens when the label returns. */
    playNote(pitch: number): boolean {
        if (this.state !== "live" || this.socket === null) return false;
        const ms = this.sessionMs();
        this.pending.push({ ms, sentWall: this.now() });
        this.send(noteFrame(ms, pitch));
        return true;
    }

    /** Flip a part switch; blocked locally when it would disable the last part. */
    togglePart(part: number, on: boolean): boolean {
        if (this.state !== "live" || this.panel === null) return false;
        if (!this.panel.toggle(part, on)) {
            this.onChange();
            return false;
        }
        this.send(switchFrame(part, on));
        this.onChange();
        return true;
    }

    resetSession(): void {
        if (this.state !== "live") return;
        this.send({ t: "reset" });
        this.panel?.reset();
        this.roll.clear();
        this.latency.clear();
        this.pending = [];
        this.origin = this.now();
        this.onChange();
    }
}
