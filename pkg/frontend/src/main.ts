/** Page wiring: session + roll canvas + switch panel + keyboard + synth. */

import { buildKeyboard } from "./keyboard.js";
import { partColor } from "./protocol.js";
import { replayLog } from "./replay.js";
import type { RollView } from "./roll.js";
import { UiSession, type SocketLike } from "./session.js";
import { PartSynth } from "./synth.js";

const WINDOW_MS = 12_000;

function gatewayUrl(): string {
    const fromQuery = new URLSearchParams(location.search).get("gateway");
    const input = document.querySelector<HTMLInputElement>("#gateway-url");
    if (fromQuery) {
        if (input) input.value = fromQuery;
        return fromQuery;
    }
    return input?.value || "ws://127.0.0.1:8765";
}

function webSocketFactory(url: string): SocketLike {
    const ws = new WebSocket(url);
    const shim: SocketLike = {
        send: (data) => ws.send(data),
        close: () => ws.close(),
        onopen: null,
        onmessage: null,
        onclose: null,
    };
    ws.onopen = () => shim.onopen?.();
    ws.onmessage = (ev) => shim.onmessage?.(String(ev.data));
    ws.onclose = () => shim.onclose?.();
    ws.onerror = () => ws.close();
    return shim;
}

function main(): void {
    const canvas = document.querySelector<HTMLCanvasElement>("#roll")!;
    const ctx = canvas.getContext("2d")!;
    const banner = document.querySelector<HTMLElement>("#banner")!;
    const panelBox = document.querySelector<HTMLElement>("#switches")!;
    const latencyBox = document.querySelector<HTMLElement>("#latency")!;
    const keys = document.querySelector<HTMLElement>("#keyboard")!;
    const synth = new PartSynth();

    const session = new UiSession({
        url: gatewayUrl(),
        connect: webSocketFactory,
        onChange: () => {
            renderBanner();
            renderPanel();
        },
    });

    let lastDrawn = 0;
    function renderRoll(): void {
        const view: RollView = {
            width: canvas.width,
            height: canvas.height,
            windowMs: WINDOW_MS,
            nowMs: performance.now(),
            loPitch: 30,
            hiPitch: 96,
        };
        session.roll.draw(ctx, view);
        const count = session.roll.rects.length;
        if (count > lastDrawn) {
            const rect = session.roll.rects[count - 1];
            synth.play(rect.pitch, rect.part);
            lastDrawn = count;
        }
        latencyBox.textContent = session.latency.count > 0
            ? `latency p50 ${session.latency.p50.toFixed(1)} ms / `
              + `p95 ${session.latency.p95.toFixed(1)} ms`
            : "latency –";
        requestAnimationFrame(renderRoll);
    }

    function renderBanner(): void {
        banner.dataset.state = session.state;
        banner.textContent = {
            disconnected: "disconnected — retrying…",
            connecting: "connecting…",
            live: session.lastError ? `live — ${session.lastError}` : "live",
        }[session.state];
        keys.classList.toggle("disabled", session.state !== "live");
    }

    function renderPanel(): void {
        panelBox.replaceChildren();
        const panel = session.panel;
        if (panel === null) return;
        for (let part = 0; part < panel.k; part++) {
            const label = document.createElement("label");
            label.className = "switch";
            const box = document.createElement("input");
            box.type = "checkbox";
            box.checked = panel.isEnabled(part);
            box.addEventListener("change", () => {
                if (!session.togglePart(part, box.checked)) {
                    box.checked = panel.isEnabled(part);
                    label.title = panel.blockedReason ?? "";
                }
            });
            const swatch = document.createElement("span");
            swatch.className = "swatch";
            swatch.style.background = partColor(part);
            label.append(box, swatch, panel.names[part]);
            panelBox.appendChild(label);
        }
    }

    buildKeyboard(keys, { onNote: (pitch) => session.playNote(pitch) });

    document.querySelector("#reconnect")?.addEventListener("click", () => {
        session.stop();
        session.start();
    });
    document.querySelector("#save-log")?.addEventListener("click", () => {
        const blob = new Blob([JSON.stringify(session.log)],
            { type: "application/json" });
        const a = document.createElement("a");
        a.href = URL.createObjectURL(blob);
        a.download = "session-log.json";
        a.click();
        URL.revokeObjectURL(a.href);
    });
    document.querySelector<HTMLInputElement>("#load-log")
        ?.addEventListener("change", async (ev) => {
            const file = (ev.target as HTMLInputElement).files?.[0];
            if (!file) return;
            const replayed = replayLog(JSON.parse(await file.text()));
            session.stop();
            session.roll.clear();
            for (const r of replayed.roll.rects) {
                session.roll.add(r.ms, r.pitch, r.part);
            }
            banner.textContent = `replay — ${replayed.roll.rects.length} notes`;
        });

    session.start();
    renderRoll();
}

main();
