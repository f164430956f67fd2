/**
 * Per-part synthesizer voices: each part gets its own oscillator
 * waveform so the ear can tell the assignments apart without sample
 * assets.  One short envelope per note; nothing is held.
 */

export const PART_WAVEFORMS: OscillatorType[] = [
    "sine", "square", "sawtooth", "triangle",
];

export function waveformFor(part: number): OscillatorType {
    return PART_WAVEFORMS[((part % PART_WAVEFORMS.length)
        + PART_WAVEFORMS.length) % PART_WAVEFORMS.length];
}

export function pitchToHz(pitch: number): number {
    return 440 * Math.pow(2, (pitch - 69) / 12);
}

export class PartSynth {
    private ctx: AudioContext | null = null;
    private master: GainNode | null = null;
    muted = false;

    private ensureContext(): AudioContext | null {
        if (typeof AudioContext === "undefined") return null;
        if (this.ctx === null) {
            this.ctx = new AudioContext();
            this.master = this.ctx.createGain();
            this.master.gain.value = 0.25;
            this.master.connect(this.ctx.destination);
        }
        if (this.ctx.state === "suspended") void this.ctx.resume();
        return this.ctx;
    }

    /** Sound one labeled note on its part's timbre. */
    play(pitch: number, part: number, durationS = 0.25): void {
        if (this.muted) return;
        const ctx = this.ensureContext();
        if (ctx === null || this.master === null) return;
        const osc = ctx.createOscillator();
        osc.type = waveformFor(part);
        osc.frequency.value = pitchToHz(pitch);
        const env = ctx.createGain();
        const now = ctx.currentTime;
        env.gain.setValueAtTime(0, now);
        env.gain.linearRampToValueAtTime(1, now + 0.01);
        env.gain.exponentialRampToValueAtTime(0.001, now + durationS);
        osc.connect(env);
        env.connect(this.master);
        osc.start(now);
        osc.stop(now + durationS + 0.05);
        osc.onended = () => {
            osc.disconnect();
            env.disconnect();
        };
    }
}
