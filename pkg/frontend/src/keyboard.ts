/**
 * On-screen keyboard (with computer-key bindings) used when no hardware
 * MIDI input is around.  Two octaves starting at C3; the home row plays
 * naturals and the row above plays sharps, like most tracker layouts.
 */

export const KEYBOARD_BASE_PITCH = 48; // C3
export const KEYBOARD_OCTAVES = 2;

const NATURAL_OFFSETS = [0, 2, 4, 5, 7, 9, 11];
const SHARP_OF: Record<number, number> = { 0: 1, 2: 3, 5: 6, 7: 8, 9: 10 };

const NATURAL_KEYS = "awsedftgyhujkolp;'".split("");

/** computer key -> pitch for the two-octave layout */
export function keyBindings(): Map<string, number> {
    const map = new Map<string, number>();
    let key = 0;
    for (let octave = 0; octave <= KEYBOARD_OCTAVES; octave++) {
        for (let i = 0; i < NATURAL_OFFSETS.length; i++) {
            const natural = KEYBOARD_BASE_PITCH + 12 * octave + NATURAL_OFFSETS[i];
            if (natural > 127 || key >= NATURAL_KEYS.length) return map;
            map.set(NATURAL_KEYS[key], natural);
            key += 1;
            const sharpOffset = SHARP_OF[NATURAL_OFFSETS[i]];
            if (sharpOffset !== undefined && key < NATURAL_KEYS.length) {
                map.set(NATURAL_KEYS[key], KEYBOARD_BASE_PITCH + 12 * octave + sharpOffset);
                key += 1;
            }
        }
    }
    return map;
}

export function isBlackKey(pitch: number): boolean {
    return [1, 3, 6, 8, 10].includes(((pitch % 12) + 12) % 12);
}

export interface KeyboardHandlers {
    onNote: (pitch: number) => void;
}

/** Build the clickable keys into `container`; returns a detach function. */
export function buildKeyboard(container: HTMLElement,
                              handlers: KeyboardHandlers): () => void {
    const lo = KEYBOARD_BASE_PITCH;
    const hi = KEYBOARD_BASE_PITCH + 12 * KEYBOARD_OCTAVES;
    const byPitch = new Map<number, HTMLButtonElement>();
    for (let pitch = lo; pitch <= hi; pitch++) {
        const key = document.createElement("button");
        key.className = isBlackKey(pitch) ? "key black" : "key white";
        key.dataset.pitch = String(pitch);
        key.addEventListener("pointerdown", (ev) => {
            ev.preventDefault();
            handlers.onNote(pitch);
        });
        container.appendChild(key);
        byPitch.set(pitch, key);
    }

    const bindings = keyBindings();
    const down = new Set<string>();
    const onKeyDown = (ev: KeyboardEvent) => {
        if (ev.repeat || ev.metaKey || ev.ctrlKey || ev.altKey) return;
        const pitch = bindings.get(ev.key);
        if (pitch === undefined || down.has(ev.key)) return;
        down.add(ev.key);
        handlers.onNote(pitch);
        byPitch.get(pitch)?.classList.add("pressed");
    };
    const onKeyUp = (ev: KeyboardEvent) => {
        down.delete(ev.key);
        const pitch = bindings.get(ev.key);
        if (pitch !== undefined) byPitch.get(pitch)?.classList.remove("pressed");
    };
    window.addEventListener("keydown", onKeyDown);
    window.addEventListener("keyup", onKeyUp);

    return () => {
        window.removeEventListener("keydown", onKeyDown);
        window.removeEventListener("keyup", onKeyUp);
        container.replaceChildren();
    };
}
