/**
 * Switch panel state: one enabled flag per part, names from the hello
 * frame.  Disabling the last enabled part is blocked locally (the
 * gateway would refuse it anyway); callers read `blockedReason` to show
 * the tooltip.
 */

export class SwitchPanel {
    readonly names: string[];
    private enabled: boolean[];
    blockedReason: string | null = null;

    constructor(k: number, names: string[]) {
        if (k < 1) throw new Error("need at least one part");
        this.names = Array.from({ length: k },
            (_, i) => names[i] ?? `part ${i + 1}`);
        this.enabled = Array(k).fill(true);
    }

    get k(): number {
        return this.enabled.length;
    }

    isEnabled(part: number): boolean {
        return this.enabled[part] === true;
    }

    get enabledCount(): number {
        return this.enabled.filter(Boolean).length;
    }

    /**
     * Try to flip a switch; returns true when the change is allowed and
     * should be sent to the gateway.
     */
    toggle(part: number, on: boolean): boolean {
        this.blockedReason = null;
        if (part < 0 || part >= this.enabled.length) {
            this.blockedReason = `no part ${part}`;
            return false;
        }
        if (!on && this.enabledCount === 1 && this.enabled[part]) {
            this.blockedReason = "at least one part must stay enabled";
            return false;
        }
        if (this.enabled[part] === on) return false; // nothing to send
        this.enabled[part] = on;
        return true;
    }

    reset(): void {
        this.enabled = this.enabled.map(() => true);
        this.blockedReason = null;
    }
}
