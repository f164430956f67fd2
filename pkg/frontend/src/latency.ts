/** Rolling note -> label round-trip statistics for the latency readout. */

export class LatencyWindow {
    private samples: number[] = [];

    constructor(private readonly capacity = 200) {
        if (capacity < 1) throw new Error("capacity must be positive");
    }

    add(ms: number): void {
        this.samples.push(ms);
        if (this.samples.length > this.capacity) this.samples.shift();
    }

    get count(): number {
        return this.samples.length;
    }

    /** Nearest-rank percentile (q in [0, 100]) over the window. */
    percentile(q: number): number {
        if (this.samples.length === 0) return 0;
        const sorted = [...this.samples].sort((a, b) => a - b);
        const rank = Math.ceil((q / 100) * sorted.length);
        return sorted[Math.min(sorted.length - 1, Math.max(0, rank - 1))];
    }

    get p50(): number {
        return this.percentile(50);
    }

    get p95(): number {
        return this.percentile(95);
    }

    clear(): void {
        this.samples = [];
    }
}
