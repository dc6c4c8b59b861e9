/** Probe session state: the polyline being drawn, an append-only history
 * of scored probes, and overlay visibility flags. */

import type { Point, ScoreResponse } from "./types.js";

export interface ProbeRecord {
  readonly polyline: readonly Point[];
  readonly response: ScoreResponse;
}

export interface OverlayFlags {
  primitives: boolean;
  canonization: boolean;
  worstPair: boolean;
}

export const MIN_CLICKS = 2;

export class ProbeSession {
  private clicks: Point[] = [];
  private records: ProbeRecord[] = [];
  readonly flags: OverlayFlags = {
    primitives: false,
    canonization: true,
    worstPair: true,
  };

  get polyline(): readonly Point[] {
    return this.clicks;
  }

  get history(): readonly ProbeRecord[] {
    return this.records;
  }

  addClick(x: number, y: number): void {
    this.clicks.push([x, y]);
  }

  clearCurrent(): void {
    this.clicks = [];
  }

  canSubmit(): boolean {
    return this.clicks.length >= MIN_CLICKS;
  }

  /** Hint shown when submit is blocked client-side. */
  submitBlockReason(): string | null {
    return this.canSubmit()
      ? null
      : `draw at least ${MIN_CLICKS} points before scoring`;
  }

  record(response: ScoreResponse): ProbeRecord {
    const entry: ProbeRecord = Object.freeze({
      polyline: Object.freeze([...this.clicks]) as readonly Point[],
      response,
    });
    this.records.push(entry);
    return entry;
  }

  toggle(flag: keyof OverlayFlags): void {
    this.flags[flag] = !this.flags[flag];
  }
}
