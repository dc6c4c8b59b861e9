/** Canvas rendering of probes, primitive glyphs and verdicts.
 *
 * Glyphs are double-headed segments: orientation is defined modulo a half
 * turn, so an arrowhead would assert a direction the model does not hold.
 * Everything drawn comes verbatim from service responses; the client never
 * recomputes canonization or the worst pair.
 */

import type { Point, PrimitiveGlyph, ScoreResponse, WorstPair } from "./types.js";

/** The slice of CanvasRenderingContext2D the overlay uses (fakeable in tests). */
export interface Pen {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
}

export const PROBE_COLOR = "#2fbf4f";
export const CANON_COLOR = "#f0c420";
export const WORST_COLOR = "#e53935";
export const VOCAB_COLOR = "#7f9cf5";
export const GLYPH_HALF_LENGTH = 14;
export const WORST_GLYPH_HALF_LENGTH = 18;

/** Endpoints of a double-headed glyph centred on the primitive. */
export function glyphSegment(p: PrimitiveGlyph, half: number): [Point, Point] {
  const dx = half * Math.cos(p.Theta);
  const dy = half * Math.sin(p.Theta);
  return [
    [p.X - dx, p.Y - dy],
    [p.X + dx, p.Y + dy],
  ];
}

export function drawSegment(pen: Pen, a: Point, b: Point, color: string, width: number): void {
  pen.strokeStyle = color;
  pen.lineWidth = width;
  pen.beginPath();
  pen.moveTo(a[0], a[1]);
  pen.lineTo(b[0], b[1]);
  pen.stroke();
}

export function drawPolyline(pen: Pen, points: readonly Point[], color = PROBE_COLOR): void {
  if (points.length === 0) return;
  pen.strokeStyle = color;
  pen.lineWidth = 2;
  pen.beginPath();
  const [first, ...rest] = points as [Point, ...Point[]];
  pen.moveTo(first[0], first[1]);
  for (const [x, y] of rest) pen.lineTo(x, y);
  pen.stroke();
  for (const [x, y] of points) {
    pen.fillStyle = color;
    pen.beginPath();
    pen.arc(x, y, 2.5, 0, 2 * Math.PI);
    pen.fill();
  }
}

export function drawGlyph(pen: Pen, p: PrimitiveGlyph, color: string, half: number, width = 2): void {
  const [a, b] = glyphSegment(p, half);
  drawSegment(pen, a, b, color, width);
}

export function drawVocabulary(pen: Pen, primitives: readonly PrimitiveGlyph[]): void {
  for (const p of primitives) drawGlyph(pen, p, VOCAB_COLOR, GLYPH_HALF_LENGTH, 1);
}

/** The probe's canonization: one glyph per sequence element, straight from
 * the response's canonized indices and the served vocabulary array. */
export function drawCanonization(
  pen: Pen,
  canonized: readonly number[],
  vocabulary: readonly PrimitiveGlyph[],
): void {
  for (const index of canonized) {
    const p = vocabulary[index];
    if (p !== undefined) drawGlyph(pen, p, CANON_COLOR, GLYPH_HALF_LENGTH, 2);
  }
}

export function drawWorstPair(pen: Pen, pair: WorstPair): void {
  drawSegment(
    pen,
    [pair.prim_a.X, pair.prim_a.Y],
    [pair.prim_b.X, pair.prim_b.Y],
    WORST_COLOR,
    1,
  );
  drawGlyph(pen, pair.prim_a, WORST_COLOR, WORST_GLYPH_HALF_LENGTH, 3);
  drawGlyph(pen, pair.prim_b, WORST_COLOR, WORST_GLYPH_HALF_LENGTH, 3);
}

/** Numbers are displayed exactly as received: String() of a parsed JSON
 * number reproduces the shortest round-trip decimal. */
export function formatScore(value: number | null): string {
  return value === null ? "n/a" : String(value);
}

export function verdictLabel(novel: boolean | null): string {
  if (novel === null) return "n/a";
  return novel ? "NOVEL" : "normal";
}

export interface ScoreboardLine {
  label: string;
  value: string;
  verdict: string;
}

/** The scoreboard a verdict panel renders; tests pin this to the response. */
export function scoreboard(response: ScoreResponse): ScoreboardLine[] {
  return [
    {
      label: "rho1 (chain ensemble)",
      value: formatScore(response.rho1),
      verdict: verdictLabel(response.novel1),
    },
    {
      label: "rho2 (pursuit model)",
      value: formatScore(response.rho2),
      verdict: verdictLabel(response.novel2),
    },
  ];
}
