/** Wire types mirroring the scoring service's JSON schema. */

export type Point = [number, number];

export interface PrimitiveGlyph {
  X: number;
  Y: number;
  Theta: number;
}

export interface VocabPrimitive extends PrimitiveGlyph {
  member_count: number;
}

export interface ScaleScore {
  scale: number;
  R: number;
  R_hat: number;
}

export interface WorstPair {
  pos_a: number;
  pos_b: number;
  prim_a: PrimitiveGlyph;
  prim_b: PrimitiveGlyph;
}

export interface ScoreResponse {
  rho1: number;
  per_scale: ScaleScore[];
  rho2: number | null;
  worst_pair: WorstPair | null;
  novel1: boolean;
  novel2: boolean | null;
  canonized: number[];
}

export interface ModelMeta {
  scales: number[];
  vocab_sizes: number[];
  threshold_r1: number;
  threshold_r2: number;
  training: Record<string, unknown>;
}

export interface PrimitivesResponse {
  scale: number;
  primitives: VocabPrimitive[];
}
