// Wire types shared with the glandsynth HTTP service. Field names are
// snake_case because they mirror the JSON contract exactly.

export interface GlandSpec {
  x: number;
  y: number;
  sx: number;
  sy: number;
  seed?: number | null;
}

export interface GlandLayout {
  canvas_size: number;
  glands: GlandSpec[];
}

export interface BoundingBox {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface GenerateRequest {
  layout: GlandLayout;
  seed?: number | null;
  checkpoint_id?: string | null;
}

export interface GenerateResponse {
  image: string; // base64 PNG, canvas_size x canvas_size RGB
  mask: string; // base64 PNG, canvas_size x canvas_size grayscale
  bboxes: BoundingBox[];
  seed_used: number;
  checkpoint_id: string;
  latency_ms: number;
}

export interface HealthResponse {
  status: 'ready' | 'loading' | 'no_model';
  checkpoint_id?: string | null;
}

export interface ValidationReport {
  ok: boolean;
  violations: string[];
}
