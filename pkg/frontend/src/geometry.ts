import type { BoundingBox, GlandLayout, GlandSpec, ValidationReport } from './types.js';

export const DEFAULT_CANVAS_SIZE = 256;
export const MAX_GLANDS = 20;

// Bounding box preview: the exact region the model will synthesize the gland
// into. Centered span clamped per edge to the canvas; null when the clamped
// box has no area (gland entirely off-canvas).
export function bboxFromSpec(spec: GlandSpec, canvasSize: number): BoundingBox | null {
  const x0 = Math.max(0, spec.x - spec.sx / 2);
  const y0 = Math.max(0, spec.y - spec.sy / 2);
  const x1 = Math.min(canvasSize, spec.x + spec.sx / 2);
  const y1 = Math.min(canvasSize, spec.y + spec.sy / 2);
  if (x0 >= x1 || y0 >= y1) {
    return null;
  }
  return { x0, y0, x1, y1 };
}

export function layoutBboxes(layout: GlandLayout): (BoundingBox | null)[] {
  return layout.glands.map((g) => bboxFromSpec(g, layout.canvas_size));
}

// Client-side twin of the service's layout validation: same rules, same
// violation shapes, so the editor can reject a layout before POSTing it.
export function validateLayout(
  layout: GlandLayout,
  maxGlands: number = MAX_GLANDS,
): ValidationReport {
  const violations: string[] = [];
  const n = layout.glands.length;
  if (n < 1 || n > maxGlands) {
    violations.push(`n out of range: ${n} glands, expected 1..${maxGlands}`);
  }
  if (layout.canvas_size <= 0) {
    violations.push(`non-positive canvas size ${layout.canvas_size}`);
  }
  layout.glands.forEach((g, i) => {
    if (g.sx <= 0 || g.sy <= 0) {
      violations.push(`gland ${i}: non-positive size (${g.sx}, ${g.sy})`);
    }
    if (!(g.x >= 0 && g.x < layout.canvas_size && g.y >= 0 && g.y < layout.canvas_size)) {
      violations.push(`gland ${i}: off-canvas location (${g.x}, ${g.y})`);
    }
  });
  return { ok: violations.length === 0, violations };
}

const LAYOUT_KEYS = new Set(['canvas_size', 'glands']);
const GLAND_KEYS = new Set(['x', 'y', 'sx', 'sy', 'seed']);

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

// Strict layout parsing, mirroring the service: unknown fields rejected,
// x/y/sx/sy required, seed optional integer.
export function parseLayout(data: unknown): GlandLayout {
  if (!isRecord(data)) {
    throw new Error('layout must be a JSON object');
  }
  const unknown = Object.keys(data).filter((k) => !LAYOUT_KEYS.has(k));
  if (unknown.length > 0) {
    throw new Error(`unknown layout fields: ${unknown.sort().join(', ')}`);
  }
  if (!('canvas_size' in data) || !('glands' in data)) {
    throw new Error("layout requires 'canvas_size' and 'glands'");
  }
  const canvasSize = data['canvas_size'];
  if (typeof canvasSize !== 'number' || !Number.isInteger(canvasSize)) {
    throw new Error('canvas_size must be an integer');
  }
  const rawGlands = data['glands'];
  if (!Array.isArray(rawGlands)) {
    throw new Error('glands must be an array');
  }
  const glands = rawGlands.map((raw, i) => {
    if (!isRecord(raw)) {
      throw new Error(`gland ${i} must be a JSON object`);
    }
    const extra = Object.keys(raw).filter((k) => !GLAND_KEYS.has(k));
    if (extra.length > 0) {
      throw new Error(`gland ${i}: unknown fields ${extra.sort().join(', ')}`);
    }
    const missing = ['x', 'y', 'sx', 'sy'].filter((k) => !(k in raw));
    if (missing.length > 0) {
      throw new Error(`gland ${i}: missing fields ${missing.join(', ')}`);
    }
    for (const key of ['x', 'y', 'sx', 'sy'] as const) {
      if (typeof raw[key] !== 'number' || !Number.isFinite(raw[key] as number)) {
        throw new Error(`gland ${i}: ${key} must be a finite number`);
      }
    }
    const seed = raw['seed'];
    if (seed !== undefined && seed !== null && !Number.isInteger(seed)) {
      throw new Error(`gland ${i}: seed must be an integer`);
    }
    const spec: GlandSpec = {
      x: raw['x'] as number,
      y: raw['y'] as number,
      sx: raw['sx'] as number,
      sy: raw['sy'] as number,
    };
    if (seed !== undefined && seed !== null) {
      spec.seed = seed as number;
    }
    return spec;
  });
  return { canvas_size: canvasSize, glands };
}

// Canonical serialization: key order fixed (canvas_size, glands; x, y, sx,
// sy, seed), null seeds dropped, two-space indent. Byte-for-byte stable so
// a saved layout is a reproducible artifact.
export function serializeLayout(layout: GlandLayout): string {
  const glands = layout.glands.map((g) => {
    const entry: GlandSpec = { x: g.x, y: g.y, sx: g.sx, sy: g.sy };
    if (g.seed !== undefined && g.seed !== null) {
      entry.seed = g.seed;
    }
    return entry;
  });
  return JSON.stringify({ canvas_size: layout.canvas_size, glands }, null, 2);
}

export function cloneLayout(layout: GlandLayout): GlandLayout {
  return {
    canvas_size: layout.canvas_size,
    glands: layout.glands.map((g) => ({ ...g })),
  };
}

export function layoutsEqual(a: GlandLayout, b: GlandLayout): boolean {
  return serializeLayout(a) === serializeLayout(b);
}
