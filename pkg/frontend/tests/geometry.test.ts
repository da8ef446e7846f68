import { describe, expect, it } from 'vitest';

import { bboxFromSpec, layoutBboxes, validateLayout } from '../src/geometry.js';
import { initialState, moveGland, resizeGland } from '../src/state.js';
import type { GlandSpec } from '../src/types.js';

describe('bboxFromSpec', () => {
  it('matches the frozen reference cases', () => {
    expect(bboxFromSpec({ x: 128, y: 128, sx: 64, sy: 32 }, 256)).toEqual({
      x0: 96,
      y0: 112,
      x1: 160,
      y1: 144,
    });
    expect(bboxFromSpec({ x: 10, y: 10, sx: 20, sy: 20 }, 256)).toEqual({
      x0: 0,
      y0: 0,
      x1: 20,
      y1: 20,
    });
    expect(bboxFromSpec({ x: 2, y: 2, sx: 20, sy: 20 }, 256)).toEqual({
      x0: 0,
      y0: 0,
      x1: 12,
      y1: 12,
    });
  });

  it('returns null for a gland entirely off-canvas', () => {
    expect(bboxFromSpec({ x: -30, y: 128, sx: 20, sy: 20 }, 256)).toBeNull();
    expect(bboxFromSpec({ x: 128, y: 300, sx: 40, sy: 40 }, 256)).toBeNull();
  });

  it('is translation-equivariant away from the canvas border', () => {
    const base: GlandSpec = { x: 100, y: 100, sx: 40, sy: 24 };
    for (let i = 0; i < 25; i += 1) {
      const dx = -60 + i * 5;
      const dy = 60 - i * 4;
      const shifted = bboxFromSpec({ ...base, x: base.x + dx, y: base.y + dy }, 256);
      const reference = bboxFromSpec(base, 256);
      expect(shifted).not.toBeNull();
      expect(reference).not.toBeNull();
      expect(shifted!.x0).toBeCloseTo(reference!.x0 + dx, 12);
      expect(shifted!.x1).toBeCloseTo(reference!.x1 + dx, 12);
      expect(shifted!.y0).toBeCloseTo(reference!.y0 + dy, 12);
      expect(shifted!.y1).toBeCloseTo(reference!.y1 + dy, 12);
    }
  });
});

describe('gesture previews reproduce the bbox formula', () => {
  it('moving a gland +20 px right shifts its preview box by exactly 20', () => {
    const state = initialState(256); // one gland at (128, 128), size 48x48
    const before = bboxFromSpec(state.layout.glands[0]!, 256)!;
    const moved = moveGland(state, 0, 20, 0);
    const after = bboxFromSpec(moved.layout.glands[0]!, 256)!;
    expect(after).toEqual({
      x0: before.x0 + 20,
      y0: before.y0,
      x1: before.x1 + 20,
      y1: before.y1,
    });
  });

  it('halving sx halves the preview width', () => {
    const state = initialState(256);
    const gland = state.layout.glands[0]!;
    const before = bboxFromSpec(gland, 256)!;
    const resized = resizeGland(state, 0, gland.sx / 2, gland.sy);
    const after = bboxFromSpec(resized.layout.glands[0]!, 256)!;
    expect(after.x1 - after.x0).toBeCloseTo((before.x1 - before.x0) / 2, 12);
    expect(after.y1 - after.y0).toBeCloseTo(before.y1 - before.y0, 12);
    expect((after.x0 + after.x1) / 2).toBeCloseTo(gland.x, 12);
  });

  it('a move into the border clamps the preview to the canvas edge', () => {
    const state = initialState(256);
    const moved = moveGland(state, 0, -118, 0); // center at x=10, sx=48
    const box = bboxFromSpec(moved.layout.glands[0]!, 256)!;
    expect(box.x0).toBe(0);
    expect(box.x1).toBe(34);
  });
});

describe('validateLayout', () => {
  it('accepts a plain in-bounds layout', () => {
    const report = validateLayout({
      canvas_size: 256,
      glands: [{ x: 40, y: 50, sx: 20, sy: 20 }],
    });
    expect(report).toEqual({ ok: true, violations: [] });
  });

  it('reports gland count out of range', () => {
    expect(validateLayout({ canvas_size: 256, glands: [] }).violations).toContain(
      'n out of range: 0 glands, expected 1..20',
    );
    const many = Array.from({ length: 21 }, (_, i) => ({
      x: 10 + i,
      y: 10,
      sx: 4,
      sy: 4,
    }));
    expect(validateLayout({ canvas_size: 256, glands: many }).violations).toContain(
      'n out of range: 21 glands, expected 1..20',
    );
  });

  it('reports non-positive canvas size', () => {
    const report = validateLayout({ canvas_size: 0, glands: [{ x: 1, y: 1, sx: 2, sy: 2 }] });
    expect(report.violations).toContain('non-positive canvas size 0');
  });

  it('reports non-positive gland size with the gland index', () => {
    const report = validateLayout({
      canvas_size: 256,
      glands: [
        { x: 10, y: 10, sx: 5, sy: 5 },
        { x: 20, y: 20, sx: 0, sy: 8 },
      ],
    });
    expect(report.ok).toBe(false);
    expect(report.violations).toEqual(['gland 1: non-positive size (0, 8)']);
  });

  it('reports off-canvas centers', () => {
    const report = validateLayout({
      canvas_size: 256,
      glands: [{ x: 256, y: 10, sx: 5, sy: 5 }],
    });
    expect(report.violations).toEqual(['gland 0: off-canvas location (256, 10)']);
  });

  it('collects multiple violations', () => {
    const report = validateLayout({
      canvas_size: 256,
      glands: [{ x: -1, y: 10, sx: -2, sy: 5 }],
    });
    expect(report.ok).toBe(false);
    expect(report.violations).toHaveLength(2);
  });
});

describe('layoutBboxes', () => {
  it('preserves gland order', () => {
    const boxes = layoutBboxes({
      canvas_size: 256,
      glands: [
        { x: 128, y: 128, sx: 64, sy: 32 },
        { x: 10, y: 10, sx: 20, sy: 20 },
      ],
    });
    expect(boxes).toHaveLength(2);
    expect(boxes[0]).toEqual({ x0: 96, y0: 112, x1: 160, y1: 144 });
    expect(boxes[1]).toEqual({ x0: 0, y0: 0, x1: 20, y1: 20 });
  });
});
