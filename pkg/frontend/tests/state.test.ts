import { describe, expect, it } from 'vitest';

import { serializeLayout } from '../src/geometry.js';
import {
  addGland,
  applyResponse,
  canRedo,
  canUndo,
  deleteGland,
  EditorState,
  HISTORY_LIMIT,
  initialState,
  moveGland,
  redo,
  resizeGland,
  setGlandSeed,
  setSeed,
  toggleSeedLock,
  undo,
} from '../src/state.js';
import type { GenerateResponse } from '../src/types.js';

// Small deterministic PRNG (mulberry32) so the random gesture sequences are
// reproducible across runs.
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomGesture(state: EditorState, rand: () => number): EditorState {
  const count = state.layout.glands.length;
  const kind = Math.floor(rand() * 5);
  const index = Math.floor(rand() * count);
  switch (kind) {
    case 0:
      return addGland(
        state,
        16 + rand() * 224,
        16 + rand() * 224,
        8 + rand() * 40,
        8 + rand() * 40,
      );
    case 1:
      return moveGland(state, index, rand() * 80 - 40, rand() * 80 - 40);
    case 2:
      return resizeGland(state, index, 4 + rand() * 60, 4 + rand() * 60);
    case 3:
      return deleteGland(state, index);
    default:
      return setGlandSeed(state, index, rand() < 0.5 ? null : Math.floor(rand() * 1000));
  }
}

function fakeResponse(seedUsed: number): GenerateResponse {
  return {
    image: 'aW1n',
    mask: 'bXNr',
    bboxes: [{ x0: 0, y0: 0, x1: 8, y1: 8 }],
    seed_used: seedUsed,
    checkpoint_id: 'abcdef012345',
    latency_ms: 1.5,
  };
}

describe('initialState', () => {
  it('starts with one centered valid gland and empty history', () => {
    const state = initialState(256);
    expect(state.layout.glands).toEqual([{ x: 128, y: 128, sx: 48, sy: 48 }]);
    expect(state.selectedGland).toBe(0);
    expect(state.history).toEqual([]);
    expect(state.future).toEqual([]);
    expect(state.seedLocked).toBe(false);
    expect(canUndo(state)).toBe(false);
    expect(canRedo(state)).toBe(false);
  });
});

describe('gesture rejection', () => {
  it('returns the identical state reference for invalid gestures', () => {
    const state = initialState(256);
    expect(resizeGland(state, 0, 0, 10)).toBe(state); // zero size
    expect(moveGland(state, 0, 400, 0)).toBe(state); // off-canvas center
    expect(deleteGland(state, 0)).toBe(state); // would empty the layout
    expect(moveGland(state, 5, 1, 1)).toBe(state); // no such gland
  });

  it('caps the layout at the gland limit', () => {
    let state = initialState(256);
    for (let i = 0; i < 19; i += 1) {
      state = addGland(state, 8 + i * 12, 8, 6, 6);
    }
    expect(state.layout.glands).toHaveLength(20);
    expect(addGland(state, 128, 200, 10, 10)).toBe(state); // 21st rejected
  });
});

describe('selection bookkeeping', () => {
  it('tracks deletions', () => {
    let state = initialState(256);
    state = addGland(state, 60, 60, 20, 20); // index 1, now selected
    state = addGland(state, 200, 200, 20, 20); // index 2, now selected
    expect(state.selectedGland).toBe(2);
    state = deleteGland(state, 0); // selected shifts down
    expect(state.selectedGland).toBe(1);
    state = deleteGland(state, 1); // delete the selected gland
    expect(state.selectedGland).toBeNull();
  });
});

describe('undo/redo', () => {
  it('is an exact inverse over 100 random gesture sequences', () => {
    for (let run = 0; run < 100; run += 1) {
      const rand = mulberry32(run + 1);
      let state = initialState(256);
      const trail: string[] = [serializeLayout(state.layout)];
      const steps = 5 + Math.floor(rand() * 8);
      for (let step = 0; step < steps; step += 1) {
        const before = state;
        state = randomGesture(state, rand);
        if (state === before) {
          continue; // rejected gesture, nothing to invert
        }
        const undone = undo(state);
        expect(serializeLayout(undone.layout)).toBe(serializeLayout(before.layout));
        const redone = redo(undone);
        expect(serializeLayout(redone.layout)).toBe(serializeLayout(state.layout));
        state = redone;
        trail.push(serializeLayout(state.layout));
      }
      // walk all the way back, then all the way forward
      let cursor = trail.length - 1;
      while (canUndo(state)) {
        state = undo(state);
        cursor -= 1;
        expect(serializeLayout(state.layout)).toBe(trail[cursor]);
      }
      expect(cursor).toBe(0);
      while (canRedo(state)) {
        state = redo(state);
        cursor += 1;
        expect(serializeLayout(state.layout)).toBe(trail[cursor]);
      }
      expect(cursor).toBe(trail.length - 1);
    }
  });

  it('bounds the history depth', () => {
    let state = initialState(256);
    for (let i = 0; i < HISTORY_LIMIT + 10; i += 1) {
      state = moveGland(state, 0, i % 2 === 0 ? 1 : -1, 0);
    }
    expect(state.history).toHaveLength(HISTORY_LIMIT);
    let undos = 0;
    while (canUndo(state)) {
      state = undo(state);
      undos += 1;
    }
    expect(undos).toBe(HISTORY_LIMIT);
  });

  it('clears the redo stack on a new gesture', () => {
    let state = initialState(256);
    state = moveGland(state, 0, 10, 0);
    state = undo(state);
    expect(canRedo(state)).toBe(true);
    state = resizeGland(state, 0, 30, 30);
    expect(canRedo(state)).toBe(false);
  });

  it('is a no-op at the stack ends', () => {
    const state = initialState(256);
    expect(undo(state)).toBe(state);
    expect(redo(state)).toBe(state);
  });
});

describe('seed handling', () => {
  it('adopts seed_used from a response when unlocked', () => {
    let state = initialState(256);
    state = applyResponse(state, fakeResponse(41));
    expect(state.seed).toBe(41);
    expect(state.lastResponse?.seed_used).toBe(41);
    expect(state.previousResponse).toBeNull();
  });

  it('keeps the seed when locked and shifts the previous response', () => {
    let state = initialState(256);
    state = setSeed(state, 7);
    state = toggleSeedLock(state);
    state = applyResponse(state, fakeResponse(99));
    expect(state.seed).toBe(7);
    state = applyResponse(state, fakeResponse(7));
    expect(state.previousResponse?.seed_used).toBe(99);
    expect(state.lastResponse?.seed_used).toBe(7);
  });

  it('sets and clears per-gland seeds', () => {
    let state = initialState(256);
    state = setGlandSeed(state, 0, 123);
    expect(state.layout.glands[0]?.seed).toBe(123);
    state = setGlandSeed(state, 0, null);
    expect('seed' in state.layout.glands[0]!).toBe(false);
  });
});
