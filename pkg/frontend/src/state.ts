import { cloneLayout, DEFAULT_CANVAS_SIZE, MAX_GLANDS, validateLayout } from './geometry.js';
import type { GenerateResponse, GlandLayout, GlandSpec } from './types.js';

export const HISTORY_LIMIT = 50;
export const DEFAULT_GLAND_SIZE = 48;

export interface EditorState {
  layout: GlandLayout;
  selectedGland: number | null;
  lastResponse: GenerateResponse | null;
  previousResponse: GenerateResponse | null;
  seed: number;
  seedLocked: boolean;
  history: GlandLayout[];
  future: GlandLayout[];
}

export function initialState(canvasSize: number = DEFAULT_CANVAS_SIZE): EditorState {
  const half = canvasSize / 2;
  return {
    layout: {
      canvas_size: canvasSize,
      glands: [{ x: half, y: half, sx: DEFAULT_GLAND_SIZE, sy: DEFAULT_GLAND_SIZE }],
    },
    selectedGland: 0,
    lastResponse: null,
    previousResponse: null,
    seed: 0,
    seedLocked: false,
    history: [],
    future: [],
  };
}

// Every committed gesture funnels through here: the previous layout goes on
// the (bounded) undo stack and the redo stack is cleared.
function commit(state: EditorState, layout: GlandLayout): EditorState {
  const history = [...state.history, cloneLayout(state.layout)];
  if (history.length > HISTORY_LIMIT) {
    history.shift();
  }
  return { ...state, layout, history, future: [] };
}

// Gestures return the input state unchanged when the result would violate a
// layout invariant; the caller renders the rejection (no error channel).
function guarded(state: EditorState, layout: GlandLayout): EditorState {
  if (!validateLayout(layout).ok) {
    return state;
  }
  return commit(state, layout);
}

export function addGland(
  state: EditorState,
  x: number,
  y: number,
  sx: number = DEFAULT_GLAND_SIZE,
  sy: number = DEFAULT_GLAND_SIZE,
): EditorState {
  if (state.layout.glands.length >= MAX_GLANDS) {
    return state;
  }
  const layout = cloneLayout(state.layout);
  layout.glands.push({ x, y, sx, sy });
  const next = guarded(state, layout);
  if (next === state) {
    return state;
  }
  return { ...next, selectedGland: layout.glands.length - 1 };
}

export function moveGland(
  state: EditorState,
  index: number,
  dx: number,
  dy: number,
): EditorState {
  const gland = state.layout.glands[index];
  if (gland === undefined) {
    return state;
  }
  const layout = cloneLayout(state.layout);
  const target = layout.glands[index] as GlandSpec;
  target.x = gland.x + dx;
  target.y = gland.y + dy;
  return guarded(state, layout);
}

export function resizeGland(
  state: EditorState,
  index: number,
  sx: number,
  sy: number,
): EditorState {
  const gland = state.layout.glands[index];
  if (gland === undefined) {
    return state;
  }
  const layout = cloneLayout(state.layout);
  const target = layout.glands[index] as GlandSpec;
  target.sx = sx;
  target.sy = sy;
  return guarded(state, layout);
}

export function deleteGland(state: EditorState, index: number): EditorState {
  if (state.layout.glands[index] === undefined) {
    return state;
  }
  const layout = cloneLayout(state.layout);
  layout.glands.splice(index, 1);
  const next = guarded(state, layout); // deleting the last gland is rejected
  if (next === state) {
    return state;
  }
  const selected =
    state.selectedGland === null
      ? null
      : state.selectedGland === index
        ? null
        : state.selectedGland > index
          ? state.selectedGland - 1
          : state.selectedGland;
  return { ...next, selectedGland: selected };
}

export function setGlandSeed(
  state: EditorState,
  index: number,
  seed: number | null,
): EditorState {
  const gland = state.layout.glands[index];
  if (gland === undefined) {
    return state;
  }
  const layout = cloneLayout(state.layout);
  const target = layout.glands[index] as GlandSpec;
  if (seed === null) {
    delete target.seed;
  } else {
    target.seed = seed;
  }
  return guarded(state, layout);
}

export function selectGland(state: EditorState, index: number | null): EditorState {
  if (index !== null && state.layout.glands[index] === undefined) {
    return state;
  }
  return { ...state, selectedGland: index };
}

export function setSeed(state: EditorState, seed: number): EditorState {
  return { ...state, seed };
}

export function toggleSeedLock(state: EditorState): EditorState {
  return { ...state, seedLocked: !state.seedLocked };
}

export function undo(state: EditorState): EditorState {
  const previous = state.history[state.history.length - 1];
  if (previous === undefined) {
    return state;
  }
  return {
    ...state,
    layout: cloneLayout(previous),
    history: state.history.slice(0, -1),
    future: [cloneLayout(state.layout), ...state.future],
    selectedGland: null,
  };
}

export function redo(state: EditorState): EditorState {
  const next = state.future[0];
  if (next === undefined) {
    return state;
  }
  return {
    ...state,
    layout: cloneLayout(next),
    history: [...state.history, cloneLayout(state.layout)],
    future: state.future.slice(1),
    selectedGland: null,
  };
}

export function canUndo(state: EditorState): boolean {
  return state.history.length > 0;
}

export function canRedo(state: EditorState): boolean {
  return state.future.length > 0;
}

// A fresh result shifts the previous one into the diff slot so a seed-locked
// edit can be compared before/after.
export function applyResponse(state: EditorState, response: GenerateResponse): EditorState {
  return {
    ...state,
    previousResponse: state.lastResponse,
    lastResponse: response,
    seed: state.seedLocked ? state.seed : response.seed_used,
  };
}
