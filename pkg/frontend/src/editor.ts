import { GenerateClient, LayoutRejectedError, ServiceUnavailableError, SupersededError } from './api.js';
import { bboxFromSpec, layoutsEqual, serializeLayout, validateLayout } from './geometry.js';
import {
  addGland,
  applyResponse,
  canRedo,
  canUndo,
  deleteGland,
  EditorState,
  initialState,
  moveGland,
  redo,
  resizeGland,
  selectGland,
  setSeed,
  toggleSeedLock,
  undo,
} from './state.js';
import type { GlandLayout, GlandSpec } from './types.js';

const SCALE = 2; // editor canvas pixels per layout pixel
const HANDLE_SIZE = 8;
const EPSILON = 1e-6;

interface DragGesture {
  kind: 'move' | 'resize';
  index: number;
  startX: number;
  startY: number;
  origin: GlandSpec;
  moved: boolean;
}

interface ResultView {
  label: string;
  image: HTMLImageElement;
  overlay: HTMLCanvasElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class LayoutEditor {
  private state: EditorState;
  private draft: GlandLayout | null = null;
  private drag: DragGesture | null = null;
  private readonly client: GenerateClient;
  private readonly root: HTMLElement;
  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly violationsBox: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly seedInput: HTMLInputElement;
  private readonly lockButton: HTMLButtonElement;
  private readonly undoButton: HTMLButtonElement;
  private readonly redoButton: HTMLButtonElement;
  private readonly statusLine: HTMLElement;
  private readonly current: ResultView;
  private readonly previous: ResultView;
  private readonly diffCanvas: HTMLCanvasElement;

  constructor(root: HTMLElement, client?: GenerateClient) {
    this.root = root;
    this.client = client ?? new GenerateClient();
    this.state = initialState();

    const size = this.state.layout.canvas_size * SCALE;
    this.canvas = el('canvas', 'layout-canvas');
    this.canvas.width = size;
    this.canvas.height = size;
    const ctx = this.canvas.getContext('2d');
    if (ctx === null) {
      throw new Error('2d canvas context unavailable');
    }
    this.ctx = ctx;

    this.violationsBox = el('div', 'violations');
    this.banner = el('div', 'banner hidden');
    this.seedInput = el('input', 'seed-input');
    this.seedInput.type = 'number';
    this.seedInput.value = String(this.state.seed);
    this.lockButton = el('button', '', 'lock seed');
    this.undoButton = el('button', '', 'undo');
    this.redoButton = el('button', '', 'redo');
    this.statusLine = el('div', 'status');

    this.current = this.makeResultView('current');
    this.previous = this.makeResultView('previous');
    this.diffCanvas = el('canvas', 'diff-canvas');

    this.mount();
    this.bind();
    this.render();
  }

  private makeResultView(label: string): ResultView {
    const image = el('img', 'result-image') as HTMLImageElement;
    const overlay = el('canvas', 'result-overlay');
    return { label, image, overlay };
  }

  private mount(): void {
    const toolbar = el('div', 'toolbar');
    const generateButton = el('button', 'generate', 'generate');
    generateButton.addEventListener('click', () => void this.generate());
    const deleteButton = el('button', '', 'delete gland');
    deleteButton.addEventListener('click', () => {
      if (this.state.selectedGland !== null) {
        this.update(deleteGland(this.state, this.state.selectedGland));
      }
    });
    const exportButton = el('button', '', 'copy layout JSON');
    exportButton.addEventListener('click', () => {
      void navigator.clipboard.writeText(serializeLayout(this.state.layout));
    });
    toolbar.append(
      generateButton,
      this.undoButton,
      this.redoButton,
      deleteButton,
      el('span', 'seed-label', 'seed'),
      this.seedInput,
      this.lockButton,
      exportButton,
    );

    const editorPane = el('div', 'editor-pane');
    editorPane.append(this.canvas, this.violationsBox);

    const results = el('div', 'results');
    for (const view of [this.current, this.previous]) {
      const cell = el('div', 'result-cell');
      cell.append(el('div', 'result-label', view.label), view.image, view.overlay);
      results.append(cell);
    }
    const diffCell = el('div', 'result-cell');
    diffCell.append(el('div', 'result-label', 'diff'), this.diffCanvas);
    results.append(diffCell);

    this.root.append(this.banner, toolbar, editorPane, results, this.statusLine);
  }

  private bind(): void {
    this.canvas.addEventListener('pointerdown', (event) => this.onPointerDown(event));
    this.canvas.addEventListener('pointermove', (event) => this.onPointerMove(event));
    this.canvas.addEventListener('pointerup', (event) => this.onPointerUp(event));
    this.undoButton.addEventListener('click', () => this.update(undo(this.state)));
    this.redoButton.addEventListener('click', () => this.update(redo(this.state)));
    this.lockButton.addEventListener('click', () => this.update(toggleSeedLock(this.state)));
    this.seedInput.addEventListener('change', () => {
      const value = Number(this.seedInput.value);
      if (Number.isInteger(value)) {
        this.update(setSeed(this.state, value));
      }
    });
    window.addEventListener('keydown', (event) => {
      if (event.key === 'Delete' && this.state.selectedGland !== null) {
        this.update(deleteGland(this.state, this.state.selectedGland));
      }
    });
  }

  private update(next: EditorState): void {
    this.state = next;
    this.render();
  }

  // --- pointer gestures ----------------------------------------------------

  private layoutPoint(event: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    const n = this.state.layout.canvas_size;
    const x = ((event.clientX - rect.left) / rect.width) * n;
    const y = ((event.clientY - rect.top) / rect.height) * n;
    // clamp to the half-open canvas so drags can never leave a valid range
    return {
      x: Math.min(Math.max(x, 0), n - EPSILON),
      y: Math.min(Math.max(y, 0), n - EPSILON),
    };
  }

  private hitTest(x: number, y: number): { index: number; handle: boolean } | null {
    const glands = this.state.layout.glands;
    const selected = this.state.selectedGland;
    if (selected !== null) {
      const gland = glands[selected];
      if (gland !== undefined) {
        const hx = gland.x + gland.sx / 2;
        const hy = gland.y + gland.sy / 2;
        const reach = HANDLE_SIZE / SCALE;
        if (Math.abs(x - hx) <= reach && Math.abs(y - hy) <= reach) {
          return { index: selected, handle: true };
        }
      }
    }
    for (let i = glands.length - 1; i >= 0; i -= 1) {
      const gland = glands[i] as GlandSpec;
      if (
        Math.abs(x - gland.x) <= gland.sx / 2 &&
        Math.abs(y - gland.y) <= gland.sy / 2
      ) {
        return { index: i, handle: false };
      }
    }
    return null;
  }

  private onPointerDown(event: PointerEvent): void {
    const { x, y } = this.layoutPoint(event);
    const hit = this.hitTest(x, y);
    if (hit === null) {
      this.update(addGland(this.state, x, y));
      return;
    }
    this.update(selectGland(this.state, hit.index));
    const origin = this.state.layout.glands[hit.index] as GlandSpec;
    this.drag = {
      kind: hit.handle ? 'resize' : 'move',
      index: hit.index,
      startX: x,
      startY: y,
      origin: { ...origin },
      moved: false,
    };
    this.canvas.setPointerCapture(event.pointerId);
  }

  private onPointerMove(event: PointerEvent): void {
    if (this.drag === null) {
      return;
    }
    const { x, y } = this.layoutPoint(event);
    this.drag.moved = true;
    this.draft = this.draftFor(x, y);
    this.render();
  }

  private onPointerUp(event: PointerEvent): void {
    if (this.drag === null) {
      return;
    }
    const { x, y } = this.layoutPoint(event);
    const drag = this.drag;
    this.drag = null;
    this.draft = null;
    if (!drag.moved) {
      this.render();
      return;
    }
    if (drag.kind === 'move') {
      this.update(moveGland(this.state, drag.index, x - drag.startX, y - drag.startY));
    } else {
      const sx = Math.max(2 * (x - drag.origin.x), EPSILON);
      const sy = Math.max(2 * (y - drag.origin.y), EPSILON);
      this.update(resizeGland(this.state, drag.index, sx, sy));
    }
  }

  // uncommitted preview of the gesture in progress
  private draftFor(x: number, y: number): GlandLayout {
    const drag = this.drag as DragGesture;
    const layout: GlandLayout = {
      canvas_size: this.state.layout.canvas_size,
      glands: this.state.layout.glands.map((g) => ({ ...g })),
    };
    const target = layout.glands[drag.index] as GlandSpec;
    if (drag.kind === 'move') {
      target.x = drag.origin.x + (x - drag.startX);
      target.y = drag.origin.y + (y - drag.startY);
    } else {
      target.sx = Math.max(2 * (x - drag.origin.x), EPSILON);
      target.sy = Math.max(2 * (y - drag.origin.y), EPSILON);
    }
    return layout;
  }

  // --- generation ------------------------------------------------------------

  private async generate(): Promise<void> {
    const report = validateLayout(this.state.layout);
    if (!report.ok) {
      this.showViolations(report.violations);
      return;
    }
    this.statusLine.textContent = 'generating...';
    try {
      const response = await this.client.generate({
        layout: this.state.layout,
        seed: this.state.seedLocked ? this.state.seed : null,
      });
      this.update(applyResponse(this.state, response));
      this.statusLine.textContent =
        `seed ${response.seed_used}, checkpoint ${response.checkpoint_id}, ` +
        `${response.latency_ms.toFixed(1)} ms`;
    } catch (error) {
      if (error instanceof SupersededError) {
        return; // a newer submission took its place
      }
      if (error instanceof LayoutRejectedError) {
        this.showViolations(error.violations);
        return;
      }
      if (error instanceof ServiceUnavailableError) {
        this.showBanner('model not loaded; start the service with a checkpoint');
        return;
      }
      this.statusLine.textContent = String(error);
    }
  }

  private showViolations(violations: string[]): void {
    this.violationsBox.replaceChildren(
      ...violations.map((v) => el('div', 'violation', v)),
    );
    this.render();
  }

  private showBanner(message: string): void {
    this.banner.classList.remove('hidden');
    this.banner.replaceChildren(el('span', '', message));
    const retry = el('button', '', 'retry');
    retry.addEventListener('click', () => {
      this.banner.classList.add('hidden');
      void this.generate();
    });
    this.banner.append(retry);
  }

  // --- rendering ---------------------------------------------------------------

  private render(): void {
    const layout = this.draft ?? this.state.layout;
    const n = layout.canvas_size;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.fillStyle = '#fdf6f0';
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    layout.glands.forEach((gland, i) => {
      const box = bboxFromSpec(gland, n);
      const selected = i === this.state.selectedGland && this.draft === null;
      if (box !== null) {
        ctx.strokeStyle = selected ? '#c2410c' : '#9ca3af';
        ctx.setLineDash([4, 3]);
        ctx.strokeRect(
          box.x0 * SCALE,
          box.y0 * SCALE,
          (box.x1 - box.x0) * SCALE,
          (box.y1 - box.y0) * SCALE,
        );
        ctx.setLineDash([]);
      }
      ctx.beginPath();
      ctx.ellipse(
        gland.x * SCALE,
        gland.y * SCALE,
        (gland.sx / 2) * SCALE,
        (gland.sy / 2) * SCALE,
        0,
        0,
        2 * Math.PI,
      );
      ctx.fillStyle = selected ? 'rgba(194, 65, 12, 0.25)' : 'rgba(107, 114, 128, 0.2)';
      ctx.fill();
      ctx.strokeStyle = selected ? '#c2410c' : '#6b7280';
      ctx.stroke();
      if (selected) {
        ctx.fillStyle = '#c2410c';
        ctx.fillRect(
          (gland.x + gland.sx / 2) * SCALE - HANDLE_SIZE / 2,
          (gland.y + gland.sy / 2) * SCALE - HANDLE_SIZE / 2,
          HANDLE_SIZE,
          HANDLE_SIZE,
        );
      }
    });

    this.undoButton.disabled = !canUndo(this.state);
    this.redoButton.disabled = !canRedo(this.state);
    this.lockButton.textContent = this.state.seedLocked ? 'unlock seed' : 'lock seed';
    this.seedInput.value = String(this.state.seed);
    if (validateLayout(layout).ok) {
      this.violationsBox.replaceChildren();
    }
    this.renderResults();
  }

  private renderResults(): void {
    this.renderResult(this.current, this.state.lastResponse);
    this.renderResult(this.previous, this.state.previousResponse);
    this.renderDiff();
  }

  private renderResult(view: ResultView, response: typeof this.state.lastResponse): void {
    if (response === null) {
      view.image.removeAttribute('src');
      return;
    }
    view.image.src = `data:image/png;base64,${response.image}`;
    const n = this.state.layout.canvas_size;
    view.overlay.width = n;
    view.overlay.height = n;
    const ctx = view.overlay.getContext('2d');
    if (ctx === null) {
      return;
    }
    ctx.clearRect(0, 0, n, n);
    ctx.strokeStyle = '#22c55e';
    for (const box of response.bboxes) {
      ctx.strokeRect(box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0);
    }
  }

  // previous/current pixel difference, shown when a locked seed lets the two
  // results be compared like-for-like
  private renderDiff(): void {
    const { lastResponse, previousResponse } = this.state;
    const ctx = this.diffCanvas.getContext('2d');
    if (ctx === null || lastResponse === null || previousResponse === null) {
      return;
    }
    const n = this.state.layout.canvas_size;
    this.diffCanvas.width = n;
    this.diffCanvas.height = n;
    const a = new Image();
    const b = new Image();
    let loaded = 0;
    const draw = () => {
      loaded += 1;
      if (loaded < 2) {
        return;
      }
      const scratch = document.createElement('canvas');
      scratch.width = n;
      scratch.height = n;
      const sctx = scratch.getContext('2d');
      if (sctx === null) {
        return;
      }
      sctx.drawImage(a, 0, 0, n, n);
      const pa = sctx.getImageData(0, 0, n, n);
      sctx.clearRect(0, 0, n, n);
      sctx.drawImage(b, 0, 0, n, n);
      const pb = sctx.getImageData(0, 0, n, n);
      const out = ctx.createImageData(n, n);
      for (let i = 0; i < out.data.length; i += 4) {
        const delta =
          Math.abs((pa.data[i] ?? 0) - (pb.data[i] ?? 0)) +
          Math.abs((pa.data[i + 1] ?? 0) - (pb.data[i + 1] ?? 0)) +
          Math.abs((pa.data[i + 2] ?? 0) - (pb.data[i + 2] ?? 0));
        out.data[i] = Math.min(delta, 255);
        out.data[i + 1] = 0;
        out.data[i + 2] = 0;
        out.data[i + 3] = 255;
      }
      ctx.putImageData(out, 0, 0);
    };
    a.onload = draw;
    b.onload = draw;
    a.src = `data:image/png;base64,${previousResponse.image}`;
    b.src = `data:image/png;base64,${lastResponse.image}`;
  }

  // test/debug handle: current state snapshot
  snapshot(): EditorState {
    return this.state;
  }

  layoutChangedSince(other: GlandLayout): boolean {
    return !layoutsEqual(this.state.layout, other);
  }
}
