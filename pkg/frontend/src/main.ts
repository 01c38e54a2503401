/**
 * Annotator single-page app: canvas rendering and event wiring around the
 * pure editor modules.  Keyboard map (also shown in the in-app help panel):
 *
 *   click        add polygon vertex        1..9   select class
 *   dblclick /   close polygon             S      save
 *   Enter
 *   Escape       discard open polygon      drag vertex   move it
 *   right-click  delete vertex             wheel  zoom   space+drag pan
 */

import { ApiClient, ImageInfo } from "./api.js";
import {
  canvasToNormalized,
  fitTransform,
  distance2,
  normalizedToCanvas,
  pan,
  Point,
  ViewTransform,
  zoomAround,
} from "./geometry.js";
import { classPalette, ClassEntry } from "./palette.js";
import { EditorState } from "./state.js";
import { resolveConflictDiscardLocal, resolveConflictKeepLocal, saveAnnotations } from "./controller.js";

const VERTEX_HIT_RADIUS_PX = 6;

const httpFn = (url: string, init?: RequestInit) => fetch(url, init);
const api = new ApiClient(httpFn);
const state = new EditorState();

let palette: ClassEntry[] = [];
let images: ImageInfo[] = [];
let transform: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };
let baseImage: HTMLImageElement | null = null;
let overlayImage: HTMLImageElement | null = null;
let panning = false;
let spaceHeld = false;
let dragTarget: { annotation: number; vertex: number } | null = null;
let lastPointer: Point = { x: 0, y: 0 };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("canvas");
const ctx = canvas.getContext("2d")!;

function statusMessage(text: string, isError = false): void {
  const bar = el<HTMLDivElement>("status");
  bar.textContent = text;
  bar.className = isError ? "status error" : "status";
}

function render(): void {
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#202027";
  ctx.fillRect(0, 0, width, height);
  if (!baseImage || state.stem === null) return;

  ctx.save();
  ctx.imageSmoothingEnabled = transform.scale < 3;
  ctx.setTransform(transform.scale, 0, 0, transform.scale, transform.offsetX, transform.offsetY);
  ctx.drawImage(baseImage, 0, 0);
  if (overlayImage && state.overlay && state.overlay.visible) {
    ctx.globalAlpha = state.overlay.opacity;
    ctx.drawImage(overlayImage, 0, 0);
    ctx.globalAlpha = 1;
  }
  ctx.restore();

  const w = state.imageWidth;
  const h = state.imageHeight;
  for (let i = 0; i < state.committed.length; i++) {
    const annotation = state.committed[i];
    const entry = palette[annotation.classId % Math.max(palette.length, 1)];
    const color = entry ? entry.color : "#ffffff";
    ctx.beginPath();
    annotation.vertices.forEach(([nx, ny], k) => {
      const p = normalizedToCanvas(transform, { x: nx, y: ny }, w, h);
      if (k === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    ctx.closePath();
    ctx.fillStyle = color + "33";
    ctx.fill();
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.stroke();
    for (const [nx, ny] of annotation.vertices) {
      const p = normalizedToCanvas(transform, { x: nx, y: ny }, w, h);
      ctx.beginPath();
      ctx.arc(p.x, p.y, 3.5, 0, Math.PI * 2);
      ctx.fillStyle = color;
      ctx.fill();
    }
  }

  if (state.inProgress && state.inProgress.length > 0) {
    ctx.beginPath();
    state.inProgress.forEach(([nx, ny], k) => {
      const p = normalizedToCanvas(transform, { x: nx, y: ny }, w, h);
      if (k === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    const cursor = normalizedToCanvas(
      transform,
      canvasToNormalized(transform, lastPointer, w, h),
      w,
      h,
    );
    ctx.lineTo(cursor.x, cursor.y);
    ctx.strokeStyle = "#ffd400";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([5, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
    for (const [nx, ny] of state.inProgress) {
      const p = normalizedToCanvas(transform, { x: nx, y: ny }, w, h);
      ctx.beginPath();
      ctx.arc(p.x, p.y, 3.5, 0, Math.PI * 2);
      ctx.fillStyle = "#ffd400";
      ctx.fill();
    }
  }
}

function refreshControls(): void {
  el<HTMLButtonElement>("save").disabled = !state.canSave();
  el<HTMLDivElement>("conflict-dialog").hidden = !state.conflict;
  if (state.warning) statusMessage(state.warning, true);
  else if (state.conflict) statusMessage("save conflict: another client saved first", true);
  else if (state.dirty) statusMessage("unsaved changes");
  else if (state.stem) statusMessage(`viewing ${state.stem} (revision ${state.baseRevision})`);
  render();
}

function hitVertex(p: Point): { annotation: number; vertex: number } | null {
  const w = state.imageWidth;
  const h = state.imageHeight;
  for (let i = state.committed.length - 1; i >= 0; i--) {
    const verts = state.committed[i].vertices;
    for (let k = 0; k < verts.length; k++) {
      const c = normalizedToCanvas(transform, { x: verts[k][0], y: verts[k][1] }, w, h);
      if (distance2(c, p) <= VERTEX_HIT_RADIUS_PX * VERTEX_HIT_RADIUS_PX) {
        return { annotation: i, vertex: k };
      }
    }
  }
  return null;
}

function canvasPoint(event: MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

async function loadPreview(): Promise<void> {
  if (!state.stem || !state.overlay) {
    overlayImage = null;
    render();
    return;
  }
  const url = api.previewUrl(state.stem, state.overlay.method, state.overlay.params);
  const img = new Image();
  img.onload = () => {
    overlayImage = img;
    render();
  };
  img.onerror = () => {
    overlayImage = null;
    statusMessage("preview failed: check the method parameters", true);
  };
  img.src = url;
}

function collectPreviewParams(method: string): Record<string, string> {
  const params: Record<string, string> = {};
  if (method === "fixed") params.t = el<HTMLInputElement>("pv-t").value;
  if (method === "region-grow") {
    params.seed = el<HTMLInputElement>("pv-seed").value;
    params.tau = el<HTMLInputElement>("pv-tau").value;
  }
  if (method === "canny") {
    params.sigma = el<HTMLInputElement>("pv-sigma").value;
    params.t_low = el<HTMLInputElement>("pv-tlow").value;
    params.t_high = el<HTMLInputElement>("pv-thigh").value;
  }
  return params;
}

async function openImage(info: ImageInfo): Promise<void> {
  const snapshot = await api.getAnnotations(info.stem);
  state.loadImage(info.stem, info.width, info.height, snapshot.revision, snapshot.annotations);
  overlayImage = null;
  const img = new Image();
  img.onload = () => {
    baseImage = img;
    transform = fitTransform(canvas.width, canvas.height, info.width, info.height);
    refreshControls();
  };
  img.src = api.imageUrl(info.stem);
  document
    .querySelectorAll("#image-list li")
    .forEach((node) => node.classList.toggle("active", node.textContent === info.stem));
}

function buildSidebar(): void {
  const list = el<HTMLUListElement>("image-list");
  list.innerHTML = "";
  for (const info of images) {
    const item = document.createElement("li");
    item.textContent = info.stem;
    item.onclick = () => void openImage(info);
    list.appendChild(item);
  }
  const paletteBox = el<HTMLDivElement>("palette");
  paletteBox.innerHTML = "";
  palette.forEach((entry) => {
    const button = document.createElement("button");
    button.className = "class-btn";
    button.style.borderColor = entry.color;
    button.textContent = entry.shortcut ? `${entry.shortcut} ${entry.name}` : entry.name;
    button.onclick = () => {
      state.selectClass(entry.id);
      document
        .querySelectorAll(".class-btn")
        .forEach((node, index) => node.classList.toggle("active", index === entry.id));
    };
    paletteBox.appendChild(button);
  });
  (paletteBox.firstChild as HTMLButtonElement | null)?.classList.add("active");
}

function wireEvents(): void {
  canvas.addEventListener("mousedown", (event) => {
    const p = canvasPoint(event);
    lastPointer = p;
    if (event.button === 1 || spaceHeld) {
      panning = true;
      event.preventDefault();
      return;
    }
    if (event.button === 0 && state.inProgress === null) {
      const hit = hitVertex(p);
      if (hit) {
        dragTarget = hit;
        event.preventDefault();
      }
    }
  });

  canvas.addEventListener("mousemove", (event) => {
    const p = canvasPoint(event);
    if (panning) {
      transform = pan(transform, p.x - lastPointer.x, p.y - lastPointer.y);
      lastPointer = p;
      render();
      return;
    }
    lastPointer = p;
    if (dragTarget) {
      state.moveVertex(
        dragTarget.annotation,
        dragTarget.vertex,
        canvasToNormalized(transform, p, state.imageWidth, state.imageHeight),
      );
      refreshControls();
      return;
    }
    if (state.inProgress) render();
  });

  window.addEventListener("mouseup", () => {
    panning = false;
    if (dragTarget) {
      dragTarget = null;
      refreshControls();
    }
  });

  canvas.addEventListener("click", (event) => {
    if (spaceHeld || dragTarget || state.stem === null) return;
    if (event.detail > 1) return; // part of a double-click
    const hit = state.inProgress === null ? hitVertex(canvasPoint(event)) : null;
    if (hit) return;
    state.addVertex(
      canvasToNormalized(transform, canvasPoint(event), state.imageWidth, state.imageHeight),
    );
    refreshControls();
  });

  canvas.addEventListener("dblclick", (event) => {
    event.preventDefault();
    state.closePolygon();
    refreshControls();
  });

  canvas.addEventListener("contextmenu", (event) => {
    event.preventDefault();
    const hit = hitVertex(canvasPoint(event));
    if (hit) {
      state.deleteVertex(hit.annotation, hit.vertex);
      refreshControls();
    }
  });

  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    transform = zoomAround(transform, factor, canvasPoint(event));
    render();
  });

  window.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === " ") {
      spaceHeld = true;
      event.preventDefault();
    } else if (event.key === "Enter") {
      state.closePolygon();
      refreshControls();
    } else if (event.key === "Escape") {
      state.discardInProgress();
      refreshControls();
    } else if (event.key.toLowerCase() === "s") {
      void doSave();
    } else if (/^[1-9]$/.test(event.key)) {
      const id = Number(event.key) - 1;
      if (id < palette.length) {
        state.selectClass(id);
        document
          .querySelectorAll(".class-btn")
          .forEach((node, index) => node.classList.toggle("active", index === id));
      }
    }
  });
  window.addEventListener("keyup", (event) => {
    if (event.key === " ") spaceHeld = false;
  });

  el<HTMLButtonElement>("save").onclick = () => void doSave();
  el<HTMLButtonElement>("conflict-keep").onclick = async () => {
    await resolveConflictKeepLocal(state, api);
    refreshControls();
  };
  el<HTMLButtonElement>("conflict-discard").onclick = async () => {
    await resolveConflictDiscardLocal(state, api);
    refreshControls();
  };
  el<HTMLButtonElement>("help-toggle").onclick = () => {
    const panel = el<HTMLDivElement>("help-panel");
    panel.hidden = !panel.hidden;
  };

  const methodSelect = el<HTMLSelectElement>("pv-method");
  methodSelect.onchange = () => {
    document.querySelectorAll<HTMLElement>(".pv-group").forEach((node) => {
      node.hidden = node.dataset.method !== methodSelect.value;
    });
  };
  el<HTMLButtonElement>("pv-apply").onclick = () => {
    const method = methodSelect.value;
    state.setOverlay({
      method,
      params: collectPreviewParams(method),
      opacity: Number(el<HTMLInputElement>("pv-opacity").value) / 100,
      visible: true,
    });
    void loadPreview();
  };
  el<HTMLButtonElement>("pv-clear").onclick = () => {
    state.setOverlay(null);
    overlayImage = null;
    render();
  };
  el<HTMLInputElement>("pv-opacity").oninput = () => {
    if (state.overlay) {
      state.overlay.opacity = Number(el<HTMLInputElement>("pv-opacity").value) / 100;
      render();
    }
  };
}

async function doSave(): Promise<void> {
  if (!state.canSave()) return;
  await saveAnnotations(state, api);
  refreshControls();
}

async function start(): Promise<void> {
  const dataset = await api.getDataset();
  palette = classPalette(dataset.classes);
  images = await api.listImages();
  buildSidebar();
  wireEvents();
  if (images.length > 0) await openImage(images[0]);
  refreshControls();
}

window.addEventListener("load", () => {
  void start().catch((err) => statusMessage(`failed to start: ${err}`, true));
});
