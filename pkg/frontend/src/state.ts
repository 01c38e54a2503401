/**
 * Editor state: committed annotations (a mirror of the server state plus
 * local edits), the in-progress polygon, revision bookkeeping, and the
 * preview-overlay settings.
 *
 * All geometry is normalized the moment it enters the state, so the canvas
 * transform can never corrupt saved coordinates.  Committed annotations
 * always satisfy the label invariants (>= 3 vertices, coordinates in
 * [0, 1]); every mutation path either clamps or refuses, which is what
 * keeps Save from ever being enabled with an invalid polygon.
 */

import { clamp01, Point } from "./geometry.js";

export type Vertex = [number, number];

export interface Annotation {
  classId: number;
  vertices: Vertex[];
}

export interface SavePayload {
  base_revision: number;
  annotations: { class_id: number; vertices: [number, number][] }[];
}

export interface OverlaySettings {
  method: string;
  params: Record<string, string>;
  opacity: number;
  visible: boolean;
}

export function annotationsEqual(a: readonly Annotation[], b: readonly Annotation[]): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i].classId !== b[i].classId) return false;
    if (a[i].vertices.length !== b[i].vertices.length) return false;
    for (let j = 0; j < a[i].vertices.length; j++) {
      if (a[i].vertices[j][0] !== b[i].vertices[j][0]) return false;
      if (a[i].vertices[j][1] !== b[i].vertices[j][1]) return false;
    }
  }
  return true;
}

function cloneAnnotations(list: readonly Annotation[]): Annotation[] {
  return list.map((a) => ({ classId: a.classId, vertices: a.vertices.map((v) => [v[0], v[1]] as Vertex) }));
}

export class EditorState {
  stem: string | null = null;
  imageWidth = 0;
  imageHeight = 0;
  baseRevision = 0;
  selectedClass = 0;
  committed: Annotation[] = [];
  /** Vertices of the polygon being drawn, or null when not drawing. */
  inProgress: Vertex[] | null = null;
  saving = false;
  /** Set when a save bounced with 409; cleared by conflict resolution. */
  conflict = false;
  warning: string | null = null;
  overlay: OverlaySettings | null = null;

  private lastAcked: Annotation[] = [];

  /** True iff local committed state differs from the last server ack. */
  get dirty(): boolean {
    return !annotationsEqual(this.committed, this.lastAcked);
  }

  /** Save is allowed only with real changes, no save in flight, no open
   * polygon (an open polygon under 3 vertices is invalid by definition),
   * and no unresolved conflict. */
  canSave(): boolean {
    return (
      this.stem !== null &&
      this.dirty &&
      !this.saving &&
      this.inProgress === null &&
      !this.conflict
    );
  }

  loadImage(
    stem: string,
    width: number,
    height: number,
    revision: number,
    annotations: readonly Annotation[],
  ): void {
    this.stem = stem;
    this.imageWidth = width;
    this.imageHeight = height;
    this.baseRevision = revision;
    this.committed = cloneAnnotations(annotations);
    this.lastAcked = cloneAnnotations(annotations);
    this.inProgress = null;
    this.saving = false;
    this.conflict = false;
    this.warning = null;
    this.overlay = null; // switching images clears any stale overlay
  }

  selectClass(id: number): void {
    this.selectedClass = id;
  }

  /** Append a vertex (normalized, clamped into [0, 1]); starts a polygon. */
  addVertex(p: Point): void {
    const v: Vertex = [clamp01(p.x), clamp01(p.y)];
    if (this.inProgress === null) this.inProgress = [];
    this.inProgress.push(v);
    this.warning = null;
  }

  /** Close the open polygon; refuses (with a warning) under 3 vertices. */
  closePolygon(): boolean {
    if (this.inProgress === null) return false;
    if (this.inProgress.length < 3) {
      this.warning = "a polygon needs at least 3 vertices";
      return false;
    }
    this.committed.push({ classId: this.selectedClass, vertices: this.inProgress });
    this.inProgress = null;
    return true;
  }

  discardInProgress(): void {
    this.inProgress = null;
    this.warning = null;
  }

  moveVertex(annotation: number, vertex: number, p: Point): void {
    const a = this.committed[annotation];
    if (!a || vertex < 0 || vertex >= a.vertices.length) return;
    a.vertices[vertex] = [clamp01(p.x), clamp01(p.y)];
  }

  /** Remove a vertex; refuses when the polygon would drop under 3. */
  deleteVertex(annotation: number, vertex: number): boolean {
    const a = this.committed[annotation];
    if (!a || vertex < 0 || vertex >= a.vertices.length) return false;
    if (a.vertices.length <= 3) {
      this.warning = "cannot delete: a polygon needs at least 3 vertices";
      return false;
    }
    a.vertices.splice(vertex, 1);
    return true;
  }

  deleteAnnotation(index: number): void {
    if (index >= 0 && index < this.committed.length) this.committed.splice(index, 1);
  }

  payload(): SavePayload {
    return {
      base_revision: this.baseRevision,
      annotations: this.committed.map((a) => ({
        class_id: a.classId,
        vertices: a.vertices.map((v) => [v[0], v[1]] as [number, number]),
      })),
    };
  }

  markSaveStarted(): void {
    this.saving = true;
  }

  markSaveSuccess(revision: number): void {
    this.saving = false;
    this.baseRevision = revision;
    this.lastAcked = cloneAnnotations(this.committed);
  }

  /** Network or server failure: edits are retained and Save stays enabled. */
  markSaveFailed(message: string): void {
    this.saving = false;
    this.warning = message;
  }

  markConflict(): void {
    this.saving = false;
    this.conflict = true;
  }

  /** Conflict resolution: drop local edits, adopt the server state. */
  resolveConflictDiscard(revision: number, server: readonly Annotation[]): void {
    this.baseRevision = revision;
    this.committed = cloneAnnotations(server);
    this.lastAcked = cloneAnnotations(server);
    this.conflict = false;
  }

  /** Conflict resolution: keep local polygons, rebase onto the server
   * revision so the next save can win. */
  resolveConflictReapply(revision: number, server: readonly Annotation[]): void {
    this.baseRevision = revision;
    this.lastAcked = cloneAnnotations(server);
    this.conflict = false;
  }

  setOverlay(settings: OverlaySettings | null): void {
    this.overlay = settings;
  }
}
