import { beforeEach, describe, expect, it } from "vitest";

import { EditorState } from "../src/state.js";
import { classPalette, PALETTE_COLORS } from "../src/palette.js";

const TABLE_CLASSES = ["carpal", "fracture", "metacarpal", "phalanx", "radius", "ulna"];

let state: EditorState;

beforeEach(() => {
  state = new EditorState();
  state.loadImage("xray0", 1280, 1280, 0, []);
});

describe("drawing", () => {
  it("three clicks and close commit a triangle with the selected class", () => {
    state.selectClass(4);
    state.addVertex({ x: 0.1, y: 0.1 });
    state.addVertex({ x: 0.5, y: 0.1 });
    state.addVertex({ x: 0.3, y: 0.6 });
    expect(state.closePolygon()).toBe(true);
    expect(state.committed).toHaveLength(1);
    expect(state.committed[0].classId).toBe(4);
    expect(state.committed[0].vertices).toHaveLength(3);
    expect(state.dirty).toBe(true);
  });

  it("closing with two vertices warns and keeps the polygon open", () => {
    state.addVertex({ x: 0.1, y: 0.1 });
    state.addVertex({ x: 0.5, y: 0.1 });
    expect(state.closePolygon()).toBe(false);
    expect(state.warning).toMatch(/3 vertices/);
    expect(state.inProgress).toHaveLength(2);
    expect(state.committed).toHaveLength(0);
  });

  it("escape discards the open polygon", () => {
    state.addVertex({ x: 0.1, y: 0.1 });
    state.discardInProgress();
    expect(state.inProgress).toBeNull();
    expect(state.dirty).toBe(false);
  });

  it("vertices are clamped into [0, 1] on input", () => {
    state.addVertex({ x: -0.25, y: 1.75 });
    expect(state.inProgress![0]).toEqual([0, 1]);
  });
});

describe("vertex editing", () => {
  beforeEach(() => {
    state.addVertex({ x: 0.1, y: 0.1 });
    state.addVertex({ x: 0.5, y: 0.1 });
    state.addVertex({ x: 0.3, y: 0.6 });
    state.addVertex({ x: 0.2, y: 0.4 });
    state.closePolygon();
  });

  it("moveVertex clamps into bounds", () => {
    state.moveVertex(0, 0, { x: 2.0, y: -1.0 });
    expect(state.committed[0].vertices[0]).toEqual([1, 0]);
  });

  it("deleteVertex refuses to drop under three vertices", () => {
    expect(state.deleteVertex(0, 0)).toBe(true);
    expect(state.deleteVertex(0, 0)).toBe(false);
    expect(state.warning).toMatch(/3 vertices/);
    expect(state.committed[0].vertices).toHaveLength(3);
  });
});

describe("save enablement invariant", () => {
  it("never enables save while a polygon is open or invalid", () => {
    expect(state.canSave()).toBe(false); // nothing changed yet
    state.addVertex({ x: 0.1, y: 0.1 });
    expect(state.canSave()).toBe(false); // open 1-vertex polygon
    state.addVertex({ x: 0.5, y: 0.1 });
    state.closePolygon(); // refused, still open
    expect(state.canSave()).toBe(false);
    state.addVertex({ x: 0.3, y: 0.6 });
    state.closePolygon();
    expect(state.canSave()).toBe(true); // valid committed polygon, dirty
    state.markSaveStarted();
    expect(state.canSave()).toBe(false); // save in flight
    state.markSaveSuccess(1);
    expect(state.canSave()).toBe(false); // clean again
  });

  it("every committed polygon always satisfies the label invariants", () => {
    const actions: (() => void)[] = [
      () => state.addVertex({ x: Math.random() * 2 - 0.5, y: Math.random() * 2 - 0.5 }),
      () => state.closePolygon(),
      () => state.discardInProgress(),
      () => state.moveVertex(0, 0, { x: Math.random() * 3 - 1, y: Math.random() }),
      () => state.deleteVertex(0, 0),
      () => state.deleteAnnotation(state.committed.length - 1),
    ];
    for (let i = 0; i < 2000; i++) {
      actions[Math.floor(Math.random() * actions.length)]();
      for (const a of state.committed) {
        expect(a.vertices.length).toBeGreaterThanOrEqual(3);
        for (const [x, y] of a.vertices) {
          expect(x).toBeGreaterThanOrEqual(0);
          expect(x).toBeLessThanOrEqual(1);
          expect(y).toBeGreaterThanOrEqual(0);
          expect(y).toBeLessThanOrEqual(1);
        }
      }
      if (state.canSave()) {
        expect(state.inProgress).toBeNull();
        expect(state.dirty).toBe(true);
      }
    }
  });
});

describe("dirty tracking", () => {
  it("dirty is true iff state differs from the last ack", () => {
    state.addVertex({ x: 0.1, y: 0.1 });
    state.addVertex({ x: 0.5, y: 0.1 });
    state.addVertex({ x: 0.3, y: 0.6 });
    state.closePolygon();
    expect(state.dirty).toBe(true);
    state.deleteAnnotation(0); // undo the change entirely
    expect(state.dirty).toBe(false);
  });

  it("loadImage resets dirty and clears any overlay", () => {
    state.setOverlay({ method: "canny", params: {}, opacity: 0.5, visible: true });
    state.addVertex({ x: 0.1, y: 0.1 });
    state.loadImage("xray1", 640, 640, 3, []);
    expect(state.dirty).toBe(false);
    expect(state.overlay).toBeNull();
    expect(state.inProgress).toBeNull();
    expect(state.baseRevision).toBe(3);
  });
});

describe("palette", () => {
  it("one entry per class in index order with distinct colours", () => {
    const entries = classPalette(TABLE_CLASSES);
    expect(entries.map((e) => e.name)).toEqual(TABLE_CLASSES);
    expect(entries.map((e) => e.id)).toEqual([0, 1, 2, 3, 4, 5]);
    const colors = new Set(entries.map((e) => e.color));
    expect(colors.size).toBe(TABLE_CLASSES.length);
  });

  it("shortcuts are 1..9", () => {
    const entries = classPalette(TABLE_CLASSES);
    expect(entries[0].shortcut).toBe("1");
    expect(entries[5].shortcut).toBe("6");
    const many = classPalette(Array.from({ length: 12 }, (_, i) => `c${i}`));
    expect(many[8].shortcut).toBe("9");
    expect(many[9].shortcut).toBeNull();
  });

  it("selecting a class assigns it to the next polygon", () => {
    const entries = classPalette(TABLE_CLASSES);
    state.selectClass(entries[3].id);
    state.addVertex({ x: 0.1, y: 0.1 });
    state.addVertex({ x: 0.2, y: 0.1 });
    state.addVertex({ x: 0.2, y: 0.2 });
    state.closePolygon();
    expect(state.committed[0].classId).toBe(3);
  });

  it("palette colors are a fixed set", () => {
    expect(new Set(PALETTE_COLORS).size).toBe(PALETTE_COLORS.length);
  });
});
