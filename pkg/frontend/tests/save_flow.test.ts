import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { saveAnnotations, resolveConflictDiscardLocal, resolveConflictKeepLocal } from "../src/controller.js";
import { EditorState } from "../src/state.js";
import { FakeServer } from "./fake_server.js";

const CLASSES = ["carpal", "fracture", "metacarpal", "phalanx", "radius", "ulna"];

function freshClient(): { server: FakeServer; api: ApiClient; state: EditorState } {
  const server = new FakeServer(CLASSES, ["xray0"]);
  const api = new ApiClient(server.http);
  const state = new EditorState();
  state.loadImage("xray0", 1280, 1280, 0, []);
  return { server, api, state };
}

function drawTriangle(state: EditorState, classId = 0, jitter = 0): void {
  state.selectClass(classId);
  state.addVertex({ x: 0.1 + jitter, y: 0.1 });
  state.addVertex({ x: 0.5, y: 0.1 + jitter });
  state.addVertex({ x: 0.3, y: 0.6 });
  state.closePolygon();
}

describe("save round trip", () => {
  it("draw, save, reload reproduces polygons within 1e-6", async () => {
    const { server, api, state } = freshClient();
    // awkward float coordinates to exercise the 6-decimal quantization
    state.addVertex({ x: 0.123456789, y: 0.987654321 });
    state.addVertex({ x: 1 / 3, y: 2 / 7 });
    state.addVertex({ x: 0.5000004999, y: 0.0000001 });
    state.closePolygon();
    const sent = state.payload().annotations;
    const result = await saveAnnotations(state, api);
    expect(result.kind).toBe("saved");
    expect(state.baseRevision).toBe(1);
    expect(state.dirty).toBe(false);

    const reloaded = new EditorState();
    const snapshot = await api.getAnnotations("xray0");
    reloaded.loadImage("xray0", 1280, 1280, snapshot.revision, snapshot.annotations);
    expect(reloaded.committed).toHaveLength(1);
    for (let k = 0; k < 3; k++) {
      expect(Math.abs(reloaded.committed[0].vertices[k][0] - sent[0].vertices[k][0])).toBeLessThanOrEqual(1e-6);
      expect(Math.abs(reloaded.committed[0].vertices[k][1] - sent[0].vertices[k][1])).toBeLessThanOrEqual(1e-6);
    }
  });

  it("re-serializing the reloaded state matches within 1e-6 per coordinate", async () => {
    const { api, state } = freshClient();
    for (let i = 0; i < 5; i++) drawTriangle(state, i, i * 0.017);
    const first = state.payload();
    await saveAnnotations(state, api);
    const snapshot = await api.getAnnotations("xray0");
    const reloaded = new EditorState();
    reloaded.loadImage("xray0", 1280, 1280, snapshot.revision, snapshot.annotations);
    const second = reloaded.payload();
    expect(second.annotations).toHaveLength(first.annotations.length);
    first.annotations.forEach((a, i) => {
      expect(second.annotations[i].class_id).toBe(a.class_id);
      a.vertices.forEach(([x, y], k) => {
        expect(Math.abs(second.annotations[i].vertices[k][0] - x)).toBeLessThanOrEqual(1e-6);
        expect(Math.abs(second.annotations[i].vertices[k][1] - y)).toBeLessThanOrEqual(1e-6);
      });
    });
  });

  it("network failure keeps edits and the retry affordance", async () => {
    const { server, api, state } = freshClient();
    drawTriangle(state);
    server.failNetwork = true;
    const result = await saveAnnotations(state, api);
    expect(result.kind).toBe("error");
    expect(state.committed).toHaveLength(1); // no silent data loss
    expect(state.dirty).toBe(true);
    expect(state.canSave()).toBe(true); // retry affordance
    server.failNetwork = false;
    const retry = await saveAnnotations(state, api);
    expect(retry.kind).toBe("saved");
  });

  it("server-side validation failures surface without losing edits", async () => {
    const { api, state } = freshClient();
    drawTriangle(state, 0);
    // bypass the client-side guard to prove the 400 path is handled
    state.committed[0].classId = 17;
    const result = await saveAnnotations(state, api);
    expect(result.kind).toBe("invalid");
    expect(state.warning).toMatch(/out of range/);
    expect(state.committed).toHaveLength(1);
  });
});

describe("two-client conflict scenario", () => {
  it("second save from the same base revision gets 409; keep-mine rebases and wins", async () => {
    const server = new FakeServer(CLASSES, ["xray0"]);
    const api = new ApiClient(server.http);

    const alice = new EditorState();
    const bob = new EditorState();
    alice.loadImage("xray0", 1280, 1280, 0, []);
    bob.loadImage("xray0", 1280, 1280, 0, []);

    drawTriangle(alice, 1);
    drawTriangle(bob, 2, 0.05);

    expect((await saveAnnotations(alice, api)).kind).toBe("saved");
    const bobResult = await saveAnnotations(bob, api);
    expect(bobResult.kind).toBe("conflict");
    expect(bob.conflict).toBe(true);
    expect(bob.canSave()).toBe(false); // blocked until resolved
    expect(bob.committed).toHaveLength(1); // local edits retained

    const retry = await resolveConflictKeepLocal(bob, api);
    expect(retry.kind).toBe("saved");
    expect(bob.baseRevision).toBe(2);
    const onServer = await api.getAnnotations("xray0");
    expect(onServer.annotations[0].classId).toBe(2); // bob's polygon won
  });

  it("discard-mine adopts the other client's save", async () => {
    const server = new FakeServer(CLASSES, ["xray0"]);
    const api = new ApiClient(server.http);

    const alice = new EditorState();
    const bob = new EditorState();
    alice.loadImage("xray0", 1280, 1280, 0, []);
    bob.loadImage("xray0", 1280, 1280, 0, []);

    drawTriangle(alice, 3);
    drawTriangle(bob, 5, 0.02);
    await saveAnnotations(alice, api);
    expect((await saveAnnotations(bob, api)).kind).toBe("conflict");

    await resolveConflictDiscardLocal(bob, api);
    expect(bob.conflict).toBe(false);
    expect(bob.baseRevision).toBe(1);
    expect(bob.committed).toHaveLength(1);
    expect(bob.committed[0].classId).toBe(3); // alice's polygon adopted
    expect(bob.dirty).toBe(false);
  });

  it("revisions increase by exactly one per successful save", async () => {
    const { api, state } = freshClient();
    for (let round = 1; round <= 4; round++) {
      drawTriangle(state, round % CLASSES.length, round * 0.01);
      const result = await saveAnnotations(state, api);
      expect(result.kind).toBe("saved");
      expect(state.baseRevision).toBe(round);
    }
  });
});
