/** Save/conflict workflow glue between the editor state and the API. */

import { ApiClient, SaveResult } from "./api.js";
import { EditorState } from "./state.js";

export async function saveAnnotations(state: EditorState, api: ApiClient): Promise<SaveResult> {
  if (!state.canSave() || state.stem === null) {
    return { kind: "error", message: "nothing to save" };
  }
  state.markSaveStarted();
  const result = await api.putAnnotations(state.stem, state.payload());
  switch (result.kind) {
    case "saved":
      state.markSaveSuccess(result.revision);
      break;
    case "conflict":
      state.markConflict();
      break;
    case "invalid":
      state.markSaveFailed(`rejected: ${result.details.join("; ")}`);
      break;
    case "error":
      state.markSaveFailed(`save failed (${result.message}); edits kept, retry when ready`);
      break;
  }
  return result;
}

/** 409 resolution, "keep mine": rebase onto the server revision and save again. */
export async function resolveConflictKeepLocal(
  state: EditorState,
  api: ApiClient,
): Promise<SaveResult> {
  if (state.stem === null) return { kind: "error", message: "no image loaded" };
  const server = await api.getAnnotations(state.stem);
  state.resolveConflictReapply(server.revision, server.annotations);
  return saveAnnotations(state, api);
}

/** 409 resolution, "take theirs": drop local edits, adopt the server state. */
export async function resolveConflictDiscardLocal(
  state: EditorState,
  api: ApiClient,
): Promise<void> {
  if (state.stem === null) return;
  const server = await api.getAnnotations(state.stem);
  state.resolveConflictDiscard(server.revision, server.annotations);
}
