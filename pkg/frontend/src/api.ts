/**
 * Typed client for the annotation service JSON API.  The HTTP function is
 * injectable so tests can run the client against an in-process fake server.
 */

import { Annotation, SavePayload } from "./state.js";

export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
}

export type HttpFn = (url: string, init?: RequestInit) => Promise<HttpResponse>;

export interface ImageInfo {
  stem: string;
  width: number;
  height: number;
  instance_count: number;
  revision: number;
}

export interface DatasetInfo {
  classes: string[];
  image_count: number;
}

export interface AnnotationsSnapshot {
  revision: number;
  annotations: Annotation[];
}

export type SaveResult =
  | { kind: "saved"; revision: number }
  | { kind: "conflict" }
  | { kind: "invalid"; details: string[] }
  | { kind: "error"; message: string };

interface WireAnnotation {
  class_id: number;
  vertices: [number, number][];
}

function fromWire(raw: WireAnnotation): Annotation {
  return { classId: raw.class_id, vertices: raw.vertices.map((v) => [v[0], v[1]]) };
}

export class ApiClient {
  constructor(
    private readonly http: HttpFn,
    readonly base: string = "",
  ) {}

  private async getJson(path: string): Promise<unknown> {
    const response = await this.http(this.base + path);
    if (response.status !== 200) {
      const body = (await response.json().catch(() => ({}))) as { error?: string };
      throw new Error(body.error ?? `request failed with status ${response.status}`);
    }
    return response.json();
  }

  async getDataset(): Promise<DatasetInfo> {
    return (await this.getJson("/api/dataset")) as DatasetInfo;
  }

  async listImages(): Promise<ImageInfo[]> {
    return (await this.getJson("/api/images")) as ImageInfo[];
  }

  async getAnnotations(stem: string): Promise<AnnotationsSnapshot> {
    const raw = (await this.getJson(`/api/annotations/${encodeURIComponent(stem)}`)) as {
      revision: number;
      annotations: WireAnnotation[];
    };
    return { revision: raw.revision, annotations: raw.annotations.map(fromWire) };
  }

  async putAnnotations(stem: string, payload: SavePayload): Promise<SaveResult> {
    let response: HttpResponse;
    try {
      response = await this.http(`${this.base}/api/annotations/${encodeURIComponent(stem)}`, {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      return { kind: "error", message: err instanceof Error ? err.message : String(err) };
    }
    if (response.status === 200) {
      const body = (await response.json()) as { revision: number };
      return { kind: "saved", revision: body.revision };
    }
    if (response.status === 409) return { kind: "conflict" };
    const body = (await response.json().catch(() => ({}))) as {
      error?: string;
      details?: string[];
    };
    if (response.status === 400) return { kind: "invalid", details: body.details ?? [] };
    return { kind: "error", message: body.error ?? `status ${response.status}` };
  }

  imageUrl(stem: string): string {
    return `${this.base}/api/images/${encodeURIComponent(stem)}`;
  }

  previewUrl(stem: string, method: string, params: Record<string, string>): string {
    const query = new URLSearchParams({ method, ...params });
    return `${this.base}/api/preview/${encodeURIComponent(stem)}?${query.toString()}`;
  }
}
