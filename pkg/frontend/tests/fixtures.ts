import type { Context2D } from "../src/player.js";
import type { SolutionSummary, TraceDoc } from "../src/types.js";

/** Walker-shaped trace whose poses are a deterministic function of the
 * frame index, so any frame is recognizably distinct. */
export function buildTrace(frameCount = 601, bodies = 5, dt = 1 / 60): TraceDoc {
  const frames: number[][][] = [];
  for (let k = 0; k < frameCount; k++) {
    const frame: number[][] = [];
    for (let b = 0; b < bodies; b++) {
      frame.push([
        0.01 * k + 0.1 * b,            // x drifts right
        1.0 + 0.05 * Math.sin(k / 10) + 0.2 * b,
        0.001 * k - 0.05 * b,          // slow spin
      ]);
    }
    frames.push(frame);
  }
  return {
    schema_version: 1,
    skeleton_name: "walker",
    dt,
    body_half_extents: [[0.25, 0.125], [0.04, 0.225], [0.04, 0.225], [0.04, 0.225], [0.04, 0.225]],
    ground_y: 0,
    frames,
    terminated_early: false,
    termination_frame: null,
  };
}

export function summaries3(): SolutionSummary[] {
  return [
    { id: "sol-a", skeleton: "walker", created_at: "2026-01-01T00:00:00Z",
      mechanistic_fitness: 12.5, mean: 0.9, count: 10, class: "good" },
    { id: "sol-b", skeleton: "walker", created_at: "2026-01-02T00:00:00Z",
      mechanistic_fitness: 4.25, mean: 0.2, count: 5, class: "poor" },
    { id: "sol-c", skeleton: "hopper", created_at: "2026-01-03T00:00:00Z",
      mechanistic_fitness: 7.0, mean: 0.0, count: 0, class: "unrated" },
  ];
}

export interface RecordedBox {
  translate: [number, number];
  rotate: number;
  rect: [number, number, number, number];
}

/** Recording stand-in for the 2D context: captures each drawn box with the
 * transform that was active when fillRect ran. */
export class RecordingContext implements Context2D {
  boxes: RecordedBox[] = [];
  clears = 0;
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  private stack: Array<{ tx: number; ty: number; rot: number }> = [];
  private tx = 0;
  private ty = 0;
  private rot = 0;

  clearRect(): void {
    this.clears += 1;
    this.boxes = [];
  }

  save(): void {
    this.stack.push({ tx: this.tx, ty: this.ty, rot: this.rot });
  }

  restore(): void {
    const prev = this.stack.pop();
    if (prev) {
      this.tx = prev.tx;
      this.ty = prev.ty;
      this.rot = prev.rot;
    }
  }

  translate(x: number, y: number): void {
    this.tx += x;
    this.ty += y;
  }

  rotate(angle: number): void {
    this.rot += angle;
  }

  fillRect(x: number, y: number, w: number, h: number): void {
    this.boxes.push({
      translate: [this.tx, this.ty],
      rotate: this.rot,
      rect: [x, y, w, h],
    });
  }

  strokeRect(): void {}
  beginPath(): void {}
  moveTo(): void {}
  lineTo(): void {}
  stroke(): void {}
}

type FetchHandler = (url: string, init?: RequestInit) => Promise<Response>;

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Route-table fetch mock: handlers keyed by "METHOD path". */
export function mockFetch(routes: Record<string, FetchHandler | unknown>): {
  calls: Array<{ url: string; init?: RequestInit }>;
} {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const handler = routes[`${method} ${path}`];
    if (handler === undefined) {
      return jsonResponse({ status: 404, code: "not_found", message: `no route ${path}` }, 404);
    }
    if (typeof handler === "function") {
      return (handler as FetchHandler)(url, init);
    }
    return jsonResponse(handler);
  }) as typeof fetch;
  return { calls };
}
