import type { CrowdScore, SolutionDetail, SolutionPage, TraceDoc } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function asError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, code, message);
}

/** Thin typed client over the documented /api endpoints. */
export class GalleryApi {
  readonly base: string;

  constructor(base = "") {
    this.base = base.replace(/\/+$/, "");
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) throw await asError(response);
    return (await response.json()) as T;
  }

  listSolutions(cursor?: string | null, skeleton?: string): Promise<SolutionPage> {
    const params = new URLSearchParams();
    if (cursor) params.set("cursor", cursor);
    if (skeleton) params.set("skeleton", skeleton);
    const query = params.toString();
    return this.getJson<SolutionPage>(`/api/solutions${query ? "?" + query : ""}`);
  }

  getSolution(id: string): Promise<SolutionDetail> {
    return this.getJson<SolutionDetail>(`/api/solutions/${encodeURIComponent(id)}`);
  }

  getTrace(id: string): Promise<TraceDoc> {
    return this.getJson<TraceDoc>(`/api/solutions/${encodeURIComponent(id)}/trace`);
  }

  async submitRating(id: string, value: number, raterToken: string): Promise<CrowdScore> {
    const response = await fetch(
      `${this.base}/api/solutions/${encodeURIComponent(id)}/ratings`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ value, rater_token: raterToken }),
      },
    );
    if (!response.ok) throw await asError(response);
    return (await response.json()) as CrowdScore;
  }
}
