import { beforeEach, describe, expect, it, vi } from "vitest";

import { GalleryApi } from "../src/api.js";
import { VOTE_QUESTION, VotePanel } from "../src/voting.js";
import { jsonResponse, mockFetch } from "./fixtures.js";

beforeEach(() => {
  document.body.replaceChildren();
});

function panel() {
  const p = new VotePanel(new GalleryApi(), "sol-a", "token-1");
  document.body.appendChild(p.root);
  return p;
}

describe("VotePanel", () => {
  it("shows the single unbiased question", () => {
    const p = panel();
    expect(p.root.querySelector(".question")!.textContent).toBe(VOTE_QUESTION);
    expect(VOTE_QUESTION).toContain("natural and life-like");
  });

  it("voting is gated until one full playback", async () => {
    const { calls } = mockFetch({});
    const p = panel();
    expect(p.enabled).toBe(false);
    await p.vote(true);
    expect(calls).toHaveLength(0);
    p.enable();
    expect(p.enabled).toBe(true);
  });

  it("a yes vote posts 1 with the rater token and renders the returned score", async () => {
    const { calls } = mockFetch({
      "POST /api/solutions/sol-a/ratings": { mean: 0.875, count: 8, class: "good" },
    });
    const p = panel();
    p.enable();
    await p.vote(true);
    expect(calls).toHaveLength(1);
    expect(JSON.parse(String(calls[0]!.init!.body))).toEqual({
      value: 1,
      rater_token: "token-1",
    });
    expect(p.root.querySelector(".score")!.textContent).toBe(
      "crowd: 0.88 over 8 votes — good");
  });

  it("a no vote posts 0", async () => {
    const { calls } = mockFetch({
      "POST /api/solutions/sol-a/ratings": { mean: 0.0, count: 1, class: "poor" },
    });
    const p = panel();
    p.enable();
    await p.vote(false);
    expect(JSON.parse(String(calls[0]!.init!.body)).value).toBe(0);
  });

  it("re-voting updates rather than duplicates (server-confirmed count)", async () => {
    let count = 0;
    mockFetch({
      "POST /api/solutions/sol-a/ratings": async (_url: string, init?: RequestInit) => {
        count += 1;
        const body = JSON.parse(String(init!.body)) as { value: number };
        return jsonResponse({ mean: body.value, count: 1, class: body.value ? "good" : "poor" });
      },
    });
    const p = panel();
    p.enable();
    await p.vote(false);
    await p.vote(true);
    expect(count).toBe(2);
    expect(p.root.querySelector(".score")!.textContent).toBe(
      "crowd: 1.00 over 1 vote — good");
  });

  it("failures surface inline and the kept vote can be retried", async () => {
    let failures = 1;
    const { calls } = mockFetch({
      "POST /api/solutions/sol-a/ratings": async () => {
        if (failures > 0) {
          failures -= 1;
          return jsonResponse(
            { status: 500, code: "boom", message: "server exploded" }, 500);
        }
        return jsonResponse({ mean: 1, count: 1, class: "good" });
      },
    });
    const p = panel();
    p.enable();
    await p.vote(true);
    const error = p.root.querySelector<HTMLElement>(".vote-error")!;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("server exploded");

    error.querySelector("button")!.click();
    await vi.waitFor(() => {
      expect(p.root.querySelector(".score")!.textContent).toContain("1.00");
    });
    expect(calls).toHaveLength(2);
    expect(p.root.querySelector<HTMLElement>(".vote-error")!.hidden).toBe(true);
  });
});
