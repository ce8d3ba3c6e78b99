import { describe, expect, it, vi } from "vitest";

import { TracePlayer } from "../src/player.js";
import { buildTrace, RecordingContext } from "./fixtures.js";

const WIDTH = 840;
const HEIGHT = 420;
const PPM = 80;
const GROUND_Y = HEIGHT - 60;

function makePlayer(trace = buildTrace(), options: Record<string, unknown> = {}) {
  const ctx = new RecordingContext();
  const player = new TracePlayer(ctx, WIDTH, HEIGHT, trace, {
    pixelsPerMeter: PPM,
    groundScreenY: GROUND_Y,
    ...options,
  });
  return { ctx, player };
}

describe("TracePlayer", () => {
  it("rejects empty traces", () => {
    const trace = buildTrace(1);
    trace.frames = [];
    expect(() => makePlayer(trace)).toThrow(/frames/);
  });

  it("601 frames at dt=1/60 and rate 1 complete in ~10 s", () => {
    const onComplete = vi.fn();
    const { player } = makePlayer(buildTrace(601), { onComplete });
    player.play();
    player.tick(0);
    player.tick(9_990); // just short of 600 frame periods
    expect(player.currentFrame).toBeLessThan(600);
    expect(onComplete).not.toHaveBeenCalled();
    player.tick(10_010);
    expect(player.currentFrame).toBe(600);
    expect(player.playing).toBe(false);
    expect(onComplete).toHaveBeenCalledTimes(1);
  });

  it("playback rate 2 halves the wall time", () => {
    const { player } = makePlayer(buildTrace(601));
    player.playbackRate = 2;
    player.play();
    player.tick(0);
    player.tick(5_010);
    expect(player.currentFrame).toBe(600);
  });

  it("completion fires only once", () => {
    const onComplete = vi.fn();
    const { player } = makePlayer(buildTrace(10), { onComplete });
    player.play();
    player.tick(0);
    player.tick(10_000);
    player.play();
    player.tick(10_001);
    player.tick(30_000);
    expect(onComplete).toHaveBeenCalledTimes(1);
    expect(player.hasCompletedOnce).toBe(true);
  });

  it("scrubbing to frame 300 renders exactly the stored frame-300 poses", () => {
    const trace = buildTrace(601);
    const { ctx, player } = makePlayer(trace);
    player.seek(300);

    const frame = trace.frames[300]!;
    const pelvisX = frame[0]![0]!;
    expect(ctx.boxes).toHaveLength(5);
    for (let body = 0; body < 5; body++) {
      const [x, y, angle] = frame[body]! as [number, number, number];
      const [hx, hy] = trace.body_half_extents[body]!;
      const box = ctx.boxes[body]!;
      // pixel poses derive from the stored values with no interpolation
      expect(box.translate[0]).toBe(WIDTH / 2 + (x - pelvisX) * PPM);
      expect(box.translate[1]).toBe(GROUND_Y - (y - trace.ground_y) * PPM);
      expect(box.rotate).toBe(-angle);
      expect(box.rect).toEqual([-hx * PPM, -hy * PPM, 2 * hx * PPM, 2 * hy * PPM]);
    }
  });

  it("paused render of frame 0 matches the initial pose", () => {
    const trace = buildTrace(601);
    const { ctx, player } = makePlayer(trace);
    player.seek(0);
    expect(player.playing).toBe(false);
    const pelvis = trace.frames[0]![0]!;
    expect(ctx.boxes[0]!.translate[1]).toBe(GROUND_Y - pelvis[1]! * PPM);
    // + 0 folds -0 onto 0; the stored angle at frame 0 is exactly zero
    expect(ctx.boxes[0]!.rotate + 0).toBe(-pelvis[2]! + 0);
  });

  it("seek clamps into [0, lastFrame]", () => {
    const { player } = makePlayer(buildTrace(20));
    player.seek(-5);
    expect(player.currentFrame).toBe(0);
    player.seek(9_999);
    expect(player.currentFrame).toBe(19);
  });

  it("camera keeps the pelvis centered", () => {
    const trace = buildTrace(601);
    const { player } = makePlayer(trace);
    expect(player.screenPose(0, 0).x).toBe(WIDTH / 2);
    expect(player.screenPose(600, 0).x).toBe(WIDTH / 2);
  });

  it("does not advance while paused", () => {
    const { player } = makePlayer(buildTrace(30));
    player.tick(0);
    player.tick(5_000);
    expect(player.currentFrame).toBe(0);
  });
});
