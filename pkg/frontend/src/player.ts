import type { TraceDoc } from "./types.js";

/** The slice of CanvasRenderingContext2D the renderer needs; tests inject a
 * recording stub through the same structural type. */
export interface Context2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface PlayerOptions {
  pixelsPerMeter?: number;
  /** Screen y of the ground line; the vertical framing is fixed. */
  groundScreenY?: number;
  onFrame?: (frame: number) => void;
  onComplete?: () => void;
}

export interface ScreenPose {
  x: number;
  y: number;
  angle: number;
}

const BODY_FILL = "#3a7ca5";
const BODY_EDGE = "#16425b";
const GROUND_COLOR = "#555";

/**
 * Replays a recorded trace on a 2D canvas. No simulation happens here:
 * frame k is drawn from the stored poses of frame k, the clock advances
 * frames at exactly trace.dt / playback_rate, and the camera follows the
 * first body (the pelvis) horizontally.
 */
export class TracePlayer {
  readonly trace: TraceDoc;
  currentFrame = 0;
  playing = false;
  playbackRate = 1.0;
  private completedOnce = false;
  private accumulatedMs = 0;
  private lastTickMs: number | null = null;

  constructor(
    private readonly ctx: Context2D,
    private readonly width: number,
    private readonly height: number,
    trace: TraceDoc,
    private readonly options: PlayerOptions = {},
  ) {
    if (!trace.frames.length) throw new Error("trace has no frames");
    this.trace = trace;
  }

  get frameCount(): number {
    return this.trace.frames.length;
  }

  get lastFrame(): number {
    return this.frameCount - 1;
  }

  get hasCompletedOnce(): boolean {
    return this.completedOnce;
  }

  private get pixelsPerMeter(): number {
    return this.options.pixelsPerMeter ?? 80;
  }

  private get groundScreenY(): number {
    return this.options.groundScreenY ?? this.height - 60;
  }

  /** Horizontal camera: pelvis x maps to the canvas center. */
  private cameraX(frame: number): number {
    const pelvis = this.trace.frames[frame]![0]!;
    return pelvis[0]!;
  }

  /** Exact screen-space pose of one body at one frame (pixels, radians). */
  screenPose(frame: number, body: number): ScreenPose {
    const pose = this.trace.frames[frame]![body]!;
    const scale = this.pixelsPerMeter;
    return {
      x: this.width / 2 + (pose[0]! - this.cameraX(frame)) * scale,
      y: this.groundScreenY - (pose[1]! - this.trace.ground_y) * scale,
      angle: -pose[2]!, // canvas y points down
    };
  }

  play(): void {
    if (this.currentFrame >= this.lastFrame) this.seek(0);
    this.playing = true;
    this.lastTickMs = null;
  }

  pause(): void {
    this.playing = false;
    this.lastTickMs = null;
    this.accumulatedMs = 0;
  }

  seek(frame: number): void {
    const clamped = Math.min(Math.max(Math.trunc(frame), 0), this.lastFrame);
    this.currentFrame = clamped;
    this.accumulatedMs = 0;
    this.render();
    this.options.onFrame?.(this.currentFrame);
  }

  /** Advance the playback clock; call with a monotonic timestamp. */
  tick(nowMs: number): void {
    if (!this.playing) return;
    if (this.lastTickMs === null) {
      this.lastTickMs = nowMs;
      this.render();
      return;
    }
    this.accumulatedMs += nowMs - this.lastTickMs;
    this.lastTickMs = nowMs;
    const frameMs = (this.trace.dt * 1000) / this.playbackRate;
    let advanced = false;
    while (this.accumulatedMs >= frameMs && this.currentFrame < this.lastFrame) {
      this.accumulatedMs -= frameMs;
      this.currentFrame += 1;
      advanced = true;
    }
    if (advanced) {
      this.render();
      this.options.onFrame?.(this.currentFrame);
    }
    if (this.currentFrame >= this.lastFrame) {
      this.playing = false;
      if (!this.completedOnce) {
        this.completedOnce = true;
        this.options.onComplete?.();
      }
    }
  }

  render(): void {
    const ctx = this.ctx;
    const scale = this.pixelsPerMeter;
    ctx.clearRect(0, 0, this.width, this.height);

    ctx.strokeStyle = GROUND_COLOR;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(0, this.groundScreenY);
    ctx.lineTo(this.width, this.groundScreenY);
    ctx.stroke();

    const frame = this.currentFrame;
    for (let body = 0; body < this.trace.body_half_extents.length; body++) {
      const [hx, hy] = this.trace.body_half_extents[body]!;
      const pose = this.screenPose(frame, body);
      ctx.save();
      ctx.translate(pose.x, pose.y);
      ctx.rotate(pose.angle);
      ctx.fillStyle = BODY_FILL;
      ctx.fillRect(-hx * scale, -hy * scale, 2 * hx * scale, 2 * hy * scale);
      ctx.strokeStyle = BODY_EDGE;
      ctx.lineWidth = 1;
      ctx.strokeRect(-hx * scale, -hy * scale, 2 * hx * scale, 2 * hy * scale);
      ctx.restore();
    }
  }
}
