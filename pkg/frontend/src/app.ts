import { GalleryApi } from "./api.js";
import { GalleryView } from "./gallery.js";
import { getRaterToken } from "./identity.js";
import { TracePlayer } from "./player.js";
import type { SolutionSummary } from "./types.js";
import { VotePanel } from "./voting.js";

const CANVAS_WIDTH = 840;
const CANVAS_HEIGHT = 420;

function apiBaseFromLocation(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? "";
}

class App {
  private readonly api = new GalleryApi(apiBaseFromLocation());
  private readonly raterToken = getRaterToken();
  private readonly galleryScreen: HTMLElement;
  private readonly playerScreen: HTMLElement;
  private rafHandle = 0;

  constructor(root: HTMLElement) {
    this.galleryScreen = document.createElement("section");
    this.galleryScreen.id = "gallery";
    this.playerScreen = document.createElement("section");
    this.playerScreen.id = "player";
    this.playerScreen.hidden = true;
    root.appendChild(this.galleryScreen);
    root.appendChild(this.playerScreen);
  }

  async start(): Promise<void> {
    const view = new GalleryView(this.galleryScreen, this.api, {
      onSelect: (summary) => void this.openPlayer(summary),
    });
    await view.load();
  }

  private closePlayer(): void {
    cancelAnimationFrame(this.rafHandle);
    this.playerScreen.hidden = true;
    this.playerScreen.replaceChildren();
    this.galleryScreen.hidden = false;
  }

  private async openPlayer(summary: SolutionSummary): Promise<void> {
    this.galleryScreen.hidden = true;
    this.playerScreen.hidden = false;
    this.playerScreen.replaceChildren();

    const back = document.createElement("button");
    back.textContent = "← gallery";
    back.addEventListener("click", () => this.closePlayer());
    this.playerScreen.appendChild(back);

    const heading = document.createElement("h2");
    heading.textContent =
      `${summary.id} — ${summary.skeleton}, ${summary.mechanistic_fitness.toFixed(2)} m`;
    this.playerScreen.appendChild(heading);

    let trace;
    try {
      trace = await this.api.getTrace(summary.id);
    } catch (err) {
      const banner = document.createElement("div");
      banner.className = "error-banner";
      banner.textContent = `could not load trace: ${(err as Error).message}`;
      this.playerScreen.appendChild(banner);
      return;
    }

    const canvas = document.createElement("canvas");
    canvas.width = CANVAS_WIDTH;
    canvas.height = CANVAS_HEIGHT;
    this.playerScreen.appendChild(canvas);
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");

    const votePanel = new VotePanel(this.api, summary.id, this.raterToken);

    const controls = document.createElement("div");
    controls.className = "controls";

    const playButton = document.createElement("button");
    playButton.textContent = "play";
    const scrub = document.createElement("input");
    scrub.type = "range";
    scrub.min = "0";
    scrub.value = "0";
    const frameLabel = document.createElement("span");

    const player = new TracePlayer(ctx, CANVAS_WIDTH, CANVAS_HEIGHT, trace, {
      onFrame: (frame) => {
        scrub.value = String(frame);
        frameLabel.textContent = `frame ${frame}/${player.lastFrame}`;
      },
      onComplete: () => votePanel.enable(),
    });
    scrub.max = String(player.lastFrame);
    frameLabel.textContent = `frame 0/${player.lastFrame}`;

    playButton.addEventListener("click", () => {
      if (player.playing) {
        player.pause();
        playButton.textContent = "play";
      } else {
        player.play();
        playButton.textContent = "pause";
      }
    });
    scrub.addEventListener("input", () => {
      player.pause();
      playButton.textContent = "play";
      player.seek(Number(scrub.value));
    });

    const rate = document.createElement("select");
    for (const value of ["0.25", "0.5", "1", "2"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = `${value}x`;
      if (value === "1") option.selected = true;
      rate.appendChild(option);
    }
    rate.addEventListener("change", () => {
      player.playbackRate = Number(rate.value);
    });

    controls.append(playButton, scrub, frameLabel, rate);
    this.playerScreen.appendChild(controls);
    this.playerScreen.appendChild(votePanel.root);

    player.seek(0);
    const loop = (now: number) => {
      player.tick(now);
      if (player.playing) {
        playButton.textContent = "pause";
      } else {
        playButton.textContent = "play";
      }
      this.rafHandle = requestAnimationFrame(loop);
    };
    this.rafHandle = requestAnimationFrame(loop);
  }
}

const rootElement = document.getElementById("app");
if (rootElement) {
  void new App(rootElement).start();
}
