import type { GalleryApi } from "./api.js";
import type { CrowdScore } from "./types.js";

/** The one question raters answer; no further judging standards on purpose. */
export const VOTE_QUESTION = "Is this animation natural and life-like?";

export interface VotePanelOptions {
  onScore?(score: CrowdScore): void;
}

/**
 * Binary vote widget. Disabled until `enable()` is called (after one full
 * playback); a vote posts 1 or 0 with the rater token and shows the score
 * the service returns. Failures keep the vote and offer a retry.
 */
export class VotePanel {
  readonly root: HTMLElement;
  private readonly yesButton: HTMLButtonElement;
  private readonly noButton: HTMLButtonElement;
  private readonly scoreLine: HTMLElement;
  private readonly errorLine: HTMLElement;
  private pendingValue: number | null = null;
  private inFlight = false;

  constructor(
    private readonly api: GalleryApi,
    private readonly solutionId: string,
    private readonly raterToken: string,
    private readonly options: VotePanelOptions = {},
  ) {
    this.root = document.createElement("div");
    this.root.className = "vote-panel";

    const question = document.createElement("p");
    question.className = "question";
    question.textContent = VOTE_QUESTION;
    this.root.appendChild(question);

    this.yesButton = document.createElement("button");
    this.yesButton.textContent = "yes";
    this.yesButton.disabled = true;
    this.yesButton.addEventListener("click", () => void this.vote(true));
    this.root.appendChild(this.yesButton);

    this.noButton = document.createElement("button");
    this.noButton.textContent = "no";
    this.noButton.disabled = true;
    this.noButton.addEventListener("click", () => void this.vote(false));
    this.root.appendChild(this.noButton);

    this.scoreLine = document.createElement("p");
    this.scoreLine.className = "score";
    this.root.appendChild(this.scoreLine);

    this.errorLine = document.createElement("div");
    this.errorLine.className = "vote-error";
    this.errorLine.hidden = true;
    this.root.appendChild(this.errorLine);
  }

  get enabled(): boolean {
    return !this.yesButton.disabled;
  }

  /** Called once the trace has played through to its final frame. */
  enable(): void {
    this.yesButton.disabled = false;
    this.noButton.disabled = false;
  }

  async vote(natural: boolean): Promise<void> {
    if (!this.enabled || this.inFlight) return;
    this.pendingValue = natural ? 1 : 0;
    await this.submitPending();
  }

  async retry(): Promise<void> {
    if (this.pendingValue !== null) await this.submitPending();
  }

  private async submitPending(): Promise<void> {
    if (this.pendingValue === null) return;
    this.inFlight = true;
    try {
      const score = await this.api.submitRating(
        this.solutionId, this.pendingValue, this.raterToken);
      this.pendingValue = null;
      this.errorLine.hidden = true;
      this.errorLine.replaceChildren();
      this.showScore(score);
      this.options.onScore?.(score);
    } catch (err) {
      this.errorLine.hidden = false;
      this.errorLine.replaceChildren();
      const message = document.createElement("span");
      message.textContent = `vote failed: ${(err as Error).message} `;
      this.errorLine.appendChild(message);
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => void this.retry());
      this.errorLine.appendChild(retry);
    } finally {
      this.inFlight = false;
    }
  }

  private showScore(score: CrowdScore): void {
    this.scoreLine.textContent =
      `crowd: ${score.mean.toFixed(2)} over ${score.count} ` +
      `vote${score.count === 1 ? "" : "s"} — ${score.class}`;
  }
}
