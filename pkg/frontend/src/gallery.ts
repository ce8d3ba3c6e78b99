import type { GalleryApi } from "./api.js";
import type { SolutionSummary } from "./types.js";

export interface GalleryCallbacks {
  onSelect(summary: SolutionSummary): void;
}

function card(summary: SolutionSummary, callbacks: GalleryCallbacks): HTMLElement {
  const el = document.createElement("article");
  el.className = "card";
  el.dataset["solutionId"] = summary.id;

  const title = document.createElement("h3");
  title.textContent = summary.id;
  el.appendChild(title);

  const meta = document.createElement("p");
  meta.className = "meta";
  meta.textContent =
    `${summary.skeleton} · ${summary.mechanistic_fitness.toFixed(2)} m`;
  el.appendChild(meta);

  const badge = document.createElement("span");
  badge.className = `badge badge-${summary.class}`;
  badge.textContent =
    summary.class === "unrated"
      ? "unrated"
      : `${summary.class} · ${summary.mean.toFixed(2)} (${summary.count})`;
  el.appendChild(badge);

  const watch = document.createElement("button");
  watch.textContent = "watch";
  watch.addEventListener("click", () => callbacks.onSelect(summary));
  el.appendChild(watch);
  return el;
}

/**
 * Renders the paged solution list into `container`. Network failures show
 * a banner with a retry button; pages append via a "load more" control.
 */
export class GalleryView {
  constructor(
    private readonly container: HTMLElement,
    private readonly api: GalleryApi,
    private readonly callbacks: GalleryCallbacks,
  ) {}

  async load(): Promise<void> {
    this.container.replaceChildren();
    await this.loadPage(null);
  }

  private async loadPage(cursor: string | null): Promise<void> {
    this.container.querySelector(".load-more")?.remove();
    this.container.querySelector(".error-banner")?.remove();
    try {
      const page = await this.api.listSolutions(cursor);
      if (!page.items.length && !this.container.querySelector(".card")) {
        const empty = document.createElement("p");
        empty.className = "empty";
        empty.textContent = "no solutions yet";
        this.container.appendChild(empty);
        return;
      }
      for (const summary of page.items) {
        this.container.appendChild(card(summary, this.callbacks));
      }
      if (page.next_cursor) {
        const more = document.createElement("button");
        more.className = "load-more";
        more.textContent = "load more";
        const next = page.next_cursor;
        more.addEventListener("click", () => void this.loadPage(next));
        this.container.appendChild(more);
      }
    } catch (err) {
      const banner = document.createElement("div");
      banner.className = "error-banner";
      const message = document.createElement("span");
      message.textContent = `could not load solutions: ${(err as Error).message}`;
      banner.appendChild(message);
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => void this.loadPage(cursor));
      banner.appendChild(retry);
      this.container.appendChild(banner);
    }
  }
}
