/**
 * DOM shell for the review loop: one card, verdict buttons, keyboard
 * shortcuts (a accept, 1/2/3 correct to positive/neutral/negative,
 * s skip), live queue counters, and a completion screen with the export
 * link. All state comes through the ReviewController.
 */
import type { CurationApiLike, Polarity } from "./api";
import { highlightHtml } from "./highlight";
import { ReviewController } from "./review";
import type { ReviewState } from "./review";

const CORRECT_KEYS: Record<string, Polarity> = {
  "1": "positive",
  "2": "neutral",
  "3": "negative",
};

export interface MountedApp {
  controller: ReviewController;
  /** Detach document-level listeners (used by tests and hot reload). */
  dispose(): void;
}

export function mountApp(
  root: HTMLElement,
  api: CurationApiLike,
  reviewer: string,
): MountedApp {
  const controller = new ReviewController(api, reviewer);

  root.innerHTML = `
    <header>
      <h1>polarity curation</h1>
      <div id="counts" class="counts"></div>
      <div class="who">reviewing as <strong id="reviewer-name"></strong></div>
    </header>
    <main id="main"></main>
    <footer>
      <kbd>a</kbd> accept
      <kbd>1</kbd>/<kbd>2</kbd>/<kbd>3</kbd> correct to positive/neutral/negative
      <kbd>s</kbd> skip
    </footer>
  `;
  const counts = root.querySelector<HTMLElement>("#counts")!;
  const main = root.querySelector<HTMLElement>("#main")!;
  root.querySelector<HTMLElement>("#reviewer-name")!.textContent = reviewer;

  function render(state: ReviewState): void {
    if (state.stats) {
      const s = state.stats;
      counts.textContent =
        `${s.pending} pending | ${s.accepted} accepted | ` +
        `${s.corrected} corrected | ${s.skipped} skipped | ` +
        `${state.decidedThisSession} this session`;
    } else {
      counts.textContent = "";
    }

    if (state.phase === "loading") {
      main.innerHTML = `<p class="status">loading...</p>`;
      return;
    }
    if (state.phase === "error") {
      main.innerHTML = `
        <p class="status error" id="message"></p>
        <button id="retry">retry</button>`;
      main.querySelector<HTMLElement>("#message")!.textContent = state.message ?? "request failed";
      main.querySelector<HTMLButtonElement>("#retry")!.onclick = () => void controller.start();
      return;
    }
    if (state.phase === "done") {
      main.innerHTML = `
        <section class="complete">
          <h2>queue complete</h2>
          <p>Nothing left to review.</p>
          <p><a id="export-link" href="/api/export" download="curated.jsonl">download the curated dataset</a></p>
        </section>`;
      return;
    }

    const item = state.item!;
    main.innerHTML = `
      <section class="card">
        <p class="item-meta"><span id="item-id"></span> &middot; provisional
          <span id="provisional" class="badge"></span></p>
        <p class="khmer-text" id="item-text"></p>
        <p class="note" id="message"></p>
        <div class="actions">
          <button id="accept" class="accept">accept <kbd>a</kbd></button>
          <button id="correct-positive">positive <kbd>1</kbd></button>
          <button id="correct-neutral">neutral <kbd>2</kbd></button>
          <button id="correct-negative">negative <kbd>3</kbd></button>
          <button id="skip" class="skip">skip <kbd>s</kbd></button>
        </div>
      </section>`;
    main.querySelector<HTMLElement>("#item-id")!.textContent = item.item_id;
    const badge = main.querySelector<HTMLElement>("#provisional")!;
    badge.textContent = item.provisional_label;
    badge.classList.add(item.provisional_label);
    main.querySelector<HTMLElement>("#item-text")!.innerHTML = highlightHtml(
      item.text,
      item.rationale_matches ?? [],
    );
    main.querySelector<HTMLElement>("#message")!.textContent = state.message ?? "";
    main.querySelector<HTMLButtonElement>("#accept")!.onclick = () => void controller.decide("accept");
    main.querySelector<HTMLButtonElement>("#skip")!.onclick = () => void controller.decide("skip");
    for (const label of ["positive", "neutral", "negative"] as Polarity[]) {
      main.querySelector<HTMLButtonElement>(`#correct-${label}`)!.onclick = () =>
        void controller.decide("correct", label);
    }
  }

  function onKey(ev: KeyboardEvent): void {
    if (ev.ctrlKey || ev.metaKey || ev.altKey) return;
    const target = ev.target as HTMLElement | null;
    if (target && ("value" in target || target.isContentEditable)) return;
    if (ev.key === "a") void controller.decide("accept");
    else if (ev.key === "s") void controller.decide("skip");
    else if (ev.key in CORRECT_KEYS) void controller.decide("correct", CORRECT_KEYS[ev.key]);
    else return;
    ev.preventDefault();
  }
  root.ownerDocument.addEventListener("keydown", onKey);

  const unsubscribe = controller.subscribe(render);
  void controller.start();
  return {
    controller,
    dispose() {
      root.ownerDocument.removeEventListener("keydown", onKey);
      unsubscribe();
    },
  };
}
