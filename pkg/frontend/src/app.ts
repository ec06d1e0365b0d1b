import { ConflictError, SessionApi } from "./api";
import { sceneToSvg } from "./scene";
import {
  SessionView,
  canAnswer,
  initialView,
  likertDone,
  progressLabel,
  sessionStarted,
  submitting,
  withEstimate,
  withQuery,
} from "./state";
import { CatalogEntry, Choice, LikertAnswers, SessionParams } from "./types";

export interface AppOptions {
  pollMs?: number;
}

const LIKERT_PROMPTS: [keyof LikertAnswers, string][] = [
  ["q1", "Likeability of the estimated arrangement"],
  ["q2", "Quality of the presented arrangements"],
  ["q3", "Ease of answering"],
  ["q4", "How quickly a preferred arrangement appeared"],
];

/** Interactive pairwise-comparison session over the HTTP API.

 All session truth lives on the server; this class only renders the latest
 responses and posts user actions. */
export class App {
  view: SessionView;
  private api: SessionApi;
  private root: HTMLElement;
  private pollMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private catalog: CatalogEntry[] = [];
  private pinnedW: number[] | null = null;
  private keyHandler: (e: KeyboardEvent) => void;

  constructor(root: HTMLElement, api: SessionApi, opts: AppOptions = {}) {
    this.root = root;
    this.api = api;
    this.pollMs = opts.pollMs ?? 1000;
    this.view = initialView("");
    this.keyHandler = (e: KeyboardEvent) => {
      if (e.key === "ArrowLeft") void this.answer("left");
      else if (e.key === "ArrowRight") void this.answer("right");
      else if (e.key === "s") void this.answer("skip");
    };
  }

  async start(params: SessionParams): Promise<void> {
    const sessionId = await this.api.createSession(params);
    this.view = initialView(sessionId);
    this.catalog = await this.api.getCatalog(sessionId);
    this.root.ownerDocument.addEventListener("keydown", this.keyHandler);
    this.render();
  }

  /** Rebuild the view for an existing session after a reload: the server
   owns all session truth, so two GETs restore everything. */
  async resume(sessionId: string): Promise<void> {
    this.view = sessionStarted(initialView(sessionId));
    this.root.ownerDocument.addEventListener("keydown", this.keyHandler);
    await this.fetchQuery();
    await this.refreshEstimate();
    if (this.view.phase !== "finished") this.startPolling();
  }

  /** Pick (or re-pick) the pre-selected reference before answering starts. */
  async pickReference(w: number[]): Promise<void> {
    if (this.view.phase !== "picking") {
      throw new Error("reference can only be picked before the session starts");
    }
    this.pinnedW = await this.api.pinReference(this.view.sessionId, w);
    this.render();
  }

  /** Leave the catalog and fetch the first query. */
  async beginSession(): Promise<void> {
    this.view = sessionStarted(this.view);
    await this.fetchQuery();
    this.startPolling();
  }

  async answer(choice: Choice): Promise<void> {
    if (!canAnswer(this.view) || this.view.query === null) return;
    const queryIndex = this.view.query.query_index;
    this.view = submitting(this.view);
    this.render();
    try {
      const resp = await this.api.answer(this.view.sessionId, choice, queryIndex);
      if (resp.next_available) {
        await this.fetchQuery();
      } else {
        await this.finish();
      }
    } catch (err) {
      if (err instanceof ConflictError) {
        await this.fetchQuery(); // stale query: re-sync without losing progress
        return;
      }
      throw err;
    }
  }

  async submitLikert(answers: LikertAnswers): Promise<void> {
    await this.api.submitLikert(this.view.sessionId, answers);
    this.view = likertDone(this.view);
    this.render();
  }

  async refreshEstimate(): Promise<void> {
    if (!this.view.sessionId) return;
    const est = await this.api.getEstimate(this.view.sessionId);
    this.view = withEstimate(this.view, est);
    this.render();
  }

  dispose(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
  }

  private async fetchQuery(): Promise<void> {
    const query = await this.api.getQuery(this.view.sessionId);
    this.view = withQuery(this.view, query);
    if (this.view.phase === "finished") {
      await this.finish();
      return;
    }
    this.render();
  }

  private async finish(): Promise<void> {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = null;
    await this.refreshEstimate();
  }

  private startPolling(): void {
    if (this.pollMs <= 0) return;
    this.pollTimer = setInterval(() => void this.refreshEstimate(), this.pollMs);
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const header = doc.createElement("header");
    const progress = doc.createElement("span");
    progress.id = "progress";
    progress.textContent = progressLabel(this.view);
    header.appendChild(progress);
    this.root.appendChild(header);

    if (this.view.phase === "picking") {
      this.root.appendChild(this.renderCatalog(doc));
      return;
    }
    if (this.view.query !== null) {
      this.root.appendChild(this.renderQuery(doc));
    }
    this.root.appendChild(this.renderEstimate(doc));
    if (this.view.phase === "finished" && !this.view.likertSubmitted) {
      this.root.appendChild(this.renderLikert(doc));
    }
    if (this.view.likertSubmitted) {
      const done = doc.createElement("p");
      done.id = "thanks";
      done.textContent = "Session complete. Thank you!";
      this.root.appendChild(done);
    }
  }

  private renderCatalog(doc: Document): HTMLElement {
    const panel = doc.createElement("section");
    panel.id = "catalog";
    const hint = doc.createElement("p");
    hint.textContent = "Pick your preferred arrangement, then start the session.";
    panel.appendChild(hint);
    for (const entry of this.catalog) {
      const cell = doc.createElement("button");
      cell.className = "catalog-entry";
      cell.dataset.w = JSON.stringify(entry.w);
      if (this.pinnedW && JSON.stringify(this.pinnedW) === JSON.stringify(entry.w)) {
        cell.classList.add("pinned");
      }
      cell.appendChild(sceneToSvg(entry.rendered, 90));
      cell.addEventListener("click", () => void this.pickReference(entry.w));
      panel.appendChild(cell);
    }
    const startBtn = doc.createElement("button");
    startBtn.id = "btn-start";
    startBtn.textContent = this.pinnedW ? "Start session" : "Start without a reference";
    startBtn.addEventListener("click", () => void this.beginSession());
    panel.appendChild(startBtn);
    return panel;
  }

  private renderQuery(doc: Document): HTMLElement {
    const panel = doc.createElement("section");
    panel.id = "query";
    const q = this.view.query!;
    const scenes = doc.createElement("div");
    scenes.className = "scenes";

    const left = doc.createElement("figure");
    left.id = "left-scene";
    if (q.left) left.appendChild(sceneToSvg(q.left));
    scenes.appendChild(left);

    if (q.reference) {
      const ref = doc.createElement("figure");
      ref.id = "reference-scene";
      ref.appendChild(sceneToSvg(q.reference, 140));
      const cap = doc.createElement("figcaption");
      cap.textContent = "your pick";
      ref.appendChild(cap);
      scenes.appendChild(ref);
    }

    const right = doc.createElement("figure");
    right.id = "right-scene";
    if (q.right) right.appendChild(sceneToSvg(q.right));
    scenes.appendChild(right);
    panel.appendChild(scenes);

    const controls = doc.createElement("div");
    controls.className = "controls";
    const disabled = !canAnswer(this.view);
    for (const [id, label, choice] of [
      ["btn-left", "I prefer the left one", "left"],
      ["btn-skip", "I don't like either", "skip"],
      ["btn-right", "I prefer the right one", "right"],
    ] as [string, string, Choice][]) {
      const btn = doc.createElement("button");
      btn.id = id;
      btn.textContent = label;
      btn.disabled = disabled;
      btn.addEventListener("click", () => void this.answer(choice));
      controls.appendChild(btn);
    }
    panel.appendChild(controls);
    return panel;
  }

  private renderEstimate(doc: Document): HTMLElement {
    const panel = doc.createElement("section");
    panel.id = "estimate";
    const est = this.view.estimate;
    if (est === null || est.w === null) {
      const empty = doc.createElement("p");
      empty.id = "estimate-empty";
      empty.textContent = "No estimate yet.";
      panel.appendChild(empty);
      return panel;
    }
    const label = doc.createElement("p");
    label.id = "estimate-w";
    label.textContent = `current estimate: (${est.w.map((v) => v.toFixed(2)).join(", ")})`;
    panel.appendChild(label);
    if (est.rendered) {
      const fig = doc.createElement("figure");
      fig.id = "estimate-scene";
      fig.appendChild(sceneToSvg(est.rendered, 160));
      panel.appendChild(fig);
    }
    panel.appendChild(this.renderSparkline(doc, est.trajectory));
    return panel;
  }

  private renderSparkline(doc: Document, trajectory: number[][]): SVGSVGElement {
    const ns = "http://www.w3.org/2000/svg";
    const svg = doc.createElementNS(ns, "svg") as SVGSVGElement;
    svg.id = "sparkline";
    const w = 160;
    const h = 40;
    svg.setAttribute("width", String(w));
    svg.setAttribute("height", String(h));
    if (trajectory.length >= 1) {
      const dims = trajectory[0].length;
      for (let d = 0; d < dims; d++) {
        const line = doc.createElementNS(ns, "polyline");
        const n = trajectory.length;
        const pts = trajectory.map((wv, k) => {
          const x = n > 1 ? (k / (n - 1)) * w : w / 2;
          const y = h - wv[d] * h;
          return `${x},${y}`;
        });
        line.setAttribute("points", pts.join(" "));
        line.setAttribute("fill", "none");
        line.setAttribute("stroke", ["#4477aa", "#aa7744", "#44aa77"][d % 3]);
        svg.appendChild(line);
      }
    }
    return svg;
  }

  private renderLikert(doc: Document): HTMLElement {
    const form = doc.createElement("form");
    form.id = "likert-form";
    const selects: Partial<Record<keyof LikertAnswers, HTMLSelectElement>> = {};
    for (const [key, prompt] of LIKERT_PROMPTS) {
      const row = doc.createElement("label");
      row.textContent = prompt;
      const select = doc.createElement("select");
      select.name = key;
      for (let v = 1; v <= 7; v++) {
        const opt = doc.createElement("option");
        opt.value = String(v);
        opt.textContent = String(v);
        select.appendChild(opt);
      }
      selects[key] = select;
      row.appendChild(select);
      form.appendChild(row);
    }
    const submit = doc.createElement("button");
    submit.id = "likert-submit";
    submit.type = "button";
    submit.textContent = "Submit ratings";
    submit.addEventListener("click", () => {
      const answers = Object.fromEntries(
        LIKERT_PROMPTS.map(([key]) => [key, Number(selects[key]!.value)]),
      ) as unknown as LikertAnswers;
      void this.submitLikert(answers);
    });
    form.appendChild(submit);
    return form;
  }
}
