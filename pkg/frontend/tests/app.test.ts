import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { SessionApi } from "../src/api";
import { App } from "../src/app";
import { RenderedScene } from "../src/types";

function scene(tag: string): RenderedScene {
  return {
    view: "oblique",
    reference: false,
    primitives: [
      { item_id: 0, fill: tag, vertices: [[0, 0], [0.01, 0], [0.01, 0.01]], z_order: 0 },
    ],
  };
}

/** In-memory stand-in for the session service. */
class FakeServer {
  n = 5;
  answered: string[] = [];
  reference: number[] | null = null;
  likert: Record<string, number>[] = [];
  outstanding = false;
  queryIndex = 0;
  conflictsToInject = 0;

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    const json = (data: unknown, status = 200) =>
      new Response(JSON.stringify(data), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (url.endsWith("/sessions") && init?.method === "POST") {
      return json({ session_id: "fake01" });
    }
    if (url.endsWith("/catalog")) {
      return json({
        candidates: [0, 0.5, 1].map((w, i) => ({
          index: i,
          w: [w],
          rendered: scene(`cand${i}`),
        })),
      });
    }
    if (url.endsWith("/reference")) {
      this.reference = body.w;
      return json({ pinned: true, index: 0, w: body.w });
    }
    if (url.endsWith("/query")) {
      if (this.queryIndex >= this.n) return json({ done: true, query_index: this.n });
      this.outstanding = true;
      return json({
        done: false,
        query_index: this.queryIndex,
        left: scene("left"),
        right: scene("right"),
        reference: this.reference
          ? { ...scene("ref"), reference: true }
          : null,
      });
    }
    if (url.endsWith("/answer")) {
      if (this.conflictsToInject > 0) {
        this.conflictsToInject -= 1;
        return json({ detail: "stale query" }, 409);
      }
      if (!this.outstanding || body.query_index !== this.queryIndex) {
        return json({ detail: "conflict" }, 409);
      }
      this.outstanding = false;
      this.answered.push(body.choice);
      this.queryIndex += 1;
      return json({ accepted: true, next_available: this.queryIndex < this.n });
    }
    if (url.endsWith("/estimate")) {
      const any = this.queryIndex > 0;
      return json({
        w: any ? [0.5] : null,
        rendered: any ? scene("estimate") : null,
        trajectory: Array.from({ length: this.queryIndex }, () => [0.5]),
        query_index: this.queryIndex,
        n_queries: this.n,
        done: this.queryIndex >= this.n,
      });
    }
    if (url.endsWith("/likert")) {
      this.likert.push(body);
      return json({ stored: true, count: this.likert.length });
    }
    return json({ detail: "not found" }, 404);
  };
}

let server: FakeServer;
let app: App;
let root: HTMLElement;

beforeEach(() => {
  server = new FakeServer();
  globalThis.fetch = server.fetch as typeof fetch;
  root = document.createElement("div");
  document.body.appendChild(root);
  app = new App(root, new SessionApi(""), { pollMs: 0 });
});

afterEach(() => {
  app.dispose();
  root.remove();
});

function click(id: string): void {
  const el = root.querySelector<HTMLButtonElement>(`#${id}`);
  if (!el) throw new Error(`no element #${id}`);
  el.click();
}

async function settle(): Promise<void> {
  // let fetch/response promise chains resolve (needs macrotasks)
  for (let i = 0; i < 5; i++) await new Promise((r) => setTimeout(r, 0));
}

describe("app flow", () => {
  it("shows the catalog first and pins a reference", async () => {
    await app.start({ task: "taro", N: 5 });
    expect(root.querySelector("#catalog")).not.toBeNull();
    const entries = root.querySelectorAll<HTMLButtonElement>(".catalog-entry");
    expect(entries.length).toBe(3);
    entries[1].click();
    await settle();
    expect(server.reference).toEqual([0.5]);
    expect(root.querySelector(".catalog-entry.pinned")).not.toBeNull();
  });

  it("re-picking before start replaces the reference", async () => {
    await app.start({ task: "taro", N: 5 });
    const entries = root.querySelectorAll<HTMLButtonElement>(".catalog-entry");
    entries[0].click();
    await settle();
    entries[2].click();
    await settle();
    expect(server.reference).toEqual([1]);
  });

  it("runs the answer loop and finishes with a likert form", async () => {
    await app.start({ task: "taro", N: 5 });
    click("btn-start");
    await settle();
    expect(root.querySelector("#query")).not.toBeNull();
    for (const choice of ["btn-left", "btn-right", "btn-skip", "btn-left", "btn-right"]) {
      click(choice);
      await settle();
    }
    expect(server.answered).toEqual(["left", "right", "skip", "left", "right"]);
    expect(root.querySelector("#likert-form")).not.toBeNull();
    click("likert-submit");
    await settle();
    expect(server.likert).toEqual([{ q1: 1, q2: 1, q3: 1, q4: 1 }]);
    expect(root.querySelector("#thanks")).not.toBeNull();
  });

  it("disables the buttons while a submission is in flight", async () => {
    await app.start({ task: "taro", N: 5 });
    click("btn-start");
    await settle();
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const realFetch = server.fetch;
    globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
      if (String(input).endsWith("/answer")) await gate;
      return realFetch(input, init);
    }) as typeof fetch;

    const clickPromise = app.answer("left");
    await settle();
    expect(root.querySelector<HTMLButtonElement>("#btn-left")?.disabled).toBe(true);
    release();
    await clickPromise;
    await settle();
    expect(root.querySelector<HTMLButtonElement>("#btn-left")?.disabled).toBe(false);
  });

  it("pinned reference appears beside every query", async () => {
    await app.start({ task: "taro", N: 5 });
    root.querySelectorAll<HTMLButtonElement>(".catalog-entry")[0].click();
    await settle();
    click("btn-start");
    await settle();
    const ref = root.querySelector("#reference-scene svg");
    expect(ref).not.toBeNull();
    expect(ref!.classList.contains("reference")).toBe(true);
  });

  it("recovers from a stale-query conflict without losing progress", async () => {
    await app.start({ task: "taro", N: 5 });
    click("btn-start");
    await settle();
    server.conflictsToInject = 1;
    click("btn-left");
    await settle();
    // conflict consumed: the query was refetched and answering continues
    expect(root.querySelector("#query")).not.toBeNull();
    expect(server.answered).toEqual([]);
    click("btn-right");
    await settle();
    expect(server.answered).toEqual(["right"]);
  });

  it("a reload resumes mid-session from server state alone", async () => {
    await app.start({ task: "taro", N: 5 });
    click("btn-start");
    await settle();
    click("btn-left");
    await settle();
    app.dispose();
    root.textContent = "";

    const fresh = new App(root, new SessionApi(""), { pollMs: 0 });
    await fresh.resume("fake01");
    await settle();
    expect(root.querySelector("#query")).not.toBeNull();
    expect(fresh.view.query?.query_index).toBe(1);
    expect(root.querySelector("#estimate-w")).not.toBeNull();
    fresh.dispose();
  });

  it("shows a placeholder before any estimate exists", async () => {
    server.queryIndex = 0;
    await app.start({ task: "taro", N: 5 });
    click("btn-start");
    await settle();
    expect(root.querySelector("#estimate-empty")).not.toBeNull();
  });
});
