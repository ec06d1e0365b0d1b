import { describe, expect, it } from "vitest";

import { SessionApi } from "../src/api";
import { App } from "../src/app";

// Scripted full-loop session against a live service. The server base URL
// comes from PLATEKIT_BASE_URL; without it the suite is skipped (unit tests
// cover the UI logic with a fake server).

const BASE = process.env.PLATEKIT_BASE_URL ?? "";

async function until(cond: () => boolean, ms = 20_000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) throw new Error("timed out waiting for UI state");
    await new Promise((r) => setTimeout(r, 25));
  }
}

describe.skipIf(!BASE)("live session loop", () => {
  it("completes five queries with one skip, a pinned reference and a likert record", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = new App(root, new SessionApi(BASE), { pollMs: 0 });

    await app.start({ task: "taro", method: "pcpbo", N: 5, seed: 42 });
    expect(root.querySelector("#catalog")).not.toBeNull();

    // browse the catalog and pin one candidate as the reference
    const entries = root.querySelectorAll<HTMLButtonElement>(".catalog-entry");
    expect(entries.length).toBe(21);
    entries[12].click();
    await until(() => root.querySelector(".catalog-entry.pinned") !== null);

    root.querySelector<HTMLButtonElement>("#btn-start")!.click();
    await until(() => root.querySelector("#query") !== null);
    expect(root.querySelector("#reference-scene svg.reference")).not.toBeNull();

    // two answers, then a skip (synthesizable: a winner already exists),
    // then two more answers
    const script = ["btn-left", "btn-right", "btn-skip", "btn-left", "btn-left"];
    for (const [k, id] of script.entries()) {
      await until(() => {
        const btn = root.querySelector<HTMLButtonElement>(`#${id}`);
        return btn !== null && !btn.disabled;
      });
      root.querySelector<HTMLButtonElement>(`#${id}`)!.click();
      await until(
        () =>
          app.view.phase === "finished" ||
          (app.view.query !== null && app.view.query.query_index === k + 1),
      );
    }

    await until(() => root.querySelector("#likert-form") !== null);
    expect(app.view.estimate?.done).toBe(true);
    expect(app.view.estimate?.w).not.toBeNull();
    expect(root.querySelector("#estimate-scene svg")).not.toBeNull();
    expect(root.querySelector("#sparkline polyline")).not.toBeNull();

    const selects = root.querySelectorAll<HTMLSelectElement>("#likert-form select");
    const values = ["6", "5", "7", "4"];
    selects.forEach((sel, i) => (sel.value = values[i]));
    root.querySelector<HTMLButtonElement>("#likert-submit")!.click();
    await until(() => root.querySelector("#thanks") !== null);

    app.dispose();
    root.remove();
  });
});
