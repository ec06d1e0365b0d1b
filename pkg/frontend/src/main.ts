import { SessionApi } from "./api";
import { App } from "./app";

// Entry point for the static page: session parameters come from the URL,
// e.g. ?task=taro&method=pcpbo&N=50&seed=7

const params = new URLSearchParams(window.location.search);
const api = new SessionApi(params.get("server") ?? "");
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

const app = new App(root, api);
void app.start({
  task: params.get("task") ?? "taro",
  method: params.get("method") ?? "pcpbo",
  N: Number(params.get("N") ?? "50"),
  seed: Number(params.get("seed") ?? "0"),
  mode: params.get("mode") ?? "synth",
});
