import { RenderedScene } from "./types";

// Scenes arrive as ready-made convex polygons in meters; drawing only maps
// them through one fixed viewport transform. No geometry is derived here.

const SVG_NS = "http://www.w3.org/2000/svg";
const VIEW_HALF = 0.14; // meters covered from the center to each edge

const PALETTE = [
  "#e8c87b",
  "#c4dba0",
  "#e3a587",
  "#b5cfe3",
  "#d7b3d2",
  "#f0e1a8",
  "#a8d8c8",
];

function fillColor(tag: string): string {
  if (tag === "plate") return "#f7f4ee";
  let h = 0;
  for (let i = 0; i < tag.length; i++) h = (h * 31 + tag.charCodeAt(i)) >>> 0;
  return PALETTE[h % PALETTE.length];
}

export function sceneToSvg(scene: RenderedScene, sizePx = 220): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("width", String(sizePx));
  svg.setAttribute("height", String(sizePx));
  svg.setAttribute(
    "viewBox",
    `${-VIEW_HALF} ${-VIEW_HALF} ${2 * VIEW_HALF} ${2 * VIEW_HALF}`,
  );
  svg.classList.add("scene");
  if (scene.reference) svg.classList.add("reference");

  // flip y once so +z (oblique) / +x (top) point up on screen
  const group = document.createElementNS(SVG_NS, "g");
  group.setAttribute("transform", "scale(1,-1)");
  for (const prim of scene.primitives) {
    const poly = document.createElementNS(SVG_NS, "polygon");
    poly.setAttribute(
      "points",
      prim.vertices.map(([x, y]) => `${x},${y}`).join(" "),
    );
    poly.setAttribute("fill", fillColor(prim.fill));
    poly.setAttribute("stroke", "#555");
    poly.setAttribute("stroke-width", "0.001");
    poly.dataset.itemId = String(prim.item_id);
    poly.dataset.fill = prim.fill;
    group.appendChild(poly);
  }
  svg.appendChild(group);
  return svg;
}
