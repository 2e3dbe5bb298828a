// Artifact viewers: table grid, SVG chart from a plot spec, and a map
// with toggleable GeoJSON overlays. Geographic layers sit on raster
// tiles from the endpoint configured at build time; projected layers
// render as plain vector panels.

import { GeoFeature, MapLayer, MapSpec, PlotSpec, TableArtifact } from "./types";

declare const __TILE_URL_TEMPLATE__: string;
export const TILE_URL_TEMPLATE: string =
  typeof __TILE_URL_TEMPLATE__ !== "undefined"
    ? __TILE_URL_TEMPLATE__
    : "https://tile.openstreetmap.org/{z}/{x}/{y}.png";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// -- table -------------------------------------------------------------------

export function renderTable(payload: TableArtifact): HTMLElement {
  const wrap = el("div", "artifact artifact-table");
  const table = el("table");
  const head = table.createTHead().insertRow();
  for (const column of payload.columns) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const row of payload.rows) {
    const tr = body.insertRow();
    for (const cell of row) {
      tr.insertCell().textContent =
        cell === null || cell === undefined
          ? ""
          : typeof cell === "object"
            ? JSON.stringify(cell)
            : String(cell);
    }
  }
  wrap.appendChild(table);
  return wrap;
}

// -- plot --------------------------------------------------------------------

const W = 480;
const H = 240;
const PAD = 36;

export function renderPlot(spec: PlotSpec): HTMLElement {
  const wrap = el("div", "artifact artifact-plot");
  if (spec.title) wrap.appendChild(el("h4", "artifact-title", spec.title));
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("role", "img");

  const xs = spec.data.map((d) => d[spec.x.field]);
  const ys = spec.data.map((d) => Number(d[spec.y.field] ?? 0));
  const yMax = Math.max(1e-9, ...ys.map((v) => Math.abs(v)));
  const plotW = W - 2 * PAD;
  const plotH = H - 2 * PAD;
  const n = Math.max(1, spec.data.length);

  const yScale = (v: number) => H - PAD - (v / yMax) * plotH;
  const xCenter = (i: number) => PAD + ((i + 0.5) / n) * plotW;

  const axis = document.createElementNS(SVG_NS, "path");
  axis.setAttribute("d", `M ${PAD} ${PAD} V ${H - PAD} H ${W - PAD}`);
  axis.setAttribute("class", "plot-axis");
  svg.appendChild(axis);

  if (spec.mark === "bar") {
    const barW = (plotW / n) * 0.7;
    ys.forEach((v, i) => {
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(xCenter(i) - barW / 2));
      rect.setAttribute("y", String(yScale(Math.max(0, v))));
      rect.setAttribute("width", String(barW));
      rect.setAttribute("height", String(Math.abs(yScale(0) - yScale(v))));
      rect.setAttribute("class", "plot-bar");
      svg.appendChild(rect);
    });
  } else {
    // line / area / point share the polyline; points get circles
    if (spec.mark !== "point") {
      const path = document.createElementNS(SVG_NS, "polyline");
      path.setAttribute(
        "points",
        ys.map((v, i) => `${xCenter(i)},${yScale(v)}`).join(" ")
      );
      path.setAttribute("class", `plot-${spec.mark}`);
      svg.appendChild(path);
    }
    ys.forEach((v, i) => {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(xCenter(i)));
      dot.setAttribute("cy", String(yScale(v)));
      dot.setAttribute("r", "3");
      dot.setAttribute("class", "plot-point");
      svg.appendChild(dot);
    });
  }
  xs.forEach((label, i) => {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(xCenter(i)));
    text.setAttribute("y", String(H - PAD + 14));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("class", "plot-label");
    text.textContent = String(label);
    svg.appendChild(text);
  });
  wrap.appendChild(svg);
  return wrap;
}

// -- map ------------------------------------------------------------------------

type Bounds = { minX: number; minY: number; maxX: number; maxY: number };

function walkCoordinates(value: unknown, visit: (x: number, y: number) => void): void {
  if (Array.isArray(value)) {
    if (value.length >= 2 && typeof value[0] === "number" && typeof value[1] === "number") {
      visit(value[0] as number, value[1] as number);
    } else {
      for (const item of value) walkCoordinates(item, visit);
    }
  }
}

function layerBounds(layers: MapLayer[]): Bounds {
  const bounds: Bounds = { minX: Infinity, minY: Infinity, maxX: -Infinity, maxY: -Infinity };
  for (const layer of layers) {
    for (const feature of layer.geojson.features) {
      walkCoordinates(feature.geometry.coordinates, (x, y) => {
        bounds.minX = Math.min(bounds.minX, x);
        bounds.minY = Math.min(bounds.minY, y);
        bounds.maxX = Math.max(bounds.maxX, x);
        bounds.maxY = Math.max(bounds.maxY, y);
      });
    }
  }
  if (!Number.isFinite(bounds.minX)) return { minX: 0, minY: 0, maxX: 1, maxY: 1 };
  return bounds;
}

function featureNode(
  feature: GeoFeature,
  project: (x: number, y: number) => [number, number]
): SVGElement {
  const geometry = feature.geometry;
  const node = (() => {
    switch (geometry.type) {
      case "Point": {
        const [x, y] = project(
          (geometry.coordinates as number[])[0],
          (geometry.coordinates as number[])[1]
        );
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(x));
        circle.setAttribute("cy", String(y));
        circle.setAttribute("r", "4");
        return circle;
      }
      case "MultiPoint": {
        const group = document.createElementNS(SVG_NS, "g");
        for (const raw of geometry.coordinates as number[][]) {
          const [x, y] = project(raw[0], raw[1]);
          const circle = document.createElementNS(SVG_NS, "circle");
          circle.setAttribute("cx", String(x));
          circle.setAttribute("cy", String(y));
          circle.setAttribute("r", "4");
          group.appendChild(circle);
        }
        return group;
      }
      case "LineString":
      case "MultiLineString": {
        const lines =
          geometry.type === "LineString"
            ? [geometry.coordinates as number[][]]
            : (geometry.coordinates as number[][][]);
        const group = document.createElementNS(SVG_NS, "g");
        for (const line of lines) {
          const poly = document.createElementNS(SVG_NS, "polyline");
          poly.setAttribute(
            "points",
            line.map((c) => project(c[0], c[1]).join(",")).join(" ")
          );
          group.appendChild(poly);
        }
        return group;
      }
      case "Polygon":
      case "MultiPolygon": {
        const polys =
          geometry.type === "Polygon"
            ? [geometry.coordinates as number[][][]]
            : (geometry.coordinates as number[][][][]);
        const group = document.createElementNS(SVG_NS, "g");
        for (const rings of polys) {
          const path = document.createElementNS(SVG_NS, "path");
          path.setAttribute(
            "d",
            rings
              .map(
                (ring) =>
                  "M " + ring.map((c) => project(c[0], c[1]).join(" ")).join(" L ") + " Z"
              )
              .join(" ")
          );
          group.appendChild(path);
        }
        return group;
      }
      default: {
        return document.createElementNS(SVG_NS, "g");
      }
    }
  })();
  const label = Object.entries(feature.properties ?? {})
    .map(([key, value]) => `${key}: ${String(value)}`)
    .join("\n");
  if (label) {
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = label;
    node.appendChild(title);
  }
  return node;
}

function tileFor(lon: number, lat: number, z: number): { x: number; y: number } {
  const x = Math.floor(((lon + 180) / 360) * 2 ** z);
  const latRad = (lat * Math.PI) / 180;
  const y = Math.floor(
    ((1 - Math.log(Math.tan(latRad) + 1 / Math.cos(latRad)) / Math.PI) / 2) * 2 ** z
  );
  return { x, y };
}

export function renderMap(spec: MapSpec): HTMLElement {
  const wrap = el("div", "artifact artifact-map");
  const bounds = layerBounds(spec.layers);
  const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
  const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
  const size = 420;
  const scale = (size - 20) / Math.max(spanX, spanY);
  const project = (x: number, y: number): [number, number] => [
    10 + (x - bounds.minX) * scale,
    10 + (bounds.maxY - y) * scale,
  ];

  const geographic = (spec.crs ?? "EPSG:4326").toUpperCase().includes("4326");
  if (geographic && spec.base.startsWith("tiles:")) {
    // one representative base tile keeps the endpoint build-configurable
    // without pulling a tile pyramid into the panel
    const { x, y } = tileFor((bounds.minX + bounds.maxX) / 2, (bounds.minY + bounds.maxY) / 2, 12);
    const img = document.createElement("img");
    img.className = "map-base-tile";
    img.alt = "base map tile";
    img.src = TILE_URL_TEMPLATE.replace("{z}", "12").replace("{x}", String(x)).replace("{y}", String(y));
    wrap.appendChild(img);
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
  svg.setAttribute("class", "map-canvas");

  const toggles = el("div", "map-toggles");
  spec.layers.forEach((layer, i) => {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", `map-layer map-layer-${i % 6}`);
    group.dataset.layerName = layer.name;
    for (const feature of layer.geojson.features) {
      group.appendChild(featureNode(feature, project));
    }
    svg.appendChild(group);

    const label = el("label", "map-toggle");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = true;
    box.addEventListener("change", () => {
      group.style.display = box.checked ? "" : "none";
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(layer.name));
    toggles.appendChild(label);
  });

  wrap.appendChild(svg);
  wrap.appendChild(toggles);
  const crsNote = el("div", "map-crs", spec.crs ? `CRS: ${spec.crs}` : "");
  wrap.appendChild(crsNote);
  return wrap;
}

export function renderArtifact(kind: string, payload: unknown): HTMLElement {
  try {
    switch (kind) {
      case "text": {
        return el("p", "artifact artifact-text", String(payload));
      }
      case "table":
        return renderTable(payload as TableArtifact);
      case "plot_spec":
        return renderPlot(payload as PlotSpec);
      case "map_spec":
        return renderMap(payload as MapSpec);
      default: {
        return el("div", "error-card", `unknown artifact kind: ${kind}`);
      }
    }
  } catch (err) {
    return el("div", "error-card", `artifact failed to render: ${String(err)}`);
  }
}
