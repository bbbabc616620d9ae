// DOM rendering of a SessionView: preference bars, evidence list colored by
// dominant aspect, alignment line chart, summary text, feedback controls.

import { SessionView } from "./view.js";

const ASPECT_COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export function aspectColor(aspect: number): string {
  return ASPECT_COLORS[aspect % ASPECT_COLORS.length] ?? "#333333";
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBars(view: SessionView): HTMLElement {
  const wrap = el("div", "bars");
  view.wBars.forEach((w, i) => {
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", `a${i}`));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = `${(w * 100).toFixed(2)}%`;
    fill.style.background = aspectColor(i);
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "bar-value", w.toFixed(4)));
    wrap.appendChild(row);
  });
  return wrap;
}

function renderEvidence(view: SessionView): HTMLElement {
  const list = el("ul", "evidence");
  for (const s of view.evidence) {
    const item = el("li", `evidence-item bin-${s.bin}`);
    const tag = el("span", "aspect-tag", `a${s.aspect}`);
    tag.style.background = aspectColor(s.aspect);
    item.appendChild(tag);
    item.appendChild(el("span", "evidence-text", ` ${s.text}`));
    list.appendChild(item);
  }
  return list;
}

function renderAlignmentChart(view: SessionView): HTMLElement {
  const wrap = el("div", "chart");
  if (view.aMetrics.length === 0) {
    return wrap;
  }
  const w = 420;
  const h = 160;
  const xs = view.aMetrics.map((p) => p.round);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs, xMin + 1);
  const px = (r: number) => ((r - xMin) / (xMax - xMin)) * (w - 20) + 10;
  const py = (v: number) => h - 10 - v * (h - 20);
  const line = (key: "aPref" | "aEvid") =>
    view.aMetrics.map((p) => `${px(p.round).toFixed(1)},${py(p[key]).toFixed(1)}`).join(" ");
  wrap.innerHTML =
    `<svg width="${w}" height="${h}" viewBox="0 0 ${w} ${h}">` +
    `<rect width="${w}" height="${h}" fill="#fafafa"/>` +
    `<polyline points="${line("aPref")}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>` +
    `<polyline points="${line("aEvid")}" fill="none" stroke="#d62728" stroke-width="1.5"/>` +
    `<text x="12" y="14" fill="#1f77b4" font-size="11">preference alignment</text>` +
    `<text x="12" y="28" fill="#d62728" font-size="11">evidence alignment</text>` +
    `</svg>`;
  return wrap;
}

export interface RenderHooks {
  onRate: (f: number) => void;
  onRetry: () => void;
}

export function render(view: SessionView, root: HTMLElement, hooks: RenderHooks): void {
  root.replaceChildren();

  if (view.error) {
    const banner = el("div", "banner error", `Service error: ${view.error} `);
    const retry = el("button", "retry", "Retry") as HTMLButtonElement;
    retry.addEventListener("click", hooks.onRetry);
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  const head = el("div", "head");
  head.appendChild(el("h2", undefined, `Round ${view.round}`));
  if (view.degraded) {
    head.appendChild(el("span", "degraded", "degraded rewrite"));
  }
  root.appendChild(head);

  const cols = el("div", "columns");
  const left = el("div", "col");
  left.appendChild(el("h3", undefined, "Summary"));
  left.appendChild(el("p", "summary", view.summaryText));
  for (const [bin, text] of Object.entries(view.binSummaries)) {
    left.appendChild(el("p", `bin ${bin}`, `${bin.toUpperCase()}: ${text}`));
  }
  left.appendChild(el("h3", undefined, "Evidence"));
  left.appendChild(renderEvidence(view));
  cols.appendChild(left);

  const right = el("div", "col");
  right.appendChild(el("h3", undefined, "Inferred preference"));
  right.appendChild(renderBars(view));
  right.appendChild(renderAlignmentChart(view));
  cols.appendChild(right);
  root.appendChild(cols);

  const controls = el("div", "controls");
  const slider = el("input") as HTMLInputElement;
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.01";
  slider.value = "0.5";
  const readout = el("span", "readout", "0.50");
  slider.addEventListener("input", () => {
    readout.textContent = Number(slider.value).toFixed(2);
  });
  const button = el("button", "rate", "Rate summary") as HTMLButtonElement;
  button.disabled = view.summaryId === null;
  button.addEventListener("click", () => hooks.onRate(Number(slider.value)));
  controls.append(slider, readout, button);
  root.appendChild(controls);
}
