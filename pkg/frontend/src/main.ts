import { HttpApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { render } from "./dom.js";

function query<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function wire(): void {
  const root = query<HTMLDivElement>("session");
  const form = query<HTMLFormElement>("setup");
  const baseUrl = query<HTMLInputElement>("base-url");
  const productsInput = query<HTMLInputElement>("products");
  const seedInput = query<HTMLInputElement>("seed");
  const status = query<HTMLSpanElement>("status");

  let controller: SessionController | null = null;

  const draw = () => {
    const view = controller?.current;
    if (!view) return;
    render(view, root, {
      onRate: (f) => {
        controller
          ?.rate(f)
          .then(draw)
          .catch(() => draw());
      },
      onRetry: () => {
        controller
          ?.refreshSummary()
          .then(draw)
          .catch(() => draw());
      },
    });
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const api = new HttpApiClient(baseUrl.value);
    controller = new SessionController(api);
    const products = productsInput.value
      .split(",")
      .map((p) => p.trim())
      .filter(Boolean);
    status.textContent = "starting...";
    controller
      .start({
        products: products.length ? products : undefined,
        seed: Number(seedInput.value) || 0,
        mode: "gumbel",
      })
      .then(() => {
        status.textContent = "";
        draw();
      })
      .catch((err) => {
        status.textContent = `could not start: ${err instanceof Error ? err.message : err}`;
      });
  });
}

wire();
