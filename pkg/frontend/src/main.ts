// Page bootstrap: load schema metadata, then mount the baseline form and the
// query panel side by side. The only configuration is the service base URL.

import { ApiClient } from "./api.js";
import { BaselineForm } from "./form.js";
import { QueryPanel } from "./panel.js";

export interface AppHandles {
  form: BaselineForm;
  panel: QueryPanel;
}

export async function mountApp(
  doc: Document,
  root: HTMLElement,
  api: ApiClient,
): Promise<AppHandles> {
  const meta = await api.getMeta();
  root.innerHTML = "";

  const header = doc.createElement("header");
  const title = doc.createElement("h1");
  title.textContent = "Screening outcome simulator";
  header.appendChild(title);
  const subtitle = doc.createElement("p");
  subtitle.textContent =
    "What-if and goal-seeking queries over the fitted longitudinal model; " +
    "numbers are suppressed when the uncertainty interval includes zero.";
  header.appendChild(subtitle);
  root.appendChild(header);

  const layout = doc.createElement("main");
  layout.className = "layout";
  const form = new BaselineForm(doc, meta);
  const panel = new QueryPanel(doc, meta, form, api);
  layout.appendChild(form.element);
  layout.appendChild(panel.element);
  root.appendChild(layout);
  return { form, panel };
}

export function serviceBaseUrl(doc: Document): string {
  const configured = doc
    .querySelector('meta[name="service-base-url"]')
    ?.getAttribute("content");
  return configured ?? "http://127.0.0.1:8712";
}

declare const process: unknown;

if (typeof document !== "undefined" && typeof process === "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const api = new ApiClient(serviceBaseUrl(document));
    void mountApp(document, root, api).catch((error) => {
      root.textContent = `Failed to load model metadata: ${String(error)}`;
    });
  }
}
