// Query panel: forward what-if and goal-seek tabs over one baseline form.
// A request token discards stale responses; only the newest query renders.

import { ApiClient, ServiceError } from "./api.js";
import { BaselineForm } from "./form.js";
import { formatNumber, guardrailText, type MessageContext } from "./messages.js";
import type { ModelMeta, QueryMode, SimAnswer, SimRequest } from "./types.js";

export class QueryPanel {
  readonly element: HTMLElement;
  private mode: QueryMode = "forward";
  private readonly doc: Document;
  private readonly sourceSelect: HTMLSelectElement;
  private readonly targetSelect: HTMLSelectElement;
  private readonly horizonSelect: HTMLSelectElement;
  private readonly valueInput: HTMLInputElement;
  private readonly valueLabel: HTMLElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly resultCard: HTMLElement;
  private readonly tabs: Record<QueryMode, HTMLButtonElement>;
  private requestToken = 0;

  constructor(
    doc: Document,
    private readonly meta: ModelMeta,
    private readonly form: BaselineForm,
    private readonly api: ApiClient,
  ) {
    this.doc = doc;
    this.element = doc.createElement("section");
    this.element.className = "query-panel";

    const tabBar = doc.createElement("div");
    tabBar.className = "tabs";
    this.tabs = {
      forward: this.makeTab("What-if (forward)", "forward"),
      goal_seek: this.makeTab("Goal seeking", "goal_seek"),
    };
    tabBar.appendChild(this.tabs.forward);
    tabBar.appendChild(this.tabs.goal_seek);
    this.element.appendChild(tabBar);

    this.sourceSelect = this.makeSelect("source", meta.sources);
    this.targetSelect = this.makeSelect("target", meta.targets);
    this.horizonSelect = this.makeSelect(
      "horizon",
      meta.horizons.map((h) => String(h)),
    );
    this.valueLabel = doc.createElement("span");
    this.valueInput = doc.createElement("input");
    this.valueInput.type = "number";
    this.valueInput.step = "any";
    this.valueInput.name = "query-value";

    const controls = doc.createElement("div");
    controls.className = "controls";
    controls.appendChild(this.labelled("Intervene on", this.sourceSelect));
    controls.appendChild(this.labelled("Target", this.targetSelect));
    controls.appendChild(this.labelled("Horizon (visits ahead)", this.horizonSelect));
    const valueField = this.doc.createElement("label");
    valueField.appendChild(this.valueLabel);
    valueField.appendChild(this.valueInput);
    controls.appendChild(valueField);
    this.element.appendChild(controls);

    this.submitButton = doc.createElement("button");
    this.submitButton.textContent = "Run query";
    this.submitButton.className = "submit";
    this.submitButton.addEventListener("click", () => void this.submit());
    this.element.appendChild(this.submitButton);

    this.resultCard = doc.createElement("div");
    this.resultCard.className = "result-card";
    this.element.appendChild(this.resultCard);

    form.onChange(() => this.refreshGate());
    this.setMode("forward");
    this.refreshGate();
  }

  private makeTab(text: string, mode: QueryMode): HTMLButtonElement {
    const button = this.doc.createElement("button");
    button.textContent = text;
    button.className = "tab";
    button.addEventListener("click", () => this.setMode(mode));
    return button;
  }

  private makeSelect(name: string, options: string[]): HTMLSelectElement {
    const select = this.doc.createElement("select");
    select.name = name;
    for (const option of options) {
      const el = this.doc.createElement("option");
      el.value = option;
      el.textContent = option;
      select.appendChild(el);
    }
    return select;
  }

  private labelled(text: string, control: HTMLElement): HTMLElement {
    const label = this.doc.createElement("label");
    const caption = this.doc.createElement("span");
    caption.textContent = text;
    label.appendChild(caption);
    label.appendChild(control);
    return label;
  }

  setMode(mode: QueryMode): void {
    this.mode = mode;
    this.tabs.forward.classList.toggle("active", mode === "forward");
    this.tabs.goal_seek.classList.toggle("active", mode === "goal_seek");
    this.valueLabel.textContent =
      mode === "forward" ? "Hypothetical value" : "Desired target value";
  }

  private refreshGate(): void {
    this.submitButton.disabled = !this.form.valid();
  }

  private context(): MessageContext {
    const source = this.sourceSelect.value;
    const horizon = Number(this.horizonSelect.value);
    const label = this.meta.time_labels[this.meta.anchor_time + horizon];
    const sourceBound = this.meta.bounds[source];
    return {
      source,
      target: this.targetSelect.value,
      horizonLabel: label !== undefined ? String(label) : `lag ${horizon}`,
      sourceBinary: sourceBound?.kind === "binary",
    };
  }

  async submit(): Promise<void> {
    if (!this.form.valid()) {
      this.renderInlineError("Complete the baseline form before running a query.");
      return;
    }
    const token = ++this.requestToken;
    const query: SimRequest = {
      mode: this.mode,
      baseline: this.form.values(),
      source: this.sourceSelect.value,
      target: this.targetSelect.value,
      horizon: Number(this.horizonSelect.value),
    };
    const value = Number(this.valueInput.value);
    if (this.mode === "forward") {
      query.forward_value = value;
    } else {
      query.desired_target = value;
    }
    this.renderPending();
    try {
      const answer = await this.api.simulate(query);
      if (token !== this.requestToken) return; // a newer query superseded this one
      this.renderAnswer(answer);
    } catch (error) {
      if (token !== this.requestToken) return;
      if (error instanceof ServiceError) {
        this.renderInlineError(`The service rejected the query: ${error.detail}`);
      } else {
        this.renderNetworkError();
      }
    }
  }

  private renderPending(): void {
    this.resultCard.innerHTML = "";
    const note = this.doc.createElement("p");
    note.className = "pending";
    note.textContent = "Querying…";
    this.resultCard.appendChild(note);
  }

  renderAnswer(answer: SimAnswer): void {
    if (this.mode === "forward") {
      this.renderForwardResult(answer);
    } else {
      this.renderGoalResult(answer);
    }
  }

  renderForwardResult(answer: SimAnswer): void {
    this.resultCard.innerHTML = "";
    if (answer.status !== "Estimate") {
      this.renderGuardrail(answer);
      return;
    }
    const ctx = this.context();
    const change = this.doc.createElement("p");
    change.className = "estimate-value";
    change.textContent = `Expected change in ${ctx.target}: ${formatNumber(answer.value!)}`;
    this.resultCard.appendChild(change);

    const band = this.doc.createElement("p");
    band.className = "interval-band";
    const [low, high] = answer.interval!;
    band.textContent = `95% interval: ${formatNumber(low)} to ${formatNumber(high)}`;
    this.resultCard.appendChild(band);

    const level = answer.detail["predicted_level"];
    if (typeof level === "number") {
      const line = this.doc.createElement("p");
      line.className = "predicted-level";
      line.textContent = `Predicted ${ctx.target} at ${ctx.horizonLabel}: ${formatNumber(level)}`;
      this.resultCard.appendChild(line);
    }
  }

  renderGoalResult(answer: SimAnswer): void {
    this.resultCard.innerHTML = "";
    if (answer.status !== "Estimate") {
      this.renderGuardrail(answer);
      return;
    }
    const ctx = this.context();
    const line = this.doc.createElement("p");
    line.className = "estimate-value";
    if (ctx.sourceBinary) {
      const setting = answer.value === 1 ? "on (1)" : "off (0)";
      const gap = answer.detail["gap"];
      line.textContent = `Recommended setting for ${ctx.source}: ${setting}`;
      this.resultCard.appendChild(line);
      if (typeof gap === "number") {
        const gapLine = this.doc.createElement("p");
        gapLine.className = "gap-note";
        gapLine.textContent = `Closest achievable result misses the goal by ${formatNumber(gap)}.`;
        this.resultCard.appendChild(gapLine);
      }
    } else {
      line.textContent = `Set ${ctx.source} to ${formatNumber(answer.value!)}`;
      this.resultCard.appendChild(line);
      const [low, high] = answer.interval!;
      const band = this.doc.createElement("p");
      band.className = "interval-band";
      band.textContent = `Interval under the effect bounds: ${formatNumber(low)} to ${formatNumber(high)}`;
      this.resultCard.appendChild(band);
    }
  }

  private renderGuardrail(answer: SimAnswer): void {
    const note = this.doc.createElement("p");
    note.className = `guardrail status-${answer.status}`;
    note.textContent = guardrailText(answer, this.context());
    this.resultCard.appendChild(note);
  }

  renderInlineError(text: string): void {
    this.resultCard.innerHTML = "";
    const note = this.doc.createElement("p");
    note.className = "inline-error";
    note.textContent = text;
    this.resultCard.appendChild(note);
  }

  private renderNetworkError(): void {
    this.resultCard.innerHTML = "";
    const note = this.doc.createElement("p");
    note.className = "network-error";
    note.textContent = "Could not reach the service.";
    const retry = this.doc.createElement("button");
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void this.submit());
    this.resultCard.appendChild(note);
    this.resultCard.appendChild(retry);
  }
}
