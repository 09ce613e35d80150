// Baseline profile form: one field per variable at the current visit.
// Submission elsewhere is gated on every field passing the service's
// plausibility bounds, mirrored here for immediate feedback.

import type { Bound, ModelMeta, VariableMeta } from "./types.js";

export class BaselineForm {
  readonly element: HTMLElement;
  private readonly inputs = new Map<string, HTMLInputElement>();
  private readonly bounds: Record<string, Bound>;
  private listeners: Array<() => void> = [];

  constructor(doc: Document, meta: ModelMeta) {
    this.bounds = meta.bounds;
    this.element = doc.createElement("form");
    this.element.className = "baseline-form";
    this.element.addEventListener("submit", (e) => e.preventDefault());
    const heading = doc.createElement("h2");
    heading.textContent = "Current visit";
    this.element.appendChild(heading);
    for (const variable of meta.variables) {
      if (variable.role === "baseline_only") continue;
      this.element.appendChild(this.buildField(doc, variable));
    }
  }

  private buildField(doc: Document, variable: VariableMeta): HTMLElement {
    const row = doc.createElement("label");
    row.className = "field";
    const caption = doc.createElement("span");
    caption.textContent = variable.name;
    row.appendChild(caption);

    const input = doc.createElement("input");
    input.name = variable.name;
    if (variable.binary) {
      input.type = "checkbox";
    } else {
      input.type = "number";
      input.step = "any";
      const bound = this.bounds[variable.name];
      if (bound && bound.kind === "continuous") {
        input.min = String(bound.low);
        input.max = String(bound.high);
        input.placeholder = `${bound.low}–${bound.high}`;
      }
    }
    input.addEventListener("input", () => this.changed());
    input.addEventListener("change", () => this.changed());
    this.inputs.set(variable.name, input);
    row.appendChild(input);

    const note = doc.createElement("em");
    note.className = "field-note";
    note.dataset.for = variable.name;
    row.appendChild(note);
    return row;
  }

  private changed(): void {
    this.refreshNotes();
    for (const listener of this.listeners) listener();
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  fieldProblem(name: string): string | null {
    const input = this.inputs.get(name);
    if (!input) return null;
    if (input.type === "checkbox") return null;
    if (input.value.trim() === "") return "required";
    const value = Number(input.value);
    if (!Number.isFinite(value)) return "must be a number";
    const bound = this.bounds[name];
    if (bound && bound.kind === "continuous" && (value < bound.low || value > bound.high)) {
      return `outside ${bound.low}–${bound.high}`;
    }
    return null;
  }

  private refreshNotes(): void {
    for (const name of this.inputs.keys()) {
      const note = this.element.querySelector<HTMLElement>(`[data-for="${name}"]`);
      if (note) note.textContent = this.fieldProblem(name) ?? "";
    }
  }

  valid(): boolean {
    for (const name of this.inputs.keys()) {
      if (this.fieldProblem(name) !== null) return false;
    }
    return true;
  }

  values(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const [name, input] of this.inputs.entries()) {
      out[name] = input.type === "checkbox" ? (input.checked ? 1 : 0) : Number(input.value);
    }
    return out;
  }

  set(name: string, value: number): void {
    const input = this.inputs.get(name);
    if (!input) return;
    if (input.type === "checkbox") {
      input.checked = value === 1;
    } else {
      input.value = String(value);
    }
    this.changed();
  }

  fill(values: Record<string, number>): void {
    for (const [name, value] of Object.entries(values)) this.set(name, value);
  }
}
