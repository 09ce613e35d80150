// English templates keyed by the service's message identifiers. Templates
// adapt to the selected variable kinds; localization would add a new table.

import type { SimAnswer } from "./types.js";

export interface MessageContext {
  source: string;
  target: string;
  horizonLabel: string;
  sourceBinary: boolean;
}

const TEMPLATES: Record<string, (ctx: MessageContext, answer: SimAnswer) => string> = {
  no_detectable_effect: (ctx) =>
    `No statistically detectable effect of ${ctx.source} on ${ctx.target} at ${ctx.horizonLabel}: ` +
    "the uncertainty interval includes zero, so no number is shown.",
  not_supported_horizon: (ctx) =>
    `Horizon ${ctx.horizonLabel} is not supported under the current configuration.`,
  not_supported_ill_posed: () =>
    "This query is not supported under the current configuration: the fitted effect is too close to zero to invert.",
  input_implausible: (_ctx, answer) => {
    const problems = (answer.detail?.problems as string[] | undefined) ?? [];
    const head = "Some inputs look implausible. Please check the highlighted values.";
    return problems.length ? `${head} (${problems.join("; ")})` : head;
  },
};

export function guardrailText(answer: SimAnswer, ctx: MessageContext): string {
  const template = TEMPLATES[answer.message];
  if (template) return template(ctx, answer);
  return "The service declined this query.";
}

export function formatNumber(x: number, digits = 3): string {
  return Number.isFinite(x) ? x.toFixed(digits) : String(x);
}
