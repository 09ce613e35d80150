// Minimal schema metadata mirroring the service's demo artifacts.

import type { ModelMeta } from "../src/types.js";

export function demoMeta(): ModelMeta {
  const variables = [
    { name: "Health-guidance", role: "intervention", binary: true },
    { name: "BMI", role: "outcome", binary: false },
    { name: "SBP", role: "outcome", binary: false },
    { name: "DBP", role: "outcome", binary: false },
    { name: "HbA1c", role: "outcome", binary: false },
    { name: "LDL", role: "outcome", binary: false },
    { name: "Smoke", role: "exogenous", binary: true },
    { name: "Age", role: "exogenous", binary: false },
    { name: "Check_num", role: "baseline_only", binary: false },
  ] as ModelMeta["variables"];
  return {
    version: "v1",
    variables,
    time_labels: [2020, 2021, 2022, 2023],
    anchor_time: 1,
    horizons: [0, 1, 2],
    sources: ["Health-guidance", "BMI", "SBP", "DBP", "HbA1c", "LDL", "Smoke", "Age"],
    targets: ["BMI", "SBP", "DBP", "HbA1c", "LDL"],
    bounds: {
      "Health-guidance": { kind: "binary" },
      BMI: { kind: "continuous", low: 10, high: 60 },
      SBP: { kind: "continuous", low: 70, high: 250 },
      DBP: { kind: "continuous", low: 40, high: 150 },
      HbA1c: { kind: "continuous", low: 3, high: 15 },
      LDL: { kind: "continuous", low: 20, high: 400 },
      Smoke: { kind: "binary" },
      Age: { kind: "continuous", low: 18, high: 100 },
    },
    manifest: {},
  };
}

export function fillDemoBaseline(values: Record<string, number> = {}): Record<string, number> {
  return {
    "Health-guidance": 0,
    BMI: 24.9,
    SBP: 128,
    DBP: 78,
    HbA1c: 5.7,
    LDL: 122,
    Smoke: 0,
    Age: 55,
    ...values,
  };
}
