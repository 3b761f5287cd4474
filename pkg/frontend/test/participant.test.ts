import { describe, expect, it, vi } from "vitest";

import { renderParticipantForm } from "../src/participant";
import type { ConsensusReport, MyEstimates, SessionView } from "../src/types";

const VIEW: SessionView = {
  session_id: "at-estimation",
  state: "round-active",
  round_count: 2,
  active_round: 2,
  missing_count: 3,
  theta: "0.85",
  delta: "0.05",
  max_rounds: 10,
  quantities: ["likelihood:r1", "weight:o1"],
  participant_count: 7,
};

// aggregate feedback from round 1; the raw per-participant estimates are
// deliberately present as an unexpected extra field to prove the view
// never renders anything but the aggregate fields
const REPORT = {
  round_number: 1,
  theta: "0.85",
  delta: "0.05",
  overall_reached: false,
  per_quantity: {
    "likelihood:r1": {
      median: "0.6",
      mean: "0.6442857142857144",
      min: "0.58",
      max: "0.9",
      ratio: "0.8571428571428571",
      reached: true,
    },
    "weight:o1": {
      median: "0.5",
      mean: "0.5",
      min: "0.1",
      max: "0.9",
      ratio: "0.5",
      reached: false,
    },
  },
  estimates: {
    "likelihood:r1": { p1: "0.62", p2: "0.9", p3: "0.58" },
  },
} as unknown as ConsensusReport;

const MINE: MyEstimates = {
  current_round: {},
  carried_defaults: { "likelihood:r1": "0.61" },
};

describe("participant estimation form", () => {
  it("shows the anonymized aggregate beside each field", () => {
    const form = renderParticipantForm(VIEW, MINE, REPORT, { onSubmit: () => {} });
    const row = form.querySelector<HTMLElement>(
      '[data-quantity="likelihood:r1"]',
    )!;
    expect(row.querySelector(".round-feedback")!.textContent).toBe(
      "prior round: median 0.6, spread 0.58–0.9",
    );
  });

  it("never renders raw peer estimates or participant handles", () => {
    const form = renderParticipantForm(VIEW, MINE, REPORT, { onSubmit: () => {} });
    const text = form.textContent ?? "";
    const inputs = [...form.querySelectorAll("input")].map((i) => i.value);
    for (const leaked of ["p1", "p2", "p3", "0.62"]) {
      expect(text).not.toContain(leaked);
      expect(inputs).not.toContain(leaked);
    }
  });

  it("prefills carried values but still requires confirmation", () => {
    const form = renderParticipantForm(VIEW, MINE, REPORT, { onSubmit: () => {} });
    const row = form.querySelector<HTMLElement>(
      '[data-quantity="likelihood:r1"]',
    )!;
    expect(row.classList.contains("needs-confirmation")).toBe(true);
    expect(row.querySelector("input")!.value).toBe("0.61");
    expect(row.querySelector("button")!.textContent).toBe("confirm");
  });

  it("submits confirmed values and rejects out-of-range entries inline", () => {
    const onSubmit = vi.fn();
    const form = renderParticipantForm(VIEW, MINE, REPORT, { onSubmit });
    const row = form.querySelector<HTMLElement>(
      '[data-quantity="likelihood:r1"]',
    )!;
    const input = row.querySelector("input")!;
    const button = row.querySelector("button")!;

    input.value = "1.5";
    button.click();
    expect(onSubmit).not.toHaveBeenCalled();
    expect(row.querySelector(".inline-error")!.textContent).toContain("[0, 1]");

    input.value = "0.65";
    button.click();
    expect(onSubmit).toHaveBeenCalledWith("likelihood:r1", 0.65);
    expect(row.querySelector(".inline-error")!.textContent).toBe("");
  });
});
