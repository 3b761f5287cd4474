import { describe, expect, it } from "vitest";

import { renderConsensusGauges } from "../src/gauge";
import type { ConsensusReport } from "../src/types";

// the seven-expert round: 6 of 7 estimates within the band of median 0.6
const REPORT: ConsensusReport = {
  round_number: 2,
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
};

describe("consensus gauges", () => {
  it("renders one row per quantity with the service's ratio string verbatim", () => {
    const gauges = renderConsensusGauges(REPORT);
    const rows = gauges.querySelectorAll<HTMLElement>(".gauge-row");
    expect(rows).toHaveLength(2);

    const r1 = gauges.querySelector<HTMLElement>(
      '[data-quantity="likelihood:r1"]',
    )!;
    expect(r1.querySelector(".gauge-ratio")!.textContent).toBe(
      "0.8571428571428571",
    );
    expect(r1.classList.contains("reached")).toBe(true);
    expect(r1.querySelector(".gauge-state")!.textContent).toBe("reached");

    const o1 = gauges.querySelector<HTMLElement>('[data-quantity="weight:o1"]')!;
    expect(o1.classList.contains("pending")).toBe(true);
    expect(o1.querySelector(".gauge-ratio")!.textContent).toBe("0.5");
  });

  it("positions bars from the ratio and the threshold marker from theta", () => {
    const gauges = renderConsensusGauges(REPORT);
    const bar = gauges.querySelector<HTMLElement>(
      '[data-quantity="weight:o1"] .gauge-bar',
    )!;
    expect(bar.style.width).toBe("50%");
    const threshold = gauges.querySelector<HTMLElement>(".gauge-threshold")!;
    expect(threshold.style.left).toBe("85%");
  });

  it("reflects the overall flag", () => {
    const pending = renderConsensusGauges(REPORT);
    expect(pending.querySelector(".gauges-overall")!.className).toContain(
      "pending",
    );
    const reached = renderConsensusGauges({
      ...REPORT,
      overall_reached: true,
      per_quantity: {
        "likelihood:r1": {
          ...REPORT.per_quantity["likelihood:r1"],
          reached: true,
        },
      },
    });
    expect(reached.querySelector(".gauges-overall")!.className).toContain(
      "reached",
    );
  });
});
