/**
 * Consensus gauges: one bar per quantity showing the agreement ratio
 * against the session threshold.
 *
 * Displayed numbers are the service's strings, verbatim. parseFloat is
 * used only for bar geometry, never for displayed text.
 */

import type { ConsensusReport } from "./types";

export function renderConsensusGauges(report: ConsensusReport): HTMLElement {
  const root = document.createElement("div");
  root.className = "gauges";

  const heading = document.createElement("div");
  heading.className = "gauges-heading";
  heading.textContent = `round ${report.round_number} — threshold ${report.theta}, band ±${report.delta}`;
  root.appendChild(heading);

  for (const [quantity, stats] of Object.entries(report.per_quantity)) {
    const row = document.createElement("div");
    row.className = "gauge-row" + (stats.reached ? " reached" : " pending");
    row.dataset.quantity = quantity;

    const label = document.createElement("span");
    label.className = "gauge-label";
    label.textContent = quantity;

    const track = document.createElement("div");
    track.className = "gauge-track";
    const bar = document.createElement("div");
    bar.className = "gauge-bar";
    bar.style.width = `${Math.min(100, parseFloat(stats.ratio) * 100)}%`;
    const threshold = document.createElement("div");
    threshold.className = "gauge-threshold";
    threshold.style.left = `${parseFloat(String(report.theta)) * 100}%`;
    track.appendChild(bar);
    track.appendChild(threshold);

    const ratio = document.createElement("span");
    ratio.className = "gauge-ratio";
    ratio.textContent = stats.ratio;

    const state = document.createElement("span");
    state.className = "gauge-state";
    state.textContent = stats.reached ? "reached" : "open";

    row.append(label, track, ratio, state);
    root.appendChild(row);
  }

  const overall = document.createElement("div");
  overall.className =
    "gauges-overall " + (report.overall_reached ? "reached" : "pending");
  overall.textContent = report.overall_reached
    ? "consensus reached on every quantity"
    : "consensus not yet reached";
  root.appendChild(overall);

  return root;
}
