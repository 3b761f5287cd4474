/**
 * What-if treatment explorer.
 *
 * Toggling a countermeasure asks the service to recompute the plan and
 * re-renders residual bars against the tolerance line. Every rendered
 * number is a service-provided string, byte-for-byte; the client does
 * no arithmetic beyond bar geometry.
 */

import type { ApiClient } from "./api";
import type { CatalogDoc, EvaluationPayload, SnapshotDoc } from "./types";

export class WhatIfExplorer {
  private plan: string[] = [];
  private mode: string;
  private evaluation: EvaluationPayload | null = null;

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
    private snapshot: SnapshotDoc,
    private catalog: CatalogDoc,
    mode = "full",
  ) {
    this.mode = mode;
  }

  /** Evaluate the empty plan so the bars start at the original levels. */
  async init(): Promise<void> {
    this.evaluation = await this.api.evaluate(
      this.snapshot.org_id,
      this.snapshot.snapshot_id,
      this.plan,
      this.mode,
    );
    this.render();
  }

  async toggle(countermeasureId: string): Promise<void> {
    this.evaluation = await this.api.whatIf(
      this.snapshot.org_id,
      this.snapshot.snapshot_id,
      this.plan,
      countermeasureId,
      this.mode,
    );
    this.plan = [...this.evaluation.plan];
    this.render();
  }

  async setMode(mode: string): Promise<void> {
    this.mode = mode;
    this.evaluation = await this.api.evaluate(
      this.snapshot.org_id,
      this.snapshot.snapshot_id,
      this.plan,
      this.mode,
    );
    this.render();
  }

  render(): void {
    const ev = this.evaluation;
    if (!ev) return;
    this.container.replaceChildren();

    const toggles = document.createElement("div");
    toggles.className = "cm-toggles";
    for (const cm of this.catalog.countermeasures) {
      const label = document.createElement("label");
      label.className = "cm-toggle";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.dataset.cm = cm.id;
      box.checked = this.plan.includes(cm.id);
      box.addEventListener("change", () => void this.toggle(cm.id));
      const text = document.createElement("span");
      text.textContent = `${cm.id} — ${cm.name} (cost ${cm.cost})`;
      label.append(box, text);
      toggles.appendChild(label);
    }
    this.container.appendChild(toggles);

    const modeSelect = document.createElement("select");
    modeSelect.className = "mode-select";
    for (const mode of ["full", "paper-compat"]) {
      const option = document.createElement("option");
      option.value = mode;
      option.textContent = mode;
      option.selected = mode === this.mode;
      modeSelect.appendChild(option);
    }
    modeSelect.addEventListener("change", () => void this.setMode(modeSelect.value));
    this.container.appendChild(modeSelect);

    if (!ev.feasible) {
      const banner = document.createElement("div");
      banner.className = "infeasible-banner";
      banner.textContent =
        "infeasible: residual risk stays at or above tolerance " +
        `${ev.alpha} even with this plan`;
      this.container.appendChild(banner);
    }

    const bars = document.createElement("div");
    bars.className = "residual-bars";
    const alpha = parseFloat(ev.alpha);
    for (const risk of this.snapshot.risks) {
      const rid = risk.id;
      const row = document.createElement("div");
      row.className = "residual-row";
      row.dataset.risk = rid;
      const classification = ev.classifications[rid];
      row.classList.add(classification === "acceptable" ? "ok" : "hot");

      const label = document.createElement("span");
      label.className = "risk-label";
      label.textContent = rid;

      const track = document.createElement("div");
      track.className = "bar-track";
      const before = document.createElement("div");
      before.className = "bar-before";
      before.style.width = `${parseFloat(ev.values.levels[rid]) * 100}%`;
      const bar = document.createElement("div");
      bar.className = "bar-residual";
      bar.style.width = `${parseFloat(ev.values.residuals[rid]) * 100}%`;
      const alphaLine = document.createElement("div");
      alphaLine.className = "alpha-line";
      alphaLine.style.left = `${alpha * 100}%`;
      track.append(before, bar, alphaLine);

      const residual = document.createElement("span");
      residual.className = "residual-value";
      residual.textContent = ev.display.residuals[rid];

      row.append(label, track, residual);
      bars.appendChild(row);
    }
    this.container.appendChild(bars);

    const summary = document.createElement("dl");
    summary.className = "whatif-summary";
    const entries: [string, string][] = [
      ["mode", ev.display.mode],
      ["plan", ev.plan.join(", ") || "(none)"],
      ["total cost", ev.total_cost],
      ["GRL before", ev.display.grl_before],
      ["GRL after", ev.display.grl_after],
      ["GRR", ev.display.grr],
      ["risk reduction", ev.display.reduction_percent],
    ];
    for (const [term, value] of entries) {
      const dt = document.createElement("dt");
      dt.textContent = term;
      const dd = document.createElement("dd");
      dd.textContent = value;
      summary.append(dt, dd);
    }
    this.container.appendChild(summary);
  }
}
