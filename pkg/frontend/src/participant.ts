/**
 * Participant estimation form.
 *
 * One row per quantity: an input prefilled with the participant's own
 * prior value (carried defaults still require explicit confirmation) and
 * the anonymized aggregate of the previous round (median and spread)
 * beside it. Raw peer estimates are never rendered: the view reads only
 * the aggregate fields of the report, whatever else a payload carries.
 */

import type { ConsensusReport, MyEstimates, SessionView } from "./types";

export interface ParticipantHandlers {
  onSubmit: (quantity: string, value: number) => void;
}

export function renderParticipantForm(
  view: SessionView,
  mine: MyEstimates,
  report: ConsensusReport | null,
  handlers: ParticipantHandlers,
): HTMLElement {
  const root = document.createElement("div");
  root.className = "participant-form";

  const status = document.createElement("div");
  status.className = "session-state";
  status.textContent =
    view.state === "round-active"
      ? `round ${view.active_round} of ${view.max_rounds} — submit or confirm every estimate`
      : `session ${view.state}`;
  root.appendChild(status);

  for (const quantity of view.quantities) {
    const row = document.createElement("div");
    row.className = "estimate-row";
    row.dataset.quantity = quantity;

    const label = document.createElement("label");
    label.textContent = quantity;

    const input = document.createElement("input");
    input.type = "number";
    input.min = "0";
    input.max = "1";
    input.step = "0.01";
    const confirmed = mine.current_round[quantity];
    const carried = mine.carried_defaults[quantity];
    if (confirmed !== undefined) {
      input.value = confirmed;
      row.classList.add("confirmed");
    } else if (carried !== undefined) {
      input.value = carried; // prefill only; still needs confirmation
      row.classList.add("needs-confirmation");
    }

    const error = document.createElement("span");
    error.className = "inline-error";

    const confirm = document.createElement("button");
    confirm.textContent = confirmed !== undefined ? "update" : "confirm";
    confirm.disabled = view.state !== "round-active";
    confirm.addEventListener("click", () => {
      const value = Number(input.value);
      if (input.value === "" || Number.isNaN(value) || value < 0 || value > 1) {
        error.textContent = "estimate must be a number in [0, 1]";
        return;
      }
      error.textContent = "";
      handlers.onSubmit(quantity, value);
    });

    row.append(label, input, confirm, error);

    const stats = report?.per_quantity[quantity];
    if (stats) {
      const feedback = document.createElement("span");
      feedback.className = "round-feedback";
      feedback.textContent = `prior round: median ${stats.median}, spread ${stats.min}–${stats.max}`;
      row.appendChild(feedback);
    }

    root.appendChild(row);
  }

  return root;
}
