/**
 * Moderator console: round control and consensus gauges.
 *
 * Actions mirror server truth only — buttons are enabled strictly from
 * the latest session view, and the deadlock override demands typed
 * confirmation before it is sent.
 */

import { renderConsensusGauges } from "./gauge";
import type { SessionView } from "./types";

export interface ModeratorHandlers {
  onOpenRound: () => void;
  onCloseRound: () => void;
  onFinalize: (force: boolean) => void;
}

export function renderModeratorConsole(
  view: SessionView,
  handlers: ModeratorHandlers,
): HTMLElement {
  const root = document.createElement("div");
  root.className = "moderator-console";

  const status = document.createElement("div");
  status.className = "session-state";
  status.textContent =
    `session ${view.session_id}: ${view.state}, ` +
    `${view.round_count}/${view.max_rounds} rounds, ` +
    `${view.participant_count} participants`;
  root.appendChild(status);

  const controls = document.createElement("div");
  controls.className = "controls";

  const openButton = document.createElement("button");
  openButton.textContent = "open round";
  openButton.disabled = view.state !== "open";
  openButton.addEventListener("click", handlers.onOpenRound);

  const closeButton = document.createElement("button");
  closeButton.disabled = !(view.state === "round-active" && view.missing_count === 0);
  closeButton.textContent =
    view.state === "round-active" && view.missing_count > 0
      ? `close round (${view.missing_count} estimates missing)`
      : "close round";
  closeButton.addEventListener("click", handlers.onCloseRound);

  const finalizeButton = document.createElement("button");
  finalizeButton.textContent = "finalize";
  finalizeButton.disabled = !(
    view.state === "open" && view.last_report?.overall_reached === true
  );
  finalizeButton.addEventListener("click", () => handlers.onFinalize(false));

  controls.append(openButton, closeButton, finalizeButton);
  root.appendChild(controls);

  if (view.state === "deadlocked") {
    const override = document.createElement("div");
    override.className = "override-dialog";
    const warning = document.createElement("p");
    warning.textContent =
      `round cap hit without consensus; type "${view.session_id}" to force ` +
      "finalization on the last round's medians (flagged in the audit trail)";
    const confirmInput = document.createElement("input");
    confirmInput.type = "text";
    confirmInput.placeholder = view.session_id;
    const overrideButton = document.createElement("button");
    overrideButton.textContent = "force finalize";
    overrideButton.addEventListener("click", () => {
      if (confirmInput.value === view.session_id) {
        handlers.onFinalize(true);
      }
    });
    override.append(warning, confirmInput, overrideButton);
    root.appendChild(override);
  }

  if (view.last_report) {
    root.appendChild(renderConsensusGauges(view.last_report));
  }

  if (view.final_estimates) {
    const finals = document.createElement("dl");
    finals.className = "final-estimates";
    for (const [quantity, value] of Object.entries(view.final_estimates)) {
      const dt = document.createElement("dt");
      dt.textContent = quantity;
      const dd = document.createElement("dd");
      dd.textContent = value;
      finals.append(dt, dd);
    }
    root.appendChild(finals);
  }

  return root;
}
