/**
 * Application shell: token entry, role-appropriate view switching, and
 * the long-poll loop that keeps session views aligned with the server.
 */

import { ApiClient, ApiError, followSession } from "./api";
import { renderModeratorConsole } from "./moderator";
import { renderParticipantForm } from "./participant";
import { WhatIfExplorer } from "./whatif";
import type { Role, SessionView } from "./types";
import "./style.css";

const app = document.querySelector<HTMLDivElement>("#app")!;

interface Shell {
  api: ApiClient;
  role: Role;
  stopFollowing?: () => void;
}

let shell: Shell | null = null;

function errorLine(err: unknown): HTMLElement {
  const div = document.createElement("div");
  div.className = "error-line";
  div.textContent =
    err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  return div;
}

function renderLogin(): void {
  app.replaceChildren();
  const form = document.createElement("form");
  form.className = "login";
  form.innerHTML = `
    <h1>cloudrisk</h1>
    <label>access token <input name="token" type="password" required></label>
    <label>role
      <select name="role">
        <option value="viewer">viewer</option>
        <option value="participant">participant</option>
        <option value="moderator">moderator</option>
      </select>
    </label>
    <button type="submit">enter</button>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    shell = {
      api: new ApiClient(String(data.get("token"))),
      role: data.get("role") as Role,
    };
    renderHome();
  });
  app.replaceChildren(form);
}

function renderHome(): void {
  if (!shell) return renderLogin();
  shell.stopFollowing?.();
  app.replaceChildren();

  const nav = document.createElement("nav");
  const sessionInput = document.createElement("input");
  sessionInput.placeholder = "session id";
  const sessionButton = document.createElement("button");
  sessionButton.textContent =
    shell.role === "moderator" ? "moderate session" : "join session";
  sessionButton.addEventListener("click", () => {
    if (sessionInput.value) void renderSession(sessionInput.value);
  });

  const snapshotInput = document.createElement("input");
  snapshotInput.placeholder = "snapshot id";
  const orgInput = document.createElement("input");
  orgInput.placeholder = "org id";
  const whatIfButton = document.createElement("button");
  whatIfButton.textContent = "what-if explorer";
  whatIfButton.addEventListener("click", () => {
    if (snapshotInput.value && orgInput.value) {
      void renderWhatIf(orgInput.value, snapshotInput.value);
    }
  });

  nav.append(sessionInput, sessionButton, orgInput, snapshotInput, whatIfButton);
  app.appendChild(nav);
  const body = document.createElement("div");
  body.id = "view";
  app.appendChild(body);
}

async function renderSession(sessionId: string): Promise<void> {
  if (!shell) return;
  const body = document.querySelector<HTMLDivElement>("#view")!;
  const { api, role } = shell;

  const draw = async (view: SessionView) => {
    body.replaceChildren();
    try {
      if (role === "moderator") {
        body.appendChild(
          renderModeratorConsole(view, {
            onOpenRound: () => void act(() => api.openRound(sessionId)),
            onCloseRound: () => void act(() => api.closeRound(sessionId)),
            onFinalize: (force) => void act(() => api.finalize(sessionId, force)),
          }),
        );
      } else if (role === "participant") {
        const mine = await api.myEstimates(sessionId);
        body.appendChild(
          renderParticipantForm(view, mine, view.last_report ?? null, {
            onSubmit: (quantity, value) =>
              void act(() => api.submitEstimate(sessionId, quantity, value)),
          }),
        );
      } else {
        const pre = document.createElement("pre");
        pre.textContent = JSON.stringify(view, null, 2);
        body.appendChild(pre);
      }
    } catch (err) {
      body.appendChild(errorLine(err));
    }
  };

  // server truth drives the view; no optimistic round transitions
  const act = async (call: () => Promise<unknown>) => {
    try {
      await call();
    } catch (err) {
      body.prepend(errorLine(err));
    }
  };

  try {
    await draw(await api.sessionState(sessionId));
  } catch (err) {
    body.replaceChildren(errorLine(err));
    return;
  }
  shell.stopFollowing = followSession(api, sessionId, (view) => void draw(view));
}

async function renderWhatIf(orgId: string, snapshotId: string): Promise<void> {
  if (!shell) return;
  const body = document.querySelector<HTMLDivElement>("#view")!;
  body.replaceChildren();
  try {
    const snapshot = await shell.api.snapshot(snapshotId);
    if (snapshot.org_id !== orgId) {
      throw new ApiError("unknown_id", `snapshot belongs to ${snapshot.org_id}`);
    }
    const catalog = await shell.api
      .catalog()
      .then((c) => c.document)
      .catch(() => ({ countermeasures: [] }));
    const explorer = new WhatIfExplorer(shell.api, body, snapshot, catalog);
    await explorer.init();
  } catch (err) {
    body.replaceChildren(errorLine(err));
  }
}

renderLogin();
