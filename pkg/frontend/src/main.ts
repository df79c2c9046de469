/**
 * App wiring: canvas + socket + forms. Configuration via URL query
 * parameters: ?endpoint=ws://127.0.0.1:8765/ws&scale=1600 (pixels per
 * meter; omit to fit the workspace automatically).
 *
 * Single-threaded event loop: socket callbacks only update the client's
 * latest-state cell; the render loop consumes it at display rate.
 */

import { SessionClient } from "./client.js";
import { Dashboard } from "./dashboard.js";
import { buildScene } from "./scene.js";
import { drawScene } from "./render.js";
import { ViewTransform, fitWorkspace } from "./transform.js";
import { TLX_FACTOR_LABELS, TLX_FACTORS, TLX_PAIRS, TlxFormState } from "./tlx.js";

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export function startApp(root: HTMLElement): void {
  const endpoint = param("endpoint", `ws://${window.location.hostname || "127.0.0.1"}:8765/ws`);
  const canvas = document.createElement("canvas");
  canvas.width = 900;
  canvas.height = 600;
  canvas.style.border = "1px solid #999";
  root.appendChild(canvas);

  const status = document.createElement("div");
  status.textContent = "connecting...";
  root.appendChild(status);

  const dashboardEl = document.createElement("div");
  root.appendChild(dashboardEl);

  const scaleParam = param("scale", "");
  const transform: ViewTransform = scaleParam
    ? new ViewTransform(Number(scaleParam), canvas.width / 4, canvas.height / 2)
    : fitWorkspace(canvas.width, canvas.height, [0.125, 0.0], 0.45);

  const dashboard = new Dashboard();
  const client = new SessionClient(endpoint, {
    onConnection: (up) => {
      status.textContent = up ? "connected" : "disconnected - reconnecting";
    },
    onTrialEvent: (ev) => {
      if (ev.event === "success" || ev.event === "failed_collision") {
        status.textContent = `trial ${ev.trial_id}: ${ev.event}`;
      }
    },
    onSummary: (summary) => {
      dashboard.addSummary(summary);
      renderDashboard(dashboardEl, dashboard);
      showTlxForm(root, client);
    },
    onProtocolError: (message) => console.warn(message),
  });
  client.connect();

  canvas.addEventListener("mousemove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    client.publishCursor(
      transform.screenToWorld([ev.clientX - rect.left, ev.clientY - rect.top]),
      performance.now(),
    );
  });
  window.setInterval(() => client.heartbeat(performance.now()), 50);

  const ctx = canvas.getContext("2d")!;
  const frame = () => {
    if (client.latestState) {
      drawScene(ctx, buildScene(client.latestState, transform), canvas.width, canvas.height);
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

export function renderDashboard(el: HTMLElement, dashboard: Dashboard): void {
  el.innerHTML = "";
  const heading = document.createElement("h3");
  heading.textContent = "Session results";
  el.appendChild(heading);

  for (const bar of dashboard.ipBars()) {
    const row = document.createElement("div");
    const swatch = document.createElement("span");
    swatch.style.display = "inline-block";
    swatch.style.height = "14px";
    swatch.style.width = `${Math.round(300 * bar.relativeWidth)}px`;
    swatch.style.background = "#47a";
    row.appendChild(swatch);
    const label = document.createElement("span");
    label.textContent = ` ${bar.label}: ${bar.meanIpText} bits/s`;
    row.appendChild(label);
    el.appendChild(row);
  }

  const table = document.createElement("table");
  for (const r of dashboard.collisionRows()) {
    const tr = document.createElement("tr");
    const name = document.createElement("td");
    name.textContent = r.label;
    const val = document.createElement("td");
    val.textContent = r.collisions;
    tr.appendChild(name);
    tr.appendChild(val);
    table.appendChild(tr);
  }
  el.appendChild(table);
}

export function showTlxForm(root: HTMLElement, client: SessionClient): void {
  const form = new TlxFormState();
  const box = document.createElement("div");
  box.style.border = "1px solid #777";
  box.style.padding = "8px";
  const title = document.createElement("h3");
  title.textContent = "Workload questionnaire";
  box.appendChild(title);

  for (const factor of TLX_FACTORS) {
    const row = document.createElement("label");
    row.style.display = "block";
    row.textContent = `${TLX_FACTOR_LABELS[factor]}: `;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "100";
    slider.step = "5";
    slider.value = "50";
    slider.addEventListener("input", () => form.setRating(factor, Number(slider.value)));
    row.appendChild(slider);
    box.appendChild(row);
  }

  const submit = document.createElement("button");
  submit.textContent = "submit (answer all pairs first)";
  submit.disabled = true;

  TLX_PAIRS.forEach((pair, index) => {
    const row = document.createElement("div");
    row.textContent = "more demanding? ";
    for (const factor of pair) {
      const btn = document.createElement("button");
      btn.textContent = factor;
      btn.addEventListener("click", () => {
        form.choose(index, factor);
        row.querySelectorAll("button").forEach((b) => (b.style.fontWeight = "normal"));
        btn.style.fontWeight = "bold";
        submit.disabled = !form.complete();
        submit.textContent = form.complete()
          ? "submit"
          : `submit (${form.answeredCount()}/15 pairs)`;
      });
      row.appendChild(btn);
    }
    box.appendChild(row);
  });

  submit.addEventListener("click", () => {
    client.submitTlx(form.submitPayload());
    box.remove();
  });
  box.appendChild(submit);
  root.appendChild(box);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app")!);
}
