/**
 * End-to-end round trip against the real session service: spawn the Python
 * CLI, steer trials with a scripted cursor over a live websocket, and check
 * that rendered positions track the broadcast state exactly and the
 * dashboard reproduces the persisted summary byte for byte.
 */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { SessionClient } from "../src/client.js";
import { Dashboard } from "../src/dashboard.js";
import { buildScene, scenePointPosition } from "../src/scene.js";
import { fitWorkspace } from "../src/transform.js";
import type { SessionSummaryPayload, TickStatePayload } from "../src/protocol.js";

const PORT = 8971;
let service: ChildProcess;
let outDir: string;
let stderrBuf = "";

beforeAll(async () => {
  outDir = mkdtempSync(join(tmpdir(), "reachbench-it-"));
  const conf = join(outDir, "session.conf");
  writeFileSync(
    conf,
    [
      "mode = individual",
      "seed = 3",
      "trials = 9",
      "obstacle = false",
      "dwell_time = 0.25",
      `port = ${PORT}`,
      `out_dir = ${outDir}`,
      "session_id = integration",
      "",
    ].join("\n"),
  );
  service = spawn("python3", ["-m", "reachbench.cli", "run", "--config", conf, "--no-realtime"], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  service.stderr!.on("data", (d) => (stderrBuf += String(d)));
  await waitForPort(PORT, 30_000);
}, 40_000);

afterAll(() => {
  service?.kill("SIGKILL");
});

async function waitForPort(port: number, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (service.exitCode !== null) {
      throw new Error(`service exited early (${service.exitCode}): ${stderrBuf}`);
    }
    const ok = await new Promise<boolean>((resolve) => {
      const probe = new WebSocket(`ws://127.0.0.1:${port}/ws?role=observer`);
      probe.once("open", () => {
        probe.close();
        resolve(true);
      });
      probe.once("error", () => resolve(false));
    });
    if (ok) return;
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`service did not come up on port ${port}: ${stderrBuf}`);
}

describe("service round trip", () => {
  it(
    "drives the session with a scripted cursor and mirrors the summary",
    async () => {
      const transform = fitWorkspace(900, 600, [0.125, 0], 0.45);
      const dashboard = new Dashboard();
      const trialResults: string[] = [];
      let renderChecks = 0;
      let summary: SessionSummaryPayload | null = null;

      const client = new SessionClient(
        `ws://127.0.0.1:${PORT}/ws?role=driver`,
        {
          onTickState: (state: TickStatePayload) => {
            // rendered point equals transform(tick_state.position) exactly
            const scene = buildScene(state, transform);
            const [px, py] = scenePointPosition(scene);
            const [ex, ey] = transform.worldToScreen(state.point.position);
            expect(px).toBe(ex);
            expect(py).toBe(ey);
            renderChecks += 1;
            // scripted cursor: pull toward the target, else back to start
            const goal = state.target ? state.target.center : ([0, 0] as [number, number]);
            client.publishCursor(goal, Date.now());
          },
          onTrialEvent: (ev) => {
            if (ev.event === "success" || ev.event === "failed_collision") {
              trialResults.push(ev.event);
            }
          },
          onSummary: (s) => {
            summary = s;
            dashboard.addSummary(s);
          },
        },
        {
          autoReconnect: false,
          // node has no global WebSocket; the ws package speaks the same surface
          socketFactory: (url) => new WebSocket(url) as unknown as import("../src/client.js").WebSocketLike,
        },
      );
      client.connect();

      const heartbeat = setInterval(() => client.heartbeat(Date.now()), 50);
      try {
        const deadline = Date.now() + 110_000;
        while (summary === null && Date.now() < deadline) {
          if (service.exitCode !== null && summary === null && trialResults.length === 0) {
            throw new Error(`service died: ${stderrBuf}`);
          }
          await new Promise((r) => setTimeout(r, 100));
        }
      } finally {
        clearInterval(heartbeat);
        client.close();
      }

      expect(summary).not.toBeNull();
      const got = summary as unknown as SessionSummaryPayload;
      expect(trialResults.length).toBeGreaterThanOrEqual(1);
      expect(trialResults).toContain("success");
      expect(renderChecks).toBeGreaterThan(10);
      expect(client.seqGaps).toBe(0);

      // dashboard values equal the persisted service summary byte-for-byte
      const persistedText = await retryRead(join(outDir, "integration.summary.json"));
      const persisted = JSON.parse(persistedText);
      const bar = dashboard.ipBars()[0];
      expect(bar.meanIp).toBe(persisted.mean_ip);
      const meanIpBytes = /"mean_ip":\s*([^,}\s]+)/.exec(persistedText)![1];
      expect(bar.meanIpText).toBe(meanIpBytes);
      const rows = dashboard.collisionRows();
      expect(rows[0].collisions).toBe(persisted.collisions);
      expect(got.collisions).toBe(persisted.collisions);
    },
    120_000,
  );
});

async function retryRead(path: string, attempts = 40): Promise<string> {
  for (let i = 0; i < attempts; i++) {
    try {
      return readFileSync(path, "utf-8");
    } catch {
      await new Promise((r) => setTimeout(r, 250));
    }
  }
  throw new Error(`file never appeared: ${path}`);
}
