"""Realtime gateway between the session loop and a live human operator.

One logical owner advances the simulation at the plant's fixed 1 ms step;
network ingress lands in a latest-value mailbox sampled only at tick
boundaries, egress is fire-and-forget per-client queues. Broadcasting reads
state and never writes it, so simulation results are independent of client
presence, message timing, and broadcast rate. State frames go out at 60 Hz of
simulation time.

Wire protocol: one JSON object per websocket frame,
{"kind", "seq", "t", "payload"} server-to-client with seq strictly increasing
per connection; client-to-server frames are {"kind": "input"|"tlx_submit",
"payload": ...}. Kinds: hello | session_start | tick_state | input |
trial_event | tlx_submit | session_summary | error.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import os
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .avoidance import PersonModel
from .engine import Session, SimHuman, SimHumanParams, TrialEvent
from .errors import BindFailure, SessionComplete, TrialLogError
from .geometry import Vec2, clamp_magnitude
from .metrics import (
    SessionSummary,
    TlxResponse,
    TrialRecord,
    summarize_session,
    weights_from_pairs,
)
from .partner import RobotPartner, RobotPartnerConfig, Role
from .plant import BodyState, PlantParams
from .trials import SessionConfig, TrialPhase
from .triallog import make_trial_record, read_trial_log, sidecar_path, write_trial_log

log = logging.getLogger(__name__)

BROADCAST_HZ = 60.0
STALE_INPUT_AFTER = 0.25   # s without input before the cursor force decays
STALE_DECAY_WINDOW = 0.1   # s over which the stale force ramps to zero

ROLE_BY_MODE = {
    "robot_follower": Role.FOLLOWER,
    "robot_equal": Role.EQUAL,
    "robot_leader": Role.LEADER,
}


@dataclass(frozen=True)
class InputMapping:
    """Cursor-to-force mapping standing in for the physical haptic handle."""

    cursor_spring_k: float = 400.0   # N/m
    cursor_damping: float = 5.0      # N*s/m
    cursor_force_cap: float = 40.0   # N

    def __post_init__(self):
        if self.cursor_spring_k < 0 or self.cursor_damping < 0:
            raise ValueError("mapping gains must be non-negative")
        if self.cursor_force_cap <= 0:
            raise ValueError("cursor force cap must be positive")


def map_cursor_to_force(cursor: Vec2, point: BodyState, mapping: InputMapping) -> Vec2:
    """Human force from the cursor: spring toward the cursor with viscous
    damping on the point, clamped to the cap."""
    fx = mapping.cursor_spring_k * (cursor.x - point.position.x) - (
        mapping.cursor_damping * point.velocity.x
    )
    fy = mapping.cursor_spring_k * (cursor.y - point.position.y) - (
        mapping.cursor_damping * point.velocity.y
    )
    fx, fy = clamp_magnitude(fx, fy, mapping.cursor_force_cap)
    return Vec2(fx, fy)


class CursorMailbox:
    """Latest-value cursor cell; newest input wins, sampled at tick
    boundaries. Stale input decays to zero instead of freezing."""

    def __init__(self, mapping: InputMapping):
        self.mapping = mapping
        self.cursor: Optional[Vec2] = None
        self.updated_at: float = -math.inf  # simulation seconds

    def update(self, cursor: Vec2, now: float) -> None:
        self.cursor = cursor
        self.updated_at = now

    def force(self, point: BodyState, now: float) -> Vec2:
        if self.cursor is None:
            return Vec2(0.0, 0.0)
        f = map_cursor_to_force(self.cursor, point, self.mapping)
        age = now - self.updated_at
        if age <= STALE_INPUT_AFTER:
            return f
        scale = 1.0 - (age - STALE_INPUT_AFTER) / STALE_DECAY_WINDOW
        if scale <= 0.0:
            return Vec2(0.0, 0.0)
        return Vec2(f.x * scale, f.y * scale)


class ReplayPartner:
    """Second 'human' replayed from a prior session log: the recorded human
    forces are applied as the partner force, aligned per (trial index, tick
    offset within the reach)."""

    def __init__(self, log_path: str):
        _, records, trajectories = read_trial_log(log_path)
        ordered = sorted(records, key=lambda r: r.trial_id)
        self._forces: list[np.ndarray] = [
            trajectories.get(r.trial_id, np.zeros((0, 9)))[:, 5:7] for r in ordered
        ]
        self._trial_counter = -1
        self._row = 0
        self._active = False

    def on_target(self, trial, now) -> None:
        self._trial_counter += 1
        self._row = 0
        self._active = self._trial_counter < len(self._forces)

    def on_trial_end(self) -> None:
        self._active = False

    def advance(self, dt: float) -> None:
        if self._active:
            self._row += 1

    def force(self, point: BodyState) -> Vec2:
        if not self._active:
            return Vec2(0.0, 0.0)
        rows = self._forces[self._trial_counter]
        if self._row >= len(rows):
            return Vec2(0.0, 0.0)
        return Vec2(float(rows[self._row, 0]), float(rows[self._row, 1]))


class SessionRunner:
    """Composes the session machine with a human-force source and persistence.

    Headless sessions are driven by the simulated human; live sessions sample
    the cursor mailbox. Robot modes attach the PD partner, replay mode
    attaches the recorded-human partner.
    """

    def __init__(
        self,
        cfg: SessionConfig,
        *,
        plant: PlantParams = PlantParams(),
        partner_cfg: Optional[RobotPartnerConfig] = None,
        person_model: Optional[PersonModel] = None,
        sim_human_params: Optional[SimHumanParams] = None,
        input_mapping: Optional[InputMapping] = None,
        replay_log: Optional[str] = None,
        live: bool = False,
        session_id: Optional[str] = None,
        out_dir: Optional[str] = None,
    ):
        self.cfg = cfg
        self.live = live
        self.session_id = session_id or f"{cfg.mode}-seed{cfg.seed}"
        self.out_dir = out_dir
        self.mailbox = CursorMailbox(input_mapping or InputMapping())

        partner = None
        if cfg.mode in ROLE_BY_MODE:
            pc = partner_cfg or RobotPartnerConfig()
            if pc.role != ROLE_BY_MODE[cfg.mode]:
                pc = RobotPartnerConfig(
                    kp=pc.kp,
                    kd=pc.kd,
                    role=ROLE_BY_MODE[cfg.mode],
                    force_cap=pc.force_cap,
                    plan_horizon=pc.plan_horizon,
                )
            partner = RobotPartner(pc, person_model or PersonModel())
        elif cfg.mode == "human_pair_replay":
            if replay_log is None:
                raise ValueError("human_pair_replay mode needs a replay log")
            partner = ReplayPartner(replay_log)

        sim_human = None
        if not live:
            sim_human = SimHuman(sim_human_params or SimHumanParams(seed=cfg.seed + 1))

        self.session = Session(cfg, plant=plant, partner=partner, sim_human=sim_human)
        self.records: list[TrialRecord] = []
        self.trajectories: dict[int, np.ndarray] = {}
        self.tlx: Optional[TlxResponse] = None
        self.summary: Optional[SessionSummary] = None
        self._flushed = 0

    @property
    def done(self) -> bool:
        return self.session.done

    def tick_once(self) -> list[TrialEvent]:
        if self.live:
            human = self.mailbox.force(self.session.state, self.session.state.time)
        else:
            human = self.session.human_force_for_tick()
        events = self.session.tick(human)
        for ev in events:
            if ev.kind == "trial_complete":
                self._flush_completed()
        return events

    def _flush_completed(self) -> None:
        side_name = os.path.basename(sidecar_path(self._log_path() or "session.jsonl"))
        while self._flushed < len(self.session.completed):
            spec, outcome = self.session.completed[self._flushed]
            path_ref = f"{side_name}:{spec.trial_id}"
            self.records.append(
                make_trial_record(self.session_id, self.cfg.mode, spec, outcome, path_ref)
            )
            self.trajectories[spec.trial_id] = np.array(outcome.path)
            self._flushed += 1

    def _log_path(self) -> Optional[str]:
        if self.out_dir is None:
            return None
        return os.path.join(self.out_dir, f"{self.session_id}.jsonl")

    def submit_tlx(self, tlx: TlxResponse) -> None:
        self.tlx = tlx
        if self.summary is not None:
            # Session already summarized: fold the late questionnaire in.
            self.summary = summarize_session(self.records, tlx)
            self._write_summary()

    def finalize(self) -> SessionSummary:
        """Summarize and persist; idempotent."""
        if self.summary is None:
            self._flush_completed()
            self.summary = summarize_session(self.records, self.tlx)
            path = self._log_path()
            if path is not None:
                os.makedirs(self.out_dir, exist_ok=True)
                write_trial_log(
                    path,
                    self.records,
                    self.trajectories,
                    header_extra={
                        "session_id": self.session_id,
                        "mode": self.cfg.mode,
                        "seed": self.cfg.seed,
                        "trials_per_session": self.cfg.trials_per_session,
                        "dwell_time": self.cfg.dwell_time,
                        "start_radius": self.cfg.start_radius,
                        "obstacle_enabled": self.cfg.obstacle_enabled,
                        "widths": self.cfg.widths,
                        "start": list(self.cfg.start),
                        "direction": list(self.cfg.direction),
                    },
                )
                self._write_summary()
        return self.summary

    def _write_summary(self) -> None:
        if self.out_dir is None or self.summary is None:
            return
        path = os.path.join(self.out_dir, f"{self.session_id}.summary.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary.to_dict(), fh, indent=2)
            fh.write("\n")

    def run_to_completion(self) -> SessionSummary:
        while not self.session.done:
            self.tick_once()
        return self.finalize()

    # --- wire payload builders -------------------------------------------

    def tick_state_payload(self) -> dict:
        s = self.session
        target = None
        obstacle = None
        trial = s.current_trial
        if trial is not None and s.target_visible():
            target = {"center": list(trial.target_center), "width": trial.target_width}
            if trial.obstacle is not None:
                obstacle = [list(trial.obstacle.endpoint_a), list(trial.obstacle.endpoint_b)]
        return {
            "point": {"position": list(s.state.position), "velocity": list(s.state.velocity)},
            "target": target,
            "obstacle": obstacle,
            "phase": s.phase.value,
            "robot_force": list(s.last_robot_force),
        }

    def hello_payload(self) -> dict:
        return {
            "session_id": self.session_id,
            "mode": self.cfg.mode,
            "trial_count": len(self.session.trials),
            "completed": len(self.session.completed),
            "state": self.tick_state_payload(),
        }


class ClientHub:
    """Per-connection outbound queues with strictly increasing, gap-free seq
    numbers; sends never block the tick loop (enqueue only, unbounded: a
    session's frame count is finite and a dropped frame would be a seq gap)."""

    def __init__(self):
        self._clients: dict[object, dict] = {}

    def add(self, key: object, role: str) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue()
        self._clients[key] = {"queue": q, "seq": 0, "role": role}
        return q

    def remove(self, key: object) -> None:
        self._clients.pop(key, None)

    def has_driver(self) -> bool:
        return any(c["role"] == "driver" for c in self._clients.values())

    def any_clients(self) -> bool:
        return bool(self._clients)

    def send_to(self, key: object, kind: str, t: float, payload: dict) -> None:
        client = self._clients.get(key)
        if client is None:
            return
        client["seq"] += 1
        frame = {"kind": kind, "seq": client["seq"], "t": t, "payload": payload}
        client["queue"].put_nowait(frame)

    def broadcast(self, kind: str, t: float, payload: dict) -> None:
        for key in list(self._clients):
            self.send_to(key, kind, t, payload)


def _parse_tlx(payload: dict) -> TlxResponse:
    ratings = tuple(float(r) for r in payload["ratings"])
    if "weights" in payload and payload["weights"] is not None:
        weights = tuple(int(w) for w in payload["weights"])
    else:
        weights = weights_from_pairs(payload["pairs"])
    return TlxResponse(ratings=ratings, weights=weights)


def create_app(runner: SessionRunner, realtime: bool = False, ticks_per_slice: int = 200):
    """FastAPI app serving one session over /ws.

    realtime paces the loop on a monotonic clock (1 kHz simulation, 60 Hz
    state frames); otherwise the loop runs as fast as possible while still
    yielding to the event loop between slices. Simulation results do not
    depend on pacing or clients.
    """

    @asynccontextmanager
    async def lifespan(app_):
        app_.state.loop_task = asyncio.create_task(session_loop())
        yield
        app_.state.loop_task.cancel()

    app = FastAPI(lifespan=lifespan)
    app.state.runner = runner
    hub = ClientHub()
    app.state.hub = hub
    app.state.loop_error = None

    broadcast_dt = 1.0 / BROADCAST_HZ

    async def session_loop():
        next_broadcast = 0.0
        dt = runner.session.plant.dt
        start_wall = time.monotonic()
        start_sim = runner.session.state.time
        try:
            while not runner.done:
                if runner.live and not hub.has_driver():
                    # Driving client away: hold the session frozen at this
                    # tick boundary until reconnect.
                    await asyncio.sleep(0.02)
                    start_wall = time.monotonic() - (runner.session.state.time - start_sim)
                    continue
                for _ in range(1 if realtime else ticks_per_slice):
                    if runner.done:
                        break
                    events = runner.tick_once()
                    now = runner.session.state.time
                    for ev in events:
                        hub.broadcast(
                            "trial_event",
                            now,
                            {"event": ev.kind, "trial_id": ev.trial_id, "time": ev.time, **ev.payload},
                        )
                    if now >= next_broadcast:
                        if hub.any_clients():
                            hub.broadcast("tick_state", now, runner.tick_state_payload())
                        next_broadcast += broadcast_dt
                if realtime:
                    target = start_wall + (runner.session.state.time - start_sim)
                    delay = target - time.monotonic()
                    if delay > 0:
                        await asyncio.sleep(delay)
                    else:
                        await asyncio.sleep(0)
                else:
                    await asyncio.sleep(0)
            summary = runner.finalize()
            hub.broadcast("session_summary", runner.session.state.time, summary.to_dict())
        except SessionComplete:
            pass
        except Exception as exc:  # surfaced to clients, logged for the operator
            log.exception("session loop failed")
            app.state.loop_error = str(exc)
            hub.broadcast("error", runner.session.state.time, {"message": str(exc)})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        role = ws.query_params.get("role", "driver" if runner.live else "observer")
        await ws.accept()
        q = hub.add(ws, role)
        hub.send_to(ws, "hello", runner.session.state.time, runner.hello_payload())
        hub.send_to(
            ws,
            "session_start",
            runner.session.state.time,
            {
                "session_id": runner.session_id,
                "mode": runner.cfg.mode,
                "trial_count": len(runner.session.trials),
            },
        )
        if runner.summary is not None:
            # Late joiner: the completion broadcast already went out.
            hub.send_to(
                ws, "session_summary", runner.session.state.time, runner.summary.to_dict()
            )

        async def sender():
            while True:
                frame = await q.get()
                await ws.send_text(json.dumps(frame))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    kind = msg.get("kind")
                    payload = msg.get("payload", {})
                    if kind == "input":
                        cx, cy = payload["cursor"]
                        runner.mailbox.update(
                            Vec2(float(cx), float(cy)), runner.session.state.time
                        )
                    elif kind == "tlx_submit":
                        runner.submit_tlx(_parse_tlx(payload))
                        if runner.summary is not None:
                            hub.broadcast(
                                "session_summary",
                                runner.session.state.time,
                                runner.summary.to_dict(),
                            )
                    else:
                        hub.send_to(
                            ws,
                            "error",
                            runner.session.state.time,
                            {"message": f"unknown kind {kind!r}"},
                        )
                except (KeyError, TypeError, ValueError) as exc:
                    hub.send_to(
                        ws, "error", runner.session.state.time, {"message": str(exc)}
                    )
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            hub.remove(ws)

    return app


def run_session(
    cfg: SessionConfig,
    partner: Optional[RobotPartnerConfig] = None,
    endpoint: Optional[str] = None,
    *,
    person_model: Optional[PersonModel] = None,
    sim_human_params: Optional[SimHumanParams] = None,
    input_mapping: Optional[InputMapping] = None,
    replay_log: Optional[str] = None,
    live: bool = False,
    realtime: Optional[bool] = None,
    out_dir: Optional[str] = None,
    session_id: Optional[str] = None,
) -> SessionSummary:
    """Run one session to completion and return its summary.

    Without an endpoint the session runs headless (simulated human). With an
    endpoint ("host:port") the websocket service is started and the loop runs
    there until the session finishes; BindFailure is raised when the port
    cannot be bound.
    """
    runner = SessionRunner(
        cfg,
        partner_cfg=partner,
        person_model=person_model,
        sim_human_params=sim_human_params,
        input_mapping=input_mapping,
        replay_log=replay_log,
        live=live,
        session_id=session_id,
        out_dir=out_dir,
    )
    if endpoint is None:
        return runner.run_to_completion()

    import socket

    import uvicorn

    host, _, port_s = endpoint.rpartition(":")
    host = host or "127.0.0.1"
    app = create_app(runner, realtime=True if realtime is None else realtime)

    # Bind here so a taken port surfaces as BindFailure, not a process exit
    # from inside the server library.
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, int(port_s)))
    except OSError as exc:
        sock.close()
        raise BindFailure(f"could not bind {endpoint}: {exc}") from exc

    async def serve() -> None:
        config = uvicorn.Config(app, log_level="warning")
        server = uvicorn.Server(config)
        serve_task = asyncio.create_task(server.serve(sockets=[sock]))
        try:
            while not runner.done and not serve_task.done():
                await asyncio.sleep(0.05)
            # Give clients a moment to drain the summary frame.
            await asyncio.sleep(0.2)
        finally:
            server.should_exit = True
            try:
                await asyncio.wait_for(serve_task, timeout=5.0)
            except (asyncio.TimeoutError, asyncio.CancelledError):
                serve_task.cancel()

    try:
        asyncio.run(serve())
    finally:
        sock.close()
    if not runner.done:
        raise TrialLogError("service stopped before the session completed")
    return runner.finalize()
