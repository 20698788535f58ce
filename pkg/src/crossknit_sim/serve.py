"""Streaming service: scan clock, WebSocket control channel, static assets.

One asyncio task owns the simulation (scan clock, robot state); subscribers
get immutable JSON snapshots through bounded per-client queues. A slow
client loses its oldest frames, never the scan clock. Clients steer the
simulation only through "inject_contact" and "command" messages.

HTTP requests on the same port serve the operator console from a static
directory (when built); WebSocket upgrades on any path join the stream.
"""

from __future__ import annotations

import asyncio
import http
import logging
import mimetypes
from dataclasses import replace
from pathlib import Path

import numpy as np
from websockets.asyncio.server import serve as ws_serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from .core import SensorConfig
from .pipeline import (
    CalibrationTable,
    Push,
    calibrate,
    classify_gesture,
    event_to_json,
    extract_events,
)
from .pressure import (
    ContactPatch,
    Disk,
    PressureField,
    TransferParams,
    field_to_resistance,
    patch_from_json,
)
from .robots import (
    ArmLimits,
    ArmState,
    BaseLimits,
    BaseState,
    CylinderMount,
    SectorMap,
    arm_velocity_command,
    gripper_command,
    kuri_base_command,
    kuri_head_command,
    step_arm,
    step_base,
)
from .scan import FrameSampler, ScanTiming, Scenario, frame_period_us
from .wire import config_message, dump_message, frame_message, parse_message
from .network import solve_full, _MatrixNetwork

logger = logging.getLogger(__name__)

MAX_INJECT_FORCE_N = 100.0


def quick_calibration(
    config: SensorConfig,
    params: TransferParams | None = None,
    forces=(5.0, 15.0, 25.0),
    indenter_radius_mm: float | None = None,
) -> CalibrationTable:
    """Per-taxel linear fit from a short simulated indenter ramp.

    Presses each taxel in turn and solves only that selection, the same way
    the physical calibration rig loads one spot at a time.
    """
    from .core import Frame

    params = params or TransferParams()
    radius = indenter_radius_mm or min(10.0, config.taxel_size_mm / 2.0 - 1.0)
    samples = []
    for i in range(config.rows):
        for j in range(config.cols):
            center = config.taxel_center_mm(i, j)
            for f in forces:
                field = PressureField(
                    (ContactPatch(Disk(radius), center, f, "cal"),)
                )
                matrix = field_to_resistance(field, config, params)
                code, _ = solve_full(_MatrixNetwork(config, matrix).topology(i, j))
                counts = np.zeros((config.rows, config.cols), dtype=np.int64)
                counts[i, j] = code
                samples.append((Frame(t_start_us=0, counts=counts), (i, j), f))
    return calibrate(samples)


class SimServer:
    """Owns the scan clock and fans frames out to subscribers."""

    def __init__(
        self,
        config: SensorConfig,
        params: TransferParams | None = None,
        timing: ScanTiming | None = None,
        robot_mode: str = "none",
        scenario: Scenario | None = None,
        speed: float = 1.0,
        snapshot: bool = False,
        static_dir: str | None = None,
        calibration: CalibrationTable | None = None,
        queue_size: int = 16,
    ):
        if robot_mode not in ("none", "arm", "kuri"):
            raise ValueError("robot_mode must be none, arm, or kuri")
        self.config = config
        self.params = params or TransferParams()
        self.timing = timing or ScanTiming.from_config(config)
        self.robot_mode = robot_mode
        self.scenario = scenario
        self.speed = speed
        self.static_dir = Path(static_dir) if static_dir else None
        self.queue_size = queue_size
        self.calibration = calibration

        self.period_us = frame_period_us(config, self.timing)
        self._injected: dict[int, dict[str, ContactPatch]] = {}
        self._injection_version = 0
        self._merged_cache: tuple[tuple, PressureField] | None = None
        self.sampler = FrameSampler(
            config, self._field_at, params=self.params, timing=self.timing,
            snapshot=snapshot,
        )
        self.seq = 0
        self._subscribers: dict[object, asyncio.Queue] = {}
        self._server = None
        self._scan_task = None
        self._reset_robot()

    # -- simulation state ---------------------------------------------------

    def _reset_robot(self):
        self.arm_state = ArmState(ee_mm=(0.0, 0.0, 500.0))
        self.arm_limits = ArmLimits()
        self.mount = CylinderMount(radius_mm=max(30.0, self.config.grid_width_mm / (2 * np.pi) + 2.0))
        self.base_state = BaseState(linear_mm_s=200.0)
        self.base_limits = BaseLimits()
        self.sectors = SectorMap(n_cols=self.config.cols)

    def _field_at(self, t_us: float) -> PressureField:
        scenario_field = (
            self.scenario.field_at(t_us) if self.scenario else PressureField()
        )
        # frame sampling runs on an executor thread while injections land on
        # the event loop; _injected is replaced wholesale (never mutated), so
        # grabbing one reference here is race-free
        injected = self._injected
        key = (id(scenario_field), self._injection_version)
        cache = self._merged_cache
        if cache and cache[0] == key:
            return cache[1]
        patches = list(scenario_field.patches)
        for per_client in injected.values():
            patches.extend(per_client.values())
        merged = PressureField(tuple(patches), t_us=int(t_us))
        self._merged_cache = (key, merged)
        return merged

    def _step_robot(self, events, t_us: int) -> dict:
        msg = {"type": "robot_state", "mode": self.robot_mode, "t_us": t_us}
        if self.robot_mode == "arm":
            gesture = classify_gesture(events, self.config)
            self.arm_state = gripper_command(
                gesture, self.arm_state, t_us, self.arm_limits.gripper_refractory_us
            )
            velocity = np.zeros(3)
            if isinstance(gesture, Push) and gesture.force_n is not None:
                velocity = arm_velocity_command(
                    gesture.event, self.mount,
                    v_max_mm_s=self.arm_limits.v_max_mm_s,
                )
            self.arm_state = step_arm(
                self.arm_state, velocity, self.period_us, self.arm_limits
            )
            contact = None
            if isinstance(gesture, Push):
                x, y = gesture.centroid_mm
                contact = list(self.mount.surface_point_mm(x, y))
            msg.update(
                ee_mm=list(self.arm_state.ee_mm),
                gripper=self.arm_state.gripper.value,
                velocity_mm_s=list(self.arm_state.velocity_mm_s),
                contact_mm=contact,
                gesture=type(gesture).__name__.lower() if gesture else "none",
            )
        elif self.robot_mode == "kuri":
            real = [e for e in events if not e.ghost]
            event = max(real, key=lambda e: e.peak_reading) if real else None
            if event is not None and self.config.rows == 3:
                pitch, yaw = kuri_head_command(event, self.config)
                self.base_state = replace(
                    self.base_state, head_pitch=pitch, head_yaw_index=yaw
                )
            command = kuri_base_command(
                event, self.sectors, self.base_state, self.base_limits, self.config
            )
            self.base_state = step_base(self.base_state, command, self.period_us)
            msg.update(
                pose_mm=[self.base_state.x_mm, self.base_state.y_mm],
                heading_rad=self.base_state.heading_rad,
                linear_mm_s=self.base_state.linear_mm_s,
                angular_rad_s=self.base_state.angular_rad_s,
                head_pitch=self.base_state.head_pitch.value,
                head_yaw_index=self.base_state.head_yaw_index,
                sector=command.sector.value if command.sector else None,
            )
        return msg

    def step(self) -> list[dict]:
        """Advance one frame; returns the broadcast messages (test seam)."""
        frame = self.sampler.next_frame()
        t_us = int(frame.t_start_us)
        events = extract_events(frame, self.config, self.calibration)
        self.seq += 1
        messages = [
            frame_message(frame, [event_to_json(e) for e in events], seq=self.seq)
        ]
        if self.robot_mode != "none":
            messages.append(self._step_robot(events, t_us))
        return messages

    # -- subscribers ----------------------------------------------------------

    def _broadcast(self, messages: list[dict]) -> None:
        for msg in messages:
            text = dump_message(msg)
            for queue in self._subscribers.values():
                while queue.full():  # drop-oldest, never block the clock
                    try:
                        queue.get_nowait()
                    except asyncio.QueueEmpty:
                        break
                queue.put_nowait(text)

    def handle_client_message(self, client_id: int, raw) -> dict | None:
        """Apply one inbound message; returns an optional direct reply."""
        try:
            msg = parse_message(raw)
            if msg["type"] == "inject_contact":
                patches = {}
                for pj in msg.get("patches", []):
                    patch = patch_from_json(pj)
                    if not 0 <= patch.force_n <= MAX_INJECT_FORCE_N:
                        raise ValueError("injected force out of range")
                    PressureField((patch,)).check_bounds(self.config)
                    patches[patch.id or f"p{len(patches)}"] = patch
                self._injected = {**self._injected, client_id: patches}
                self._injection_version += 1
                return None
            if msg["type"] == "command":
                action = msg.get("action")
                if action == "clear":
                    self._injected = {
                        k: v for k, v in self._injected.items() if k != client_id
                    }
                    self._injection_version += 1
                    return None
                if action == "reset_robot":
                    self._reset_robot()
                    return None
                raise ValueError(f"unknown command action {action!r}")
            raise ValueError(f"clients may not send {msg['type']!r} messages")
        except ValueError as exc:
            return {"type": "command", "action": "error", "message": str(exc)}

    def drop_client(self, client_id: int, ws) -> None:
        self._subscribers.pop(ws, None)
        if client_id in self._injected:
            self._injected = {
                k: v for k, v in self._injected.items() if k != client_id
            }
            self._injection_version += 1

    # -- asyncio plumbing -----------------------------------------------------

    async def _scan_loop(self):
        loop = asyncio.get_running_loop()
        period_s = self.period_us / 1e6 / self.speed
        next_t = loop.time()
        while True:
            messages = await loop.run_in_executor(None, self.step)
            self._broadcast(messages)
            next_t += period_s
            delay = next_t - loop.time()
            if delay < -1.0:  # fell far behind; don't try to catch up
                next_t = loop.time()
            await asyncio.sleep(max(delay, 0.0))

    async def _handler(self, ws):
        client_id = id(ws)
        queue: asyncio.Queue = asyncio.Queue(maxsize=self.queue_size)
        self._subscribers[ws] = queue
        greeting = config_message(self.config, self.period_us, self.robot_mode)
        await ws.send(dump_message(greeting))

        async def pump():
            while True:
                await ws.send(await queue.get())

        pump_task = asyncio.create_task(pump())
        try:
            async for raw in ws:
                reply = self.handle_client_message(client_id, raw)
                if reply is not None:
                    await ws.send(dump_message(reply))
        finally:
            pump_task.cancel()
            self.drop_client(client_id, ws)

    def _process_request(self, connection, request):
        connection_hdr = request.headers.get("Connection", "").lower()
        upgrade_hdr = request.headers.get("Upgrade", "").lower()
        if "upgrade" in connection_hdr or upgrade_hdr == "websocket":
            return None  # proceed with the WebSocket handshake
        return self._static_response(connection, request.path)

    def _static_response(self, connection, path: str):
        if self.static_dir is None:
            return connection.respond(
                http.HTTPStatus.OK,
                "crossknit-sim stream: connect with a WebSocket client\n",
            )
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return connection.respond(http.HTTPStatus.NOT_FOUND, "not found\n")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        headers = Headers(
            [("Content-Type", ctype), ("Content-Length", str(len(body)))]
        )
        return Response(http.HTTPStatus.OK, "OK", headers, body)

    async def start(self, host: str = "127.0.0.1", port: int = 8765):
        self._server = await ws_serve(
            self._handler, host, port, process_request=self._process_request
        )
        self._scan_task = asyncio.create_task(self._scan_loop())
        return self._server

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def stop(self):
        if self._scan_task:
            self._scan_task.cancel()
        if self._server:
            self._server.close()
            await self._server.wait_closed()

    async def run_forever(self, host: str = "127.0.0.1", port: int = 8765):
        await self.start(host, port)
        logger.info("serving %s on ws://%s:%d/", self.config.name, host, self.port)
        try:
            await asyncio.Future()
        finally:
            await self.stop()
