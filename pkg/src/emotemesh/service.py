"""Live puppeteering service: one engine instance ticking at a fixed frame
rate, operator commands applied at frame boundaries, frames fanned out to
subscribers.

The session core is synchronous and transport-free: submit() queues a
command, step() advances exactly one frame. The async bindings (WebSocket
and a newline-delimited TCP fallback carrying identical payloads) only
schedule step() against the wall clock and shuttle JSON. That split keeps
every timing rule testable without real time, and makes replay trivial:
feed a logged command sequence back into a fresh core and step it.

Session time is frame_index / fps, never wall time. A session that falls
behind the wall clock emits late frames rather than skipping them, so the
command log replays to identical intensities either way.
"""

from __future__ import annotations

import asyncio
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .animator import Frame, MorphTargetSet, bake_morph_targets, frame_displacements, save_morphs
from .engine import EmotionalState
from .errors import EmoteMeshError
from .features import FEATURES
from .rig import Mesh, Rig, save_rig
from .table import ExpressionTable, builtin_table

MAX_FPS = 120.0

ENGINE_COMMANDS = ("trigger", "set_pad", "set_mode", "reset")
PAYLOADS = ("intensities", "features", "both")


class CommandError(EmoteMeshError):
    """A rejected command; the session state is untouched."""


@dataclass
class ServiceConfig:
    table: ExpressionTable = field(default_factory=builtin_table)
    rig: "Rig | None" = None
    mesh: "Mesh | None" = None
    fps: float = 30.0
    tau_s: float = 60.0
    mode: str = "categorical"
    log_path: "Path | None" = None

    def __post_init__(self):
        if not 1.0 <= self.fps <= MAX_FPS:
            raise ValueError(f"fps must be within [1, {MAX_FPS:g}], got {self.fps}")
        if (self.rig is None) != (self.mesh is None):
            raise ValueError("rig and mesh must be provided together")


@dataclass
class Subscription:
    fps: float
    payload: str
    stride: int


class Peer:
    """One connected client: a control message lane plus a one-slot frame
    lane. Frames overwrite each other (latest wins); control messages
    (acks, errors, assets) are never dropped."""

    def __init__(self):
        self.control: deque[dict] = deque()
        self.frame_slot: "dict | None" = None
        self.subscription: "Subscription | None" = None
        self.last_frame_t = -1.0
        self.closed = False
        self.wake = asyncio.Event() if _in_event_loop() else None

    def push_control(self, message: dict):
        self.control.append(message)
        if self.wake is not None:
            self.wake.set()

    def push_frame(self, message: dict):
        self.frame_slot = message
        if self.wake is not None:
            self.wake.set()

    def drain(self) -> list[dict]:
        """All pending outgoing messages, frame last. For tests and replay."""
        out = list(self.control)
        self.control.clear()
        if self.frame_slot is not None:
            out.append(self.frame_slot)
            self.frame_slot = None
        return out


def _in_event_loop() -> bool:
    try:
        asyncio.get_running_loop()
        return True
    except RuntimeError:
        return False


class Session:
    """Engine plus subscribers plus the append-only command log."""

    def __init__(self, config: "ServiceConfig | None" = None):
        self.config = config or ServiceConfig()
        self.table = self.config.table
        self.state = EmotionalState(tau_s=self.config.tau_s, mode=self.config.mode)
        self.frame_index = 0
        self.peers: list[Peer] = []
        self.pending: deque[tuple[dict, "Peer | None"]] = deque()
        self.command_log: list[dict] = []
        self.morphs: "MorphTargetSet | None" = None
        if self.config.rig is not None and self.config.mesh is not None:
            self.morphs = bake_morph_targets(self.config.mesh, self.config.rig, self.table)
        self._log_file = None
        if self.config.log_path is not None:
            self._log_file = open(self.config.log_path, "a", encoding="utf-8")

    @property
    def clock(self) -> float:
        """Time of the next frame to be emitted."""
        return self.frame_index / self.config.fps

    def close(self):
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- command ingress ----------------------------------------------------

    def submit(self, command: dict, peer: "Peer | None" = None):
        """Queue an engine command; it applies at the next frame boundary."""
        self.pending.append((command, peer))

    def attach(self, peer: Peer):
        self.peers.append(peer)

    def detach(self, peer: Peer):
        peer.closed = True
        if peer in self.peers:
            self.peers.remove(peer)

    def handle_message(self, message: dict, peer: Peer):
        """Route one client message: immediate replies for subscription and
        asset requests, frame-boundary queueing for engine commands."""
        if not isinstance(message, dict) or "type" not in message:
            peer.push_control({"type": "error", "msg": "message must be an object with a type field"})
            return
        kind = message["type"]
        if kind == "subscribe":
            try:
                peer.subscription = self._build_subscription(message)
                peer.push_control({"type": "ack", "t": self.clock})
            except CommandError as e:
                peer.push_control({"type": "error", "msg": str(e)})
        elif kind == "get_assets":
            if self.config.rig is None:
                peer.push_control({"type": "error", "msg": "no rig loaded, assets unavailable"})
            else:
                mesh = self.config.mesh
                peer.push_control(
                    {
                        "type": "assets",
                        "mesh": {
                            "vertices": [[float(c) for c in row] for row in mesh.vertices],
                            "faces": [[int(i) for i in face] for face in mesh.face_indices()],
                        },
                        "rig": save_rig(self.config.rig),
                        "morphs": save_morphs(self.morphs),
                    }
                )
        elif kind in ENGINE_COMMANDS:
            self.submit(message, peer)
        else:
            peer.push_control({"type": "error", "msg": f"unknown command type: {kind!r}"})

    def _build_subscription(self, message: dict) -> Subscription:
        fps = message.get("fps", self.config.fps)
        if not (isinstance(fps, (int, float)) and 1.0 <= fps <= self.config.fps):
            raise CommandError(f"subscriber fps must be within [1, {self.config.fps:g}]")
        payload = message.get("payload", "intensities")
        if payload not in PAYLOADS:
            raise CommandError(f"payload must be one of {', '.join(PAYLOADS)}")
        if payload in ("features", "both") and self.config.rig is None:
            raise CommandError("no rig loaded, feature payloads unavailable")
        return Subscription(fps=float(fps), payload=payload, stride=max(1, round(self.config.fps / fps)))

    # -- frame loop ---------------------------------------------------------

    def _apply(self, command: dict, t: float):
        kind = command.get("type")
        if kind == "trigger":
            label = command.get("label")
            if not isinstance(label, str):
                raise CommandError("trigger needs a string label")
            # canonicalize so streamed intensity maps key the morph targets
            label = self.table.resolve(label)
            intensity = command.get("intensity", 1.0)
            if not isinstance(intensity, (int, float)):
                raise CommandError("trigger intensity must be a number")
            self.state.trigger(label, float(intensity), at=t)
        elif kind == "set_pad":
            try:
                p, a, d = (float(command[k]) for k in ("p", "a", "d"))
            except (KeyError, TypeError, ValueError):
                raise CommandError("set_pad needs numeric p, a, d") from None
            self.state.set_pad(p, a, d)
        elif kind == "set_mode":
            mode = command.get("mode")
            if mode not in ("categorical", "factor"):
                raise CommandError("mode must be 'categorical' or 'factor'")
            self.state.set_mode(mode)
        elif kind == "reset":
            self.state.reset()
        else:
            raise CommandError(f"unknown command type: {kind!r}")

    def step(self) -> animator.Frame:
        """Advance one frame: tick, apply queued commands, fan out."""
        t = self.clock
        self.state.tick_to(t)

        while self.pending:
            command, peer = self.pending.popleft()
            try:
                self._apply(command, t)
            except (CommandError, EmoteMeshError, ValueError) as e:
                if peer is not None:
                    peer.push_control({"type": "error", "msg": str(e)})
                continue
            self._log_command(t, command)
            if peer is not None:
                peer.push_control({"type": "ack", "t": t})

        emotion, mood = self.state.levels()
        features = None
        if any(p.subscription and p.subscription.payload in ("features", "both") for p in self.peers):
            features = frame_displacements(self.table, emotion, mood)

        base = {
            "type": "frame",
            "t": t,
            "emotion": {k: emotion[k] for k in sorted(emotion)},
            "mood": {k: mood[k] for k in sorted(mood)},
        }
        for peer in self.peers:
            sub = peer.subscription
            if sub is None or self.frame_index % sub.stride != 0:
                continue
            message = dict(base)
            if sub.payload in ("features", "both") and features is not None:
                message["features"] = {name: list(features[name]) for name in FEATURES}
            if t > peer.last_frame_t:  # timestamps strictly increase per peer
                peer.last_frame_t = t
                peer.push_frame(message)

        self.frame_index += 1
        frame_features = features if features is not None else frame_displacements(self.table, emotion, mood)
        return Frame(t=t, emotion=emotion, mood=mood, features=frame_features)

    def _log_command(self, t: float, command: dict):
        entry = {"t": t, "command": command}
        self.command_log.append(entry)
        if self._log_file is not None:
            self._log_file.write(json.dumps(entry, separators=(",", ":")) + "\n")
            self._log_file.flush()


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


def load_command_log(text: str) -> list[dict]:
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        entry = json.loads(line)
        if "t" not in entry or "command" not in entry:
            raise ValueError(f"line {lineno}: log entries need t and command fields")
        entries.append(entry)
    return entries


def replay_log(entries: list[dict], config: "ServiceConfig | None" = None, duration_s: "float | None" = None):
    """Re-run a logged command sequence offline.

    Commands were logged with the frame time they applied at, so feeding
    them back at those exact times reproduces the original intensity
    stream. Returns the full frame list.
    """
    session = Session(config)
    fps = session.config.fps
    if duration_s is None:
        last = max((e["t"] for e in entries), default=0.0)
        duration_s = last + 2.0
    total = round(duration_s * fps)
    pending = sorted(entries, key=lambda e: e["t"])
    frames = []
    for k in range(total):
        t = k / fps
        while pending and pending[0]["t"] <= t:
            session.submit(pending.pop(0)["command"])
        frames.append(session.step())
    session.close()
    return frames


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


def _encode(message: dict) -> str:
    return json.dumps(message, separators=(",", ":"))


async def _writer_loop(peer: Peer, send):
    """Drain a peer's lanes in order: all control traffic, then the newest
    frame. Runs until the connection drops."""
    while not peer.closed:
        await peer.wake.wait()
        peer.wake.clear()
        while peer.control or peer.frame_slot is not None:
            if peer.control:
                message = peer.control.popleft()
            else:
                message, peer.frame_slot = peer.frame_slot, None
            await send(_encode(message))


async def _session_loop(session: Session):
    loop = asyncio.get_running_loop()
    start = loop.time()
    while True:
        target = start + session.clock
        delay = target - loop.time()
        if delay > 0:
            await asyncio.sleep(delay)
        session.step()


def _handle_text(session: Session, peer: Peer, text: str):
    try:
        message = json.loads(text)
    except json.JSONDecodeError:
        peer.push_control({"type": "error", "msg": "message is not valid JSON"})
        return
    session.handle_message(message, peer)


async def serve(
    config: ServiceConfig,
    host: str = "127.0.0.1",
    port: int = 8765,
    tcp_port: "int | None" = None,
    ready: "asyncio.Event | None" = None,
):
    """Run the service until cancelled. WebSocket endpoint at /ws; when
    tcp_port is given, the same protocol is also spoken newline-delimited
    over plain TCP."""
    from aiohttp import WSMsgType, web

    session = Session(config)

    async def ws_handler(request):
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        peer = Peer()
        session.attach(peer)
        writer = asyncio.ensure_future(_writer_loop(peer, ws.send_str))
        try:
            async for msg in ws:
                if msg.type == WSMsgType.TEXT:
                    _handle_text(session, peer, msg.data)
                elif msg.type == WSMsgType.ERROR:
                    break
        finally:
            session.detach(peer)
            writer.cancel()
        return ws

    async def tcp_handler(reader, writer):
        peer = Peer()
        session.attach(peer)

        async def send(text: str):
            writer.write(text.encode("utf-8") + b"\n")
            await writer.drain()

        sender = asyncio.ensure_future(_writer_loop(peer, send))
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                _handle_text(session, peer, line.decode("utf-8"))
        except ConnectionError:
            pass
        finally:
            session.detach(peer)
            sender.cancel()
            writer.close()

    app = web.Application()
    app.router.add_get("/ws", ws_handler)
    runner = web.AppRunner(app)
    await runner.setup()
    site = web.TCPSite(runner, host, port)
    await site.start()

    tcp_server = None
    if tcp_port is not None:
        tcp_server = await asyncio.start_server(tcp_handler, host, tcp_port)

    ticker = asyncio.ensure_future(_session_loop(session))
    if ready is not None:
        ready.set()
    try:
        await asyncio.Future()  # run until cancelled
    finally:
        ticker.cancel()
        if tcp_server is not None:
            tcp_server.close()
            await tcp_server.wait_closed()
        await runner.cleanup()
        session.close()
