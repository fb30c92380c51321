"""Session service: newline-delimited JSON over TCP, with an in-place
WebSocket upgrade for browser clients.

Each connection binds to exactly one session. The first message must be a
``hello`` naming the GSI kind (and optionally subject and suite set); every
further inbound event is routed through the session. The service answers with
the output events (selections, trial boundaries), mirrors committed commands
both to the client and to the command sink, and follows every processed input
with a ``panel_state`` snapshot. Malformed input gets an ``error`` reply and
the connection stays up.

The WebSocket layer implements the server side of RFC 6455 (text frames,
fragmentation, ping/pong, close) so one port serves both plain socket clients
and browsers; messages are the same JSON lines either way.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import socket
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .backends import GSI_KINDS, BackendError
from .domain import Catalog, default_catalog
from .sequencer import Suite
from .session import LOG_SCHEMA_VERSION, LogWriter, Session, SessionConfig, SessionError
from .wire import CommandSink, FileSink, ListSink, StreamSink, WireError, msg_to_input, parse, serialize

WS_MAGIC = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
MAX_MESSAGE_BYTES = 1 << 20


# --------------------------------------------------------------------------
# Transports
# --------------------------------------------------------------------------

class RawTransport:
    """One JSON message per newline-terminated line."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    async def read_message(self) -> Optional[str]:
        try:
            line = await self.reader.readline()
        except (ConnectionError, asyncio.IncompleteReadError):
            return None
        if not line:
            return None
        if len(line) > MAX_MESSAGE_BYTES:
            raise WireError("parse", "message too large")
        return line.decode("utf-8", errors="replace")

    async def send(self, msg: dict) -> None:
        self.writer.write(serialize(msg).encode("utf-8"))
        await self.writer.drain()

    async def close(self) -> None:
        try:
            self.writer.close()
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass


def ws_accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + WS_MAGIC).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def ws_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    """One unmasked server-to-client frame."""
    head = bytearray([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head.append(n)
    elif n < 1 << 16:
        head.append(126)
        head += n.to_bytes(2, "big")
    else:
        head.append(127)
        head += n.to_bytes(8, "big")
    return bytes(head) + payload


def ws_unmask(payload: bytes, mask: bytes) -> bytes:
    return bytes(b ^ mask[i % 4] for i, b in enumerate(payload))


class WsTransport:
    """Server side of a WebSocket connection carrying one JSON message per
    text message. Handles fragmentation, answers pings, echoes close."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer
        self._closed = False

    async def read_message(self) -> Optional[str]:
        buffer = bytearray()
        while True:
            try:
                head = await self.reader.readexactly(2)
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            fin = bool(head[0] & 0x80)
            opcode = head[0] & 0x0F
            masked = bool(head[1] & 0x80)
            length = head[1] & 0x7F
            try:
                if length == 126:
                    length = int.from_bytes(await self.reader.readexactly(2), "big")
                elif length == 127:
                    length = int.from_bytes(await self.reader.readexactly(8), "big")
                if length > MAX_MESSAGE_BYTES:
                    await self.close()
                    return None
                mask = await self.reader.readexactly(4) if masked else b""
                payload = await self.reader.readexactly(length)
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            if masked:
                payload = ws_unmask(payload, mask)
            if opcode == 0x8:  # close
                await self._send_raw(ws_frame(payload[:2], 0x8))
                self._closed = True
                return None
            if opcode == 0x9:  # ping -> pong
                await self._send_raw(ws_frame(payload, 0xA))
                continue
            if opcode == 0xA:  # unsolicited pong
                continue
            if opcode in (0x0, 0x1, 0x2):
                buffer += payload
                if fin:
                    return buffer.decode("utf-8", errors="replace")
                continue
            await self.close()
            return None

    async def _send_raw(self, data: bytes) -> None:
        if self._closed:
            return
        try:
            self.writer.write(data)
            await self.writer.drain()
        except (ConnectionError, OSError):
            self._closed = True

    async def send(self, msg: dict) -> None:
        await self._send_raw(ws_frame(serialize(msg).encode("utf-8")))

    async def close(self) -> None:
        if not self._closed:
            await self._send_raw(ws_frame(b"", 0x8))
            self._closed = True
        try:
            self.writer.close()
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass


async def ws_handshake(
    request_line: bytes, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
) -> Optional[WsTransport]:
    headers: dict[str, str] = {}
    while True:
        line = await reader.readline()
        if line in (b"\r\n", b"\n", b""):
            break
        name, _, value = line.decode("latin1").partition(":")
        headers[name.strip().lower()] = value.strip()
    key = headers.get("sec-websocket-key")
    upgrade_ok = (
        headers.get("upgrade", "").lower() == "websocket"
        and "upgrade" in headers.get("connection", "").lower()
        and key is not None
    )
    if not upgrade_ok:
        writer.write(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n")
        await writer.drain()
        writer.close()
        return None
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {ws_accept_key(key)}\r\n"
        "\r\n"
    )
    writer.write(response.encode("ascii"))
    await writer.drain()
    return WsTransport(reader, writer)


# --------------------------------------------------------------------------
# Command sinks
# --------------------------------------------------------------------------

class TcpSink(CommandSink):
    """Line-delimited JSON over an outbound TCP connection with reconnect."""

    def __init__(self, host: str, port: int):
        self.host = host
        self.port = port
        self._sock: Optional[socket.socket] = None

    def _connect(self) -> None:
        if self._sock is None:
            self._sock = socket.create_connection((self.host, self.port), timeout=2.0)

    def send_line(self, line: str) -> None:
        try:
            self._connect()
            self._sock.sendall(line.encode("utf-8"))
        except OSError:
            if self._sock is not None:
                try:
                    self._sock.close()
                except OSError:
                    pass
                self._sock = None
            raise

    def emit(self, record: dict) -> None:
        self.send_line(serialize(record))

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None


def make_sink(spec: str, log_dir: Optional[Path] = None, session_id: str = "s0") -> CommandSink:
    """Sink from a spec string: ``stdout``, ``file:PATH``, ``tcp:HOST:PORT``,
    or ``logdir`` (one command file per session beside the logs)."""
    from .wire import BufferedSink

    if spec == "stdout":
        import sys

        return StreamSink(sys.stdout)
    if spec.startswith("file:"):
        return FileSink(spec[len("file:"):])
    if spec.startswith("tcp:"):
        host, _, port = spec[len("tcp:"):].rpartition(":")
        sink = TcpSink(host, int(port))
        return BufferedSink(sink.send_line, bound=100)
    if spec == "logdir":
        if log_dir is None:
            return ListSink()
        return FileSink(Path(log_dir) / f"{session_id}.commands.jsonl")
    raise ValueError(f"unknown sink spec: {spec!r}")


# --------------------------------------------------------------------------
# Service
# --------------------------------------------------------------------------

@dataclass
class ServiceConfig:
    base: SessionConfig = field(default_factory=SessionConfig)
    suite: Optional[Suite] = None
    catalog: Optional[Catalog] = None
    log_dir: Optional[Path] = None
    sink_spec: str = "logdir"


class GraspService:
    """Accepts any number of concurrent connections, one session each."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._server: Optional[asyncio.base_events.Server] = None
        self._counter = 0
        self.port: Optional[int] = None

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        try:
            self._server = await asyncio.start_server(self._handle, host, port)
        except OSError as e:
            raise SessionError(f"cannot bind {host}:{port}: {e}") from None
        bound = self._server.sockets[0].getsockname()
        self.port = bound[1]
        return bound[0], bound[1]

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def serve_forever(self) -> None:
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    def _new_session_id(self) -> str:
        self._counter += 1
        return f"live-{self._counter:04d}"

    def _build_session(self, hello: dict, session_id: str, writer) -> Session:
        import dataclasses

        gsi = hello.get("gsi")
        if gsi not in GSI_KINDS:
            raise WireError("schema", f"unknown GSI kind: {gsi!r}")
        config = dataclasses.replace(
            self.config.base,
            gsi_kind=gsi,
            subject_id=str(hello.get("subject", "anon")),
        )
        sequence_set = None
        catalog = self.config.catalog or default_catalog()
        set_index = hello.get("set_index")
        if set_index is not None:
            if self.config.suite is None:
                raise WireError("schema", "no suite loaded; cannot bind set_index")
            sequence_set = self.config.suite.get_set(int(set_index))
            catalog = self.config.suite.catalog
            config = dataclasses.replace(
                config,
                set_index=int(set_index),
                suite_seed=self.config.suite.config.seed,
                fsm_initial=self.config.suite.config.initial_grasp,
                cycle_order=self.config.suite.config.cycle_order,
            )
        return Session(
            config,
            sequence_set=sequence_set,
            catalog=catalog,
            session_id=session_id,
            event_writer=writer,
            retain_events=False,
        )

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        first: Optional[str]
        try:
            first_bytes = await reader.readline()
        except (ConnectionError, asyncio.IncompleteReadError):
            writer.close()
            return
        if not first_bytes:
            writer.close()
            return
        if first_bytes.startswith(b"GET "):
            transport = await ws_handshake(first_bytes, reader, writer)
            if transport is None:
                return
            first = None
        else:
            transport = RawTransport(reader, writer)
            first = first_bytes.decode("utf-8", errors="replace")

        session: Optional[Session] = None
        log_writer: Optional[LogWriter] = None
        sink: Optional[CommandSink] = None
        try:
            while True:
                line = first if first is not None else await transport.read_message()
                first = None
                if line is None:
                    break
                try:
                    msg = parse(line)
                except WireError as e:
                    await transport.send({"type": "error", "code": e.code, "message": e.message})
                    continue
                if msg["type"] == "hello":
                    if session is not None:
                        await transport.send(
                            {"type": "error", "code": "session", "message": "connection already bound"}
                        )
                        continue
                    session_id = self._new_session_id()
                    try:
                        if self.config.log_dir is not None:
                            self.config.log_dir.mkdir(parents=True, exist_ok=True)
                            log_writer = LogWriter(Path(self.config.log_dir) / f"{session_id}.jsonl")
                        session = self._build_session(msg, session_id, log_writer)
                        sink = make_sink(self.config.sink_spec, self.config.log_dir, session_id)
                    except (WireError, SessionError, BackendError, ValueError) as e:
                        code = e.code if isinstance(e, WireError) else "session"
                        await transport.send({"type": "error", "code": code, "message": str(e)})
                        if log_writer is not None:
                            log_writer.close()
                            log_writer = None
                        session = None
                        continue
                    await transport.send(
                        {
                            "type": "hello",
                            "session": session_id,
                            "schema_version": LOG_SCHEMA_VERSION,
                            "gsi": session.config.gsi_kind,
                            "set_index": session.config.set_index,
                            "n_slots": None
                            if session.sequence_set is None
                            else len(session.sequence_set.slots),
                            "config": session.config.to_dict(),
                        }
                    )
                    await transport.send(session.panel_state())
                    continue
                if session is None:
                    await transport.send(
                        {"type": "error", "code": "session", "message": "hello must come first"}
                    )
                    continue
                try:
                    event = msg_to_input(msg)
                    outputs, commands = session.process(event)
                except (WireError, SessionError, BackendError) as e:
                    code = e.code if isinstance(e, WireError) else "session"
                    await transport.send({"type": "error", "code": code, "message": str(e)})
                    continue
                for out in outputs:
                    await transport.send(out)
                for command in commands:
                    sink.emit(command)
                    await transport.send({"type": "command", **command})
                await transport.send(session.panel_state())
        finally:
            if log_writer is not None:
                log_writer.close()
            if sink is not None:
                sink.close()
            await transport.close()


async def run_service(
    config: ServiceConfig, host: str, port: int, ready: Optional[Callable[[str, int], None]] = None
) -> None:
    service = GraspService(config)
    bound_host, bound_port = await service.start(host, port)
    if ready is not None:
        ready(bound_host, bound_port)
    await service.serve_forever()
