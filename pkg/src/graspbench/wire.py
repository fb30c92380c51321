"""Wire protocol: newline-delimited JSON messages, plus the command sink.

Every message is one JSON object per line with a ``type`` field. Inbound
types (client -> service): hello, gaze, tap, cocontraction, emg_pattern,
phase, object_fixation. Outbound types (service -> client): hello,
panel_state, selection, command, trial, error. The same shapes are used for
session-log lines, so logs read as transcripts of the wire traffic.

Example inbound:  {"type":"gaze","t":1684,"x":3.1,"y":1.2,"valid":true}
Example outbound: {"type":"panel_state","latched":"Tripod",
                   "dwell":{"icon":"Pinch","progress":0.45}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from .backends import CoContraction, EmgPattern, GsiInput, PatternInput, Tap
from .domain import GazeSample, Grasp, Phase, PhaseEvent, SelectionEvent, parse_grasp

WIRE_SCHEMA_VERSION = 1

INBOUND_TYPES = ("hello", "gaze", "tap", "cocontraction", "emg_pattern", "phase", "object_fixation")
OUTBOUND_TYPES = ("hello", "panel_state", "selection", "command", "trial", "error")
MESSAGE_TYPES = tuple(dict.fromkeys(INBOUND_TYPES + OUTBOUND_TYPES))


class WireError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def serialize(msg: dict) -> str:
    """One message as a newline-terminated JSON line (stable key order)."""
    return json.dumps(msg, sort_keys=True, separators=(",", ":")) + "\n"


def parse(line: Union[str, bytes]) -> dict:
    """Parse and validate one wire line. Raises :class:`WireError` with code
    ``parse`` for malformed JSON and ``schema`` for bad shapes."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise WireError("parse", f"invalid utf-8: {e}") from None
    line = line.strip()
    if not line:
        raise WireError("parse", "empty message")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise WireError("parse", f"invalid json: {e}") from None
    if not isinstance(msg, dict):
        raise WireError("schema", "message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in MESSAGE_TYPES:
        raise WireError("schema", f"unknown message type: {mtype!r}")
    _validate(msg)
    return msg


def _require(msg: dict, key: str, kinds: tuple[type, ...], what: str) -> object:
    if key not in msg:
        raise WireError("schema", f"{msg['type']} message missing {key!r}")
    value = msg[key]
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in kinds:
        raise WireError("schema", f"{msg['type']}.{key} must be {what}")
    return value


def _require_t(msg: dict) -> int:
    t = _require(msg, "t", (int,), "integer milliseconds")
    if t < 0:
        raise WireError("schema", f"{msg['type']}.t must be >= 0")
    return t


def _require_grasp(msg: dict, key: str = "grasp") -> Grasp:
    label = _require(msg, key, (str,), "a grasp label")
    try:
        return parse_grasp(label)
    except Exception:
        raise WireError("schema", f"unknown grasp label: {label!r}") from None


def _validate(msg: dict) -> None:
    mtype = msg["type"]
    if mtype == "hello":
        _require(msg, "gsi", (str,), "a GSI kind")
        if "subject" in msg:
            _require(msg, "subject", (str,), "a subject id")
        if msg.get("set_index") is not None and "set_index" in msg:
            _require(msg, "set_index", (int,), "an integer set index")
    elif mtype == "gaze":
        _require_t(msg)
        _require(msg, "x", (int, float), "a number")
        _require(msg, "y", (int, float), "a number")
        _require(msg, "valid", (bool,), "a boolean")
    elif mtype == "tap":
        _require_t(msg)
        _require_grasp(msg)
    elif mtype == "cocontraction":
        _require_t(msg)
    elif mtype == "emg_pattern":
        _require_t(msg)
        label = _require(msg, "label", (str,), "a pattern label")
        try:
            EmgPattern(label)
        except ValueError:
            raise WireError("schema", f"unknown pattern label: {label!r}") from None
    elif mtype == "phase":
        _require_t(msg)
        phase = _require(msg, "phase", (str,), "Standby or Operation")
        if phase not in (Phase.STANDBY.value, Phase.OPERATION.value):
            raise WireError("schema", f"unknown phase: {phase!r}")
    elif mtype == "object_fixation":
        _require_t(msg)
    elif mtype == "selection":
        _require_t(msg)
        _require_grasp(msg)
        _require(msg, "source", (str,), "a source")
        _require(msg, "cause", (str,), "a cause")
    elif mtype == "command":
        _require_t(msg)
        _require_grasp(msg)
        _require(msg, "seq", (int,), "an integer")
    elif mtype == "trial":
        _require(msg, "event", (str,), "open or close")
        if msg["event"] not in ("open", "close"):
            raise WireError("schema", f"trial.event must be open or close, got {msg['event']!r}")
        _require_t(msg)
        _require(msg, "slot", (int,), "an integer")
    elif mtype == "error":
        _require(msg, "code", (str,), "an error code")
        _require(msg, "message", (str,), "a message")
    elif mtype == "panel_state":
        pass  # outbound-only, shape owned by the service


# --------------------------------------------------------------------------
# Conversions between wire messages and domain events
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectFixation:
    """Marker event: the operator's eyes landed on the target object."""

    t: int


SessionInput = Union[GsiInput, PhaseEvent, ObjectFixation]


def msg_to_input(msg: dict) -> SessionInput:
    """Validated wire message -> session input event."""
    mtype = msg["type"]
    if mtype == "gaze":
        return GazeSample(int(msg["t"]), float(msg["x"]), float(msg["y"]), bool(msg["valid"]))
    if mtype == "tap":
        return Tap(int(msg["t"]), parse_grasp(msg["grasp"]))
    if mtype == "cocontraction":
        return CoContraction(int(msg["t"]))
    if mtype == "emg_pattern":
        return PatternInput(int(msg["t"]), EmgPattern(msg["label"]))
    if mtype == "phase":
        return PhaseEvent(int(msg["t"]), Phase(msg["phase"]))
    if mtype == "object_fixation":
        return ObjectFixation(int(msg["t"]))
    raise WireError("schema", f"{mtype} is not a session input")


def input_to_msg(event: SessionInput) -> dict:
    if isinstance(event, GazeSample):
        return {"type": "gaze", "t": event.t, "x": event.x, "y": event.y, "valid": event.valid}
    if isinstance(event, Tap):
        return {"type": "tap", "t": event.t, "grasp": event.grasp.value}
    if isinstance(event, CoContraction):
        return {"type": "cocontraction", "t": event.t}
    if isinstance(event, PatternInput):
        return {"type": "emg_pattern", "t": event.t, "label": event.label.value}
    if isinstance(event, PhaseEvent):
        return {"type": "phase", "t": event.t, "phase": event.phase.value}
    if isinstance(event, ObjectFixation):
        return {"type": "object_fixation", "t": event.t}
    raise WireError("schema", f"not a session input: {event!r}")


def selection_to_msg(sel: SelectionEvent) -> dict:
    return {
        "type": "selection",
        "t": sel.t,
        "grasp": sel.grasp.value,
        "source": sel.source.value,
        "cause": sel.cause.value,
    }


# --------------------------------------------------------------------------
# Command sink
# --------------------------------------------------------------------------

class CommandSink:
    """Receives one record per committed selection, in selection order."""

    def emit(self, record: dict) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class ListSink(CommandSink):
    def __init__(self):
        self.records: list[dict] = []

    def emit(self, record: dict) -> None:
        self.records.append(record)


class StreamSink(CommandSink):
    """Writes newline-delimited JSON records to a text stream."""

    def __init__(self, stream):
        self.stream = stream

    def emit(self, record: dict) -> None:
        self.stream.write(serialize(record))
        self.stream.flush()


class FileSink(StreamSink):
    def __init__(self, path):
        self._fh = open(path, "a", encoding="utf-8")
        super().__init__(self._fh)

    def close(self) -> None:
        self._fh.close()


class BufferedSink(CommandSink):
    """Wraps an unreliable ``send(line)`` transport.

    Records that fail to send are buffered up to ``bound`` and re-delivered in
    order before the next record once the transport recovers. On overflow the
    oldest record is dropped and a gap marker takes its place, so the receiver
    can tell that (and how many) commands were lost.
    """

    def __init__(self, send, bound: int = 100):
        self._send = send
        self.bound = bound
        self._buffer: list[dict] = []
        self._dropped = 0

    def emit(self, record: dict) -> None:
        self._buffer.append(record)
        if len(self._buffer) > self.bound:
            self._buffer.pop(0)
            self._dropped += 1
        self.flush()

    def flush(self) -> bool:
        """Try to deliver everything buffered; returns True when drained."""
        while self._buffer or self._dropped:
            if self._dropped:
                marker = {"type": "gap", "dropped": self._dropped}
                try:
                    self._send(serialize(marker))
                except Exception:
                    return False
                self._dropped = 0
                continue
            head = self._buffer[0]
            try:
                self._send(serialize(head))
            except Exception:
                return False
            self._buffer.pop(0)
        return True

    @property
    def pending(self) -> int:
        return len(self._buffer)
