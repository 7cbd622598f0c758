"""Protocol service and headless scenario replay.

``serve`` exposes one duplex stream per client on a single TCP port.  A
client may speak either transport: raw newline-delimited JSON, or a browser
WebSocket (the listener sniffs the HTTP upgrade request and answers it
itself; message bytes are identical on both transports, one JSON object per
line / text frame).

All simulator mutation happens on one loop thread.  Reader threads only
enqueue parsed lines, so commands are applied in arrival order between ticks
and the event stream every client sees is a single total order.

``replay_scenario`` drives the same simulator without sockets or wall-clock
time: commands fire at their ``t_ms`` tick, telemetry snapshots are written
at the configured divisor, and the run ends when the command log is
exhausted and the robot is idle.  Replays are deterministic byte for byte.
"""

from __future__ import annotations

import base64
import hashlib
import queue
import socket
import struct
import threading
import time

from . import protocol
from .sim import Simulator

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


# -- scenario replay ----------------------------------------------------------

def replay_scenario(sim: Simulator, commands, trace=None, max_ticks: int | None = None,
                    telemetry: bool = True) -> list[dict]:
    """Run a command log headlessly; returns all events in order.

    ``commands`` is a list of protocol commands whose ``t_ms`` is the tick at
    which each is applied.  ``trace`` is an optional text stream receiving
    every event as canonical JSON, one per line.
    """
    events: list[dict] = []

    def emit(evs):
        events.extend(evs)
        if trace is not None:
            for e in evs:
                trace.write(protocol.dump_message(e) + "\n")

    pending = list(commands)
    divisor = max(1, sim.config.telemetry_divisor)
    ticks = 0
    while True:
        while pending and pending[0].t_ms <= sim.clock_ms:
            emit(sim.execute_command(pending.pop(0)))
        if max_ticks is not None:
            if ticks >= max_ticks:
                break
        elif not pending and sim.idle:
            break
        emit(sim.tick())
        ticks += 1
        if telemetry and ticks % divisor == 0:
            emit([sim.snapshot()])
    emit([sim.snapshot()])
    return events


# -- websocket framing --------------------------------------------------------

def _ws_accept_key(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _ws_handshake(conn: socket.socket, preamble: bytes) -> bool:
    data = preamble
    while b"\r\n\r\n" not in data:
        chunk = conn.recv(4096)
        if not chunk:
            return False
        data += chunk
    headers = {}
    for line in data.split(b"\r\n")[1:]:
        if b":" in line:
            name, _, value = line.partition(b":")
            headers[name.strip().lower()] = value.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None:
        conn.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        return False
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {_ws_accept_key(key.decode('ascii'))}\r\n"
        "\r\n"
    )
    conn.sendall(response.encode("ascii"))
    return True


def _ws_encode(payload: bytes, opcode: int = 0x1) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < 1 << 16:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


def _recv_exact(conn: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def _ws_read_frame(conn: socket.socket):
    """Returns (opcode, payload) or None on EOF."""
    head = _recv_exact(conn, 2)
    if head is None:
        return None
    opcode = head[0] & 0x0F
    masked = head[1] & 0x80
    n = head[1] & 0x7F
    if n == 126:
        raw = _recv_exact(conn, 2)
        if raw is None:
            return None
        n = struct.unpack(">H", raw)[0]
    elif n == 127:
        raw = _recv_exact(conn, 8)
        if raw is None:
            return None
        n = struct.unpack(">Q", raw)[0]
    mask = b"\x00" * 4
    if masked:
        mask = _recv_exact(conn, 4)
        if mask is None:
            return None
    payload = _recv_exact(conn, n) if n else b""
    if payload is None:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


class _Client:
    def __init__(self, conn: socket.socket, websocket: bool):
        self.conn = conn
        self.websocket = websocket
        self.send_lock = threading.Lock()
        self.alive = True

    def send_line(self, line: str) -> None:
        data = _ws_encode(line.encode("utf-8")) if self.websocket \
            else line.encode("utf-8") + b"\n"
        try:
            with self.send_lock:
                self.conn.sendall(data)
        except OSError:
            self.alive = False


class ProtocolServer:
    """Accepts tele-operation clients and runs the simulator in real time."""

    def __init__(self, sim: Simulator, host: str = "127.0.0.1", port: int = 0):
        self.sim = sim
        self._listener = socket.create_server((host, port))
        self.address = self._listener.getsockname()[:2]
        self._inbox: queue.Queue = queue.Queue()
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    # -- client plumbing ---------------------------------------------------

    def _broadcast(self, events) -> None:
        if not events:
            return
        lines = [protocol.dump_message(e) for e in events]
        with self._clients_lock:
            clients = [c for c in self._clients if c.alive]
            self._clients = clients
        for client in clients:
            for line in lines:
                client.send_line(line)

    def _reader(self, client: _Client) -> None:
        conn = client.conn
        try:
            if client.websocket:
                while not self._stop.is_set():
                    frame = _ws_read_frame(conn)
                    if frame is None:
                        break
                    opcode, payload = frame
                    if opcode == 0x8:        # close
                        break
                    if opcode == 0x9:        # ping -> pong
                        with client.send_lock:
                            conn.sendall(_ws_encode(payload, opcode=0xA))
                        continue
                    if opcode in (0x1, 0x2):
                        for raw in payload.decode("utf-8", "replace").splitlines():
                            if raw.strip():
                                self._inbox.put((client, raw))
            else:
                buf = b""
                while not self._stop.is_set():
                    chunk = conn.recv(4096)
                    if not chunk:
                        break
                    buf += chunk
                    while b"\n" in buf:
                        raw, _, buf = buf.partition(b"\n")
                        if raw.strip():
                            self._inbox.put((client, raw.decode("utf-8", "replace")))
        except OSError:
            pass
        finally:
            client.alive = False
            try:
                conn.close()
            except OSError:
                pass

    def _setup_client(self, conn: socket.socket) -> None:
        # Sniff the transport without stalling the acceptor: a WebSocket
        # client opens with an HTTP GET; a silent raw client is registered
        # once the sniff window closes.
        websocket = False
        try:
            deadline = time.monotonic() + 0.3
            while time.monotonic() < deadline:
                conn.settimeout(max(deadline - time.monotonic(), 0.01))
                try:
                    preamble = conn.recv(4, socket.MSG_PEEK)
                except socket.timeout:
                    break
                if not preamble:
                    break
                if len(preamble) >= 4 or not b"GET ".startswith(preamble):
                    websocket = preamble.startswith(b"GET ")
                    break
            if websocket:
                head = conn.recv(4096)
                if not _ws_handshake(conn, head):
                    conn.close()
                    return
            conn.settimeout(None)
        except OSError:
            try:
                conn.close()
            except OSError:
                pass
            return
        client = _Client(conn, websocket)
        with self._clients_lock:
            self._clients.append(client)
        thread = threading.Thread(target=self._reader, args=(client,), daemon=True)
        thread.start()
        self._threads.append(thread)

    def _acceptor(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            thread = threading.Thread(target=self._setup_client, args=(conn,), daemon=True)
            thread.start()
            self._threads.append(thread)

    # -- simulator loop ------------------------------------------------------

    def _loop(self) -> None:
        divisor = max(1, self.sim.config.telemetry_divisor)
        start = time.perf_counter()
        while not self._stop.is_set():
            target = int((time.perf_counter() - start) * 1000)
            progressed = False
            while self.sim.clock_ms < target:
                while True:
                    try:
                        client, raw = self._inbox.get_nowait()
                    except queue.Empty:
                        break
                    try:
                        cmd = protocol.parse_command_line(raw)
                    except protocol.ProtocolError as exc:
                        client.send_line(protocol.dump_message(self.sim._event(
                            "error", None, code=exc.code, message=str(exc))))
                        continue
                    self._broadcast(self.sim.execute_command(cmd))
                self._broadcast(self.sim.tick())
                if self.sim.clock_ms % divisor == 0:
                    self._broadcast([self.sim.snapshot()])
                progressed = True
            if not progressed:
                time.sleep(0.0005)

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        for target in (self._acceptor, self._loop):
            thread = threading.Thread(target=target, daemon=True)
            thread.start()
            self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._clients_lock:
            for client in self._clients:
                try:
                    client.conn.close()
                except OSError:
                    pass

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stop.wait(0.5):
                pass
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()


def serve(sim: Simulator, host: str = "127.0.0.1", port: int = 7780) -> ProtocolServer:
    """Start a server and return it; callers own start/stop."""
    return ProtocolServer(sim, host, port)
