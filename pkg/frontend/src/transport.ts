/**
 * Line-oriented duplex transports.
 *
 * The browser console speaks WebSocket to the simulator's socket-upgrade
 * endpoint; the test harness speaks the raw newline-JSON TCP form of the
 * same protocol.  Message bytes are identical on both, so everything above
 * this interface is transport-agnostic.
 */

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private lineHandler: (line: string) => void = () => {};
  private closeHandler: () => void = () => {};
  private ws: WebSocket;

  constructor(url: string, onOpen?: () => void) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => onOpen?.();
    this.ws.onmessage = (event: MessageEvent) => {
      for (const line of String(event.data).split("\n")) {
        if (line.trim()) this.lineHandler(line);
      }
    };
    this.ws.onclose = () => this.closeHandler();
    this.ws.onerror = () => this.ws.close();
  }

  send(line: string): void {
    if (this.ws.readyState === WebSocket.OPEN) this.ws.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}

/** In-memory transport for unit tests. */
export class FakeTransport implements Transport {
  sent: string[] = [];
  private lineHandler: (line: string) => void = () => {};
  private closeHandler: () => void = () => {};
  closed = false;

  send(line: string): void {
    this.sent.push(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.closed = true;
  }

  feed(line: string): void {
    this.lineHandler(line);
  }

  drop(): void {
    this.closeHandler();
  }
}
