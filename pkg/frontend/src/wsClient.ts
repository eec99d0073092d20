// WebSocket client for the kiosk role: hello handshake, heartbeats,
// reconnect with backoff, and the ordering guarantees the server checks
// (strictly increasing seq; no transcript.final after session.stop).

import { SeqCounter, isWireMessage, makeMessage, type WireMessage } from "./protocol";

type WebSocketLike = {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
};

export interface KioskSocketOptions {
  url: string;
  onMessage: (msg: WireMessage) => void;
  onConnection?: (connected: boolean) => void;
  /** Injectable for tests and non-browser runtimes. */
  webSocketFactory?: (url: string) => WebSocketLike;
  now?: () => number;
  heartbeatMs?: number;
  reconnect?: boolean;
}

const OPEN = 1;

export class KioskSocket {
  private readonly opts: KioskSocketOptions;
  private readonly seq = new SeqCounter();
  private ws: WebSocketLike | null = null;
  private heartbeatTimer: ReturnType<typeof setInterval> | null = null;
  private reconnectDelay = 1000;
  private closed = false;
  private stopSent = false;

  constructor(opts: KioskSocketOptions) {
    this.opts = opts;
  }

  private now(): number {
    return Math.round(this.opts.now ? this.opts.now() : performance.now());
  }

  connect(): void {
    this.closed = false;
    const factory =
      this.opts.webSocketFactory ?? ((url: string) => new WebSocket(url) as WebSocketLike);
    const ws = factory(this.opts.url);
    this.ws = ws;

    ws.onopen = () => {
      this.reconnectDelay = 1000;
      this.seq.reset(); // the server tracks seq per connection
      this.stopSent = false;
      this.sendRaw("hello", { role: "kiosk" });
      // Converge on the server's phase within one round trip.
      this.sendRaw("snapshot.request", {});
      this.opts.onConnection?.(true);
      this.startHeartbeat();
    };

    ws.onmessage = (event) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(event.data));
      } catch {
        return; // garbage frame; the connection itself is fine
      }
      if (isWireMessage(parsed)) this.opts.onMessage(parsed);
    };

    ws.onclose = () => {
      this.stopHeartbeat();
      this.opts.onConnection?.(false);
      if (!this.closed && (this.opts.reconnect ?? true)) {
        setTimeout(() => this.connect(), this.reconnectDelay);
        this.reconnectDelay = Math.min(this.reconnectDelay * 2, 15_000);
      }
    };

    ws.onerror = () => {
      // onclose follows; nothing to do here
    };
  }

  close(): void {
    this.closed = true;
    this.stopHeartbeat();
    this.ws?.close();
  }

  private startHeartbeat(): void {
    const interval = this.opts.heartbeatMs ?? 5000;
    this.stopHeartbeat();
    this.heartbeatTimer = setInterval(() => {
      this.sendRaw("tick.sync", { t1: this.now() });
    }, interval);
  }

  private stopHeartbeat(): void {
    if (this.heartbeatTimer !== null) {
      clearInterval(this.heartbeatTimer);
      this.heartbeatTimer = null;
    }
  }

  private sendRaw(type: string, body: Record<string, unknown>): boolean {
    if (!this.ws || this.ws.readyState !== OPEN) return false;
    this.ws.send(JSON.stringify(makeMessage(type, this.seq.take(), this.now(), body)));
    return true;
  }

  // -- session actions ------------------------------------------------

  startSession(): boolean {
    this.stopSent = false;
    return this.sendRaw("session.start", {});
  }

  stopSession(): boolean {
    this.stopSent = true;
    return this.sendRaw("session.stop", {});
  }

  sendInterim(text: string): boolean {
    if (this.stopSent || !text) return false;
    return this.sendRaw("transcript.partial", { text });
  }

  sendFinal(text: string): boolean {
    // A recognizer may flush results after the visitor pressed stop;
    // those must never trail session.stop on the wire.
    if (this.stopSent || !text.trim()) return false;
    return this.sendRaw("transcript.final", { text });
  }

  requestSnapshot(): boolean {
    return this.sendRaw("snapshot.request", {});
  }
}
