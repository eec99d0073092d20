// Wire protocol shared with the engine: one JSON object per frame,
// {type, seq, ts, body}, seq strictly increasing per connection.

export type Phase = "PagePresented" | "Reading" | "WordFall" | "Reveal";

export interface WireMessage {
  type: string;
  seq: number;
  ts: number;
  body: Record<string, unknown>;
}

export interface PageInfo {
  page_id: string;
  title: string;
  image_url: string;
  locale: string;
  archive_url: string;
  qr_payload: string;
}

export interface SnapshotBody {
  phase: Phase;
  page: PageInfo;
  words: string[];
  connected: { kiosk: boolean; display: boolean; admins: number };
  alerts: string[];
  server_now: number;
}

export function isWireMessage(value: unknown): value is WireMessage {
  if (typeof value !== "object" || value === null) return false;
  const msg = value as Record<string, unknown>;
  return (
    typeof msg.type === "string" &&
    typeof msg.seq === "number" &&
    Number.isInteger(msg.seq) &&
    msg.seq >= 0 &&
    typeof msg.ts === "number" &&
    typeof msg.body === "object" &&
    msg.body !== null
  );
}

/** Allocates this connection's strictly increasing sequence numbers. */
export class SeqCounter {
  private next = 0;

  take(): number {
    return this.next++;
  }

  reset(): void {
    this.next = 0;
  }
}

export function makeMessage(
  type: string,
  seq: number,
  ts: number,
  body: Record<string, unknown> = {},
): WireMessage {
  return { type, seq, ts, body };
}
