// Kiosk view state: a mirror of the server's session phase plus whatever
// the touch screen needs to draw. Pure: server messages in, new state out.
//
// The mirror only trusts authoritative signals. page.present and
// capture.begin pin the phase exactly; capture.end alone cannot tell a
// word-fall apart from a cancelled reading, so the state goes unsynced
// (controls locked) until the snapshot reply lands — one round trip.

import type { PageInfo, Phase, WireMessage } from "./protocol";

export interface KioskViewState {
  phase: Phase;
  synced: boolean;
  page: PageInfo | null;
  interim: string;
  finals: string[];
  capturing: boolean;
  connected: boolean;
  lastHeartbeat: number | null;
}

export interface Controls {
  startEnabled: boolean;
  stopEnabled: boolean;
}

export function initialState(): KioskViewState {
  return {
    phase: "PagePresented",
    synced: false,
    page: null,
    interim: "",
    finals: [],
    capturing: false,
    connected: false,
    lastHeartbeat: null,
  };
}

export function applyConnection(state: KioskViewState, connected: boolean): KioskViewState {
  // A broken link leaves the phase stale; resync happens on reconnect.
  return { ...state, connected, synced: connected ? state.synced : false };
}

export function applyServerMessage(state: KioskViewState, msg: WireMessage): KioskViewState {
  switch (msg.type) {
    case "page.present": {
      const page = msg.body as unknown as PageInfo;
      return {
        ...state,
        phase: "PagePresented",
        synced: true,
        page,
        interim: "",
        finals: [],
        capturing: false,
      };
    }
    case "capture.begin":
      return { ...state, phase: "Reading", synced: true, capturing: true };
    case "capture.end":
      // WordFall or back to the page? Only the snapshot knows.
      return { ...state, capturing: false, synced: false, interim: "" };
    case "snapshot": {
      const body = msg.body as Partial<{ phase: Phase; page: PageInfo; words: string[] }>;
      return {
        ...state,
        phase: body.phase ?? state.phase,
        page: body.page ?? state.page,
        finals: body.words ?? state.finals,
        synced: true,
      };
    }
    case "tick.sync": {
      const t1 = msg.body.t1;
      return { ...state, lastHeartbeat: typeof t1 === "number" ? t1 : state.lastHeartbeat };
    }
    default:
      return state;
  }
}

export function applyInterim(state: KioskViewState, text: string): KioskViewState {
  return state.capturing ? { ...state, interim: text } : state;
}

export function applyFinal(state: KioskViewState, text: string): KioskViewState {
  if (!state.capturing) return state;
  return { ...state, interim: "", finals: [...state.finals, text] };
}

/** Start only on the presented page, stop only while reading, never both. */
export function controls(state: KioskViewState): Controls {
  const ready = state.connected && state.synced;
  return {
    startEnabled: ready && state.phase === "PagePresented",
    stopEnabled: ready && state.phase === "Reading",
  };
}
