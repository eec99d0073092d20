// Kiosk entry point: full-screen page view, start/stop controls, speech
// capture with a typed-input fallback, QR code to the archive entry.
//
// Zero local configuration beyond an optional ?server= query parameter;
// everything else arrives over the wire.

import {
  applyConnection,
  applyFinal,
  applyInterim,
  applyServerMessage,
  controls,
  initialState,
  type KioskViewState,
} from "./kioskState";
import type { WireMessage } from "./protocol";
import { renderQrToCanvas } from "./qr";
import { SpeechCapture, isSpeechAvailable } from "./speech";
import { KioskSocket } from "./wsClient";

function serverUrl(): string {
  const override = new URLSearchParams(location.search).get("server");
  if (override) return override;
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws`;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const pageTitle = el<HTMLHeadingElement>("page-title");
const pageImage = el<HTMLImageElement>("page-image");
const imageFallback = el<HTMLDivElement>("image-fallback");
const localeBadge = el<HTMLSpanElement>("locale-badge");
const qrCanvas = el<HTMLCanvasElement>("qr-canvas");
const archiveUrlLabel = el<HTMLAnchorElement>("archive-url");
const startButton = el<HTMLButtonElement>("start-button");
const stopButton = el<HTMLButtonElement>("stop-button");
const transcriptBox = el<HTMLDivElement>("transcript");
const typedForm = el<HTMLFormElement>("typed-form");
const typedInput = el<HTMLInputElement>("typed-input");
const connectionDot = el<HTMLSpanElement>("connection");
const statusLine = el<HTMLParagraphElement>("status");

let state: KioskViewState = initialState();
let typedFallback = !isSpeechAvailable();

const speech = new SpeechCapture({
  onInterim: (text) => {
    update(applyInterim(state, text));
    socket.sendInterim(text);
  },
  onFinal: (text) => {
    update(applyFinal(state, text));
    socket.sendFinal(text);
  },
  onError: (error) => {
    if (error === "not-allowed" || error === "service-not-allowed") {
      statusLine.textContent = "Microphone blocked — ask staff for help.";
    }
    // Whatever went wrong, reading must stay possible.
    typedFallback = true;
    render();
  },
});

const socket = new KioskSocket({
  url: serverUrl(),
  onMessage: handleMessage,
  onConnection: (connected) => update(applyConnection(state, connected)),
});

function handleMessage(msg: WireMessage): void {
  const before = state;
  update(applyServerMessage(state, msg));
  if (msg.type === "page.present" && state.page !== before.page) {
    renderPage();
  }
  if (msg.type === "capture.begin") {
    const locale = String(msg.body.locale ?? "et");
    if (!typedFallback && !speech.start(locale)) typedFallback = true;
    render();
  }
  if (msg.type === "capture.end") {
    speech.stop();
    // One round trip to learn whether the words are falling or the page
    // is waiting again.
    socket.requestSnapshot();
  }
}

function update(next: KioskViewState): void {
  state = next;
  render();
}

function renderPage(): void {
  const page = state.page;
  if (!page) return;
  pageTitle.textContent = page.title;
  localeBadge.textContent = page.locale;
  imageFallback.hidden = true;
  pageImage.hidden = false;
  pageImage.src = page.image_url;
  archiveUrlLabel.href = page.archive_url;
  archiveUrlLabel.textContent = page.archive_url;
  renderQrToCanvas(qrCanvas, page.qr_payload);
}

pageImage.addEventListener("error", () => {
  // Missing scan: show the title card instead, the session still works.
  pageImage.hidden = true;
  imageFallback.hidden = false;
  imageFallback.textContent = state.page?.title ?? "";
});

function render(): void {
  const enablement = controls(state);
  startButton.disabled = !enablement.startEnabled;
  stopButton.disabled = !enablement.stopEnabled;
  connectionDot.className = state.connected ? "dot online" : "dot offline";
  typedForm.hidden = !(typedFallback && state.capturing);

  const finals = state.finals.map((t) => `<span class="final">${escapeHtml(t)}</span>`);
  const interim = state.interim ? `<span class="interim">${escapeHtml(state.interim)}</span>` : "";
  transcriptBox.innerHTML = [...finals, interim].join(" ");

  if (!state.connected) {
    statusLine.textContent = "Connecting…";
  } else if (state.phase === "Reading") {
    statusLine.textContent = typedFallback
      ? "Type the page text, press Enter after each line."
      : "Read the page aloud, then press stop.";
  } else if (state.phase === "WordFall" || state.phase === "Reveal") {
    statusLine.textContent = "Watch the tower…";
  } else if (state.synced) {
    statusLine.textContent = "Press start and read this page aloud.";
  }
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);
}

startButton.addEventListener("click", () => socket.startSession());
stopButton.addEventListener("click", () => {
  speech.stop();
  socket.stopSession();
});

typedForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const text = typedInput.value.trim();
  if (text) {
    update(applyFinal(state, text));
    socket.sendFinal(text);
  }
  typedInput.value = "";
});

socket.connect();
render();
