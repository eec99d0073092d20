// Web Speech API wrapper: continuous capture with interim results in the
// page's language. When the platform has no recognizer the kiosk falls
// back to typed input, so this module only reports availability — it
// never throws the exhibit offline.

export interface SpeechCallbacks {
  onInterim: (text: string) => void;
  onFinal: (text: string) => void;
  onError: (error: string) => void;
}

type RecognitionCtor = new () => SpeechRecognitionLike;

interface SpeechRecognitionLike {
  lang: string;
  continuous: boolean;
  interimResults: boolean;
  start(): void;
  stop(): void;
  onresult: ((event: SpeechResultEventLike) => void) | null;
  onerror: ((event: { error?: string }) => void) | null;
  onend: (() => void) | null;
}

interface SpeechResultEventLike {
  resultIndex: number;
  results: ArrayLike<{ isFinal: boolean; 0: { transcript: string } }>;
}

const LOCALE_TAGS: Record<string, string> = { et: "et-EE", en: "en-US" };

function recognitionCtor(): RecognitionCtor | null {
  const w = globalThis as Record<string, unknown>;
  return (w.SpeechRecognition as RecognitionCtor) ?? (w.webkitSpeechRecognition as RecognitionCtor) ?? null;
}

export function isSpeechAvailable(): boolean {
  return recognitionCtor() !== null;
}

export function localeTag(locale: string): string {
  return LOCALE_TAGS[locale] ?? locale;
}

export class SpeechCapture {
  private recognition: SpeechRecognitionLike | null = null;
  private active = false;

  constructor(private readonly callbacks: SpeechCallbacks) {}

  start(locale: string): boolean {
    const Ctor = recognitionCtor();
    if (!Ctor) {
      this.callbacks.onError("recognizer-unavailable");
      return false;
    }
    const recognition = new Ctor();
    recognition.lang = localeTag(locale);
    recognition.continuous = true;
    recognition.interimResults = true;

    recognition.onresult = (event) => {
      for (let i = event.resultIndex; i < event.results.length; i++) {
        const result = event.results[i];
        const text = result[0].transcript.trim();
        if (!text) continue;
        if (result.isFinal) this.callbacks.onFinal(text);
        else this.callbacks.onInterim(text);
      }
    };
    recognition.onerror = (event) => {
      this.callbacks.onError(event.error ?? "recognition-error");
    };
    recognition.onend = () => {
      // Browsers end recognition on silence; keep the microphone open
      // until the visitor presses stop.
      if (this.active) recognition.start();
    };

    this.recognition = recognition;
    this.active = true;
    recognition.start();
    return true;
  }

  stop(): void {
    this.active = false;
    this.recognition?.stop();
    this.recognition = null;
  }
}
