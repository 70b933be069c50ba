// Turns keystrokes into timed dialogue events.
//
// Typing onset emits a vad-on; each whitespace-delimited token emits a
// word message stamped with the real elapsed milliseconds it was typed
// over; pressing send or idling past the configured threshold emits a
// vad-off. The clock and timer are injectable so tests can drive exact
// timings.

import type { ClientMsg } from './protocol.js';

export type Clock = () => number;

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

export const DEFAULT_IDLE_MS = 600;

// Small client-side tagger; the server may re-tag. Anything unknown
// defaults to NOUN, which is what the focus/keyword extractors want
// for content words.
const POS_LEXICON: Record<string, string> = {
  ni: 'PRT', wa: 'PRT', ga: 'PRT', wo: 'PRT', o: 'PRT', no: 'PRT', de: 'PRT',
  to: 'PRT', ne: 'PRT', yo: 'PRT', ka: 'PRT', desu: 'PRT', masu: 'PRT', da: 'PRT',
  eto: 'FILLER', ano: 'FILLER', sono: 'FILLER', um: 'FILLER', uh: 'FILLER',
  i: 'PRON', you: 'PRON', we: 'PRON', he: 'PRON', she: 'PRON', it: 'PRON',
  a: 'DET', an: 'DET', the: 'DET',
  on: 'ADP', in: 'ADP', at: 'ADP', of: 'ADP', for: 'ADP', with: 'ADP',
  is: 'VERB', are: 'VERB', was: 'VERB', were: 'VERB', have: 'VERB', has: 'VERB',
  had: 'VERB', do: 'VERB', did: 'VERB', want: 'VERB', went: 'VERB', itta: 'VERB',
  and: 'CONJ', but: 'CONJ', demo: 'CONJ',
  very: 'ADV', totemo: 'ADV', sukoshi: 'ADV',
};

export function tagPos(surface: string): string {
  return POS_LEXICON[surface.toLowerCase()] ?? 'NOUN';
}

export class EventComposer {
  idleMs: number;
  private readonly clock: Clock;
  private readonly scheduler: Scheduler;
  private readonly sink: (msg: ClientMsg) => void;
  private t0: number | null = null;
  private vadOn = false;
  private tokenStart: number | null = null;
  private pendingToken = '';
  private idleHandle: unknown = null;

  constructor(
    sink: (msg: ClientMsg) => void,
    clock: Clock,
    scheduler: Scheduler,
    idleMs: number = DEFAULT_IDLE_MS,
  ) {
    this.sink = sink;
    this.clock = clock;
    this.scheduler = scheduler;
    this.idleMs = idleMs;
  }

  /** Session clock: elapsed ms since the first keystroke ever seen. */
  now(): number {
    if (this.t0 === null) {
      this.t0 = this.clock();
    }
    return Math.max(0, Math.round(this.clock() - this.t0));
  }

  /** Feed one typed character (printable or whitespace). */
  keystroke(ch: string): void {
    const t = this.now();
    if (!this.vadOn && ch.trim() !== '') {
      this.vadOn = true;
      this.sink({ op: 'vad', on: true, t });
    }
    if (ch.trim() === '') {
      this.flushToken(t);
    } else {
      if (this.pendingToken === '') {
        this.tokenStart = t;
      }
      this.pendingToken += ch;
    }
    this.armIdleTimer();
  }

  /** Send action: flush the remaining token and close the utterance. */
  send(): void {
    const t = this.now();
    this.flushToken(t);
    this.closeUtterance(t);
  }

  private flushToken(t: number): void {
    if (this.pendingToken === '') {
      return;
    }
    this.sink({
      op: 'word',
      surface: this.pendingToken,
      pos: tagPos(this.pendingToken),
      t: this.tokenStart ?? t,
      t_end: t,
    });
    this.pendingToken = '';
    this.tokenStart = null;
  }

  private closeUtterance(t: number): void {
    this.clearIdleTimer();
    if (this.vadOn) {
      this.vadOn = false;
      this.sink({ op: 'vad', on: false, t });
    }
  }

  private armIdleTimer(): void {
    this.clearIdleTimer();
    this.idleHandle = this.scheduler.set(() => {
      const t = this.now();
      this.flushToken(t);
      this.closeUtterance(t);
    }, this.idleMs);
  }

  private clearIdleTimer(): void {
    if (this.idleHandle !== null) {
      this.scheduler.clear(this.idleHandle);
      this.idleHandle = null;
    }
  }
}
