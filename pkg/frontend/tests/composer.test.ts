import { describe, expect, it } from 'vitest';

import { EventComposer, tagPos } from '../src/composer.js';
import type { ClientMsg } from '../src/protocol.js';
import { FakeTime } from './helpers.js';

function setup(idleMs = 600) {
  const time = new FakeTime();
  const sent: ClientMsg[] = [];
  const composer = new EventComposer((m) => sent.push(m), time.clock, time, idleMs);
  return { time, sent, composer };
}

function typePhrase(composer: EventComposer, time: FakeTime, phrase: string, perChar = 80) {
  for (const ch of phrase) {
    composer.keystroke(ch);
    time.advance(perChar);
  }
}

describe('EventComposer', () => {
  it('emits vad-on at typing onset', () => {
    const { sent, composer } = setup();
    composer.keystroke('k');
    expect(sent[0]).toEqual({ op: 'vad', on: true, t: 0 });
  });

  it('emits one word per whitespace-delimited token with real timing', () => {
    const { time, sent, composer } = setup();
    typePhrase(composer, time, 'kyoto ni ryokou');
    composer.send();
    const words = sent.filter((m) => m.op === 'word') as Extract<ClientMsg, { op: 'word' }>[];
    expect(words.map((w) => w.surface)).toEqual(['kyoto', 'ni', 'ryokou']);
    // kyoto typed over chars at 0..320 ms, space at 400; ni starts 480.
    expect(words[0]).toMatchObject({ t: 0, t_end: 400 });
    expect(words[1]).toMatchObject({ t: 480, t_end: 640 });
    for (const w of words) {
      expect(w.t_end).toBeGreaterThanOrEqual(w.t);
    }
  });

  it('keeps word timestamps monotone and within 50 ms of keystrokes', () => {
    const { time, sent, composer } = setup();
    const keystrokeTimes: Record<string, number> = {};
    for (const token of ['ryokou', 'wa', 'tanoshii']) {
      keystrokeTimes[token] = time.nowMs;
      typePhrase(composer, time, token + ' ', 60);
    }
    composer.send();
    const words = sent.filter((m) => m.op === 'word') as Extract<ClientMsg, { op: 'word' }>[];
    let last = -1;
    for (const w of words) {
      expect(w.t).toBeGreaterThanOrEqual(last);
      last = w.t;
      expect(Math.abs(w.t - keystrokeTimes[w.surface])).toBeLessThanOrEqual(50);
    }
  });

  it('send flushes the pending token then closes with vad-off', () => {
    const { time, sent, composer } = setup();
    typePhrase(composer, time, 'naruhodo');
    composer.send();
    expect(sent.map((m) => m.op)).toEqual(['vad', 'word', 'vad']);
    const off = sent[2] as Extract<ClientMsg, { op: 'vad' }>;
    expect(off.on).toBe(false);
  });

  it('idle past the threshold emits vad-off without send', () => {
    const { time, sent, composer } = setup();
    typePhrase(composer, time, 'eto');
    time.advance(600);
    const ops = sent.map((m) => m.op);
    expect(ops).toEqual(['vad', 'word', 'vad']);
    expect((sent[2] as Extract<ClientMsg, { op: 'vad' }>).on).toBe(false);
    // typing again opens a fresh utterance
    composer.keystroke('a');
    expect(sent[3]).toMatchObject({ op: 'vad', on: true });
  });

  it('empty send emits nothing', () => {
    const { sent, composer } = setup();
    composer.send();
    expect(sent).toEqual([]);
  });

  it('idle threshold is configurable', () => {
    const { time, sent, composer } = setup(1200);
    typePhrase(composer, time, 'un');
    time.advance(700);
    expect(sent.filter((m) => m.op === 'vad')).toHaveLength(1); // still open
    time.advance(600);
    expect(sent.filter((m) => m.op === 'vad')).toHaveLength(2);
  });
});

describe('tagPos', () => {
  it('tags particles, fillers, and defaults to NOUN', () => {
    expect(tagPos('wa')).toBe('PRT');
    expect(tagPos('eto')).toBe('FILLER');
    expect(tagPos('ryokou')).toBe('NOUN');
    expect(tagPos('machine')).toBe('NOUN');
  });
});
