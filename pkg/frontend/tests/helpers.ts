// Shared test doubles: a manual clock/scheduler pair and a scripted
// websocket stub standing in for the gateway.

import fs from 'node:fs';
import path from 'node:path';
import { fileURLToPath } from 'node:url';

import type { Scheduler } from '../src/composer.js';
import type { SocketLike } from '../src/client.js';

export class FakeTime implements Scheduler {
  nowMs = 0;
  private timers: { at: number; fn: () => void; id: number }[] = [];
  private nextId = 1;

  clock = (): number => this.nowMs;

  set(fn: () => void, ms: number): unknown {
    const id = this.nextId++;
    this.timers.push({ at: this.nowMs + ms, fn, id });
    return id;
  }

  clear(handle: unknown): void {
    this.timers = this.timers.filter((t) => t.id !== handle);
  }

  advance(ms: number): void {
    const target = this.nowMs + ms;
    for (;;) {
      const due = this.timers
        .filter((t) => t.at <= target)
        .sort((a, b) => a.at - b.at || a.id - b.id)[0];
      if (!due) {
        break;
      }
      this.timers = this.timers.filter((t) => t.id !== due.id);
      this.nowMs = due.at;
      due.fn();
    }
    this.nowMs = target;
  }
}

export class StubSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  open(): void {
    this.onopen?.();
  }

  serverPush(event: object): void {
    this.onmessage?.({ data: JSON.stringify(event) });
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  sentMessages(): { op: string; [k: string]: unknown }[] {
    return this.sent.map((s) => JSON.parse(s));
  }
}

export function loadConsoleDom(): void {
  const here = path.dirname(fileURLToPath(import.meta.url));
  const html = fs.readFileSync(path.join(here, '..', 'index.html'), 'utf-8');
  const body = html.slice(html.indexOf('<body>') + 6, html.indexOf('</body>'));
  document.body.innerHTML = body;
}

export function typeInto(input: HTMLInputElement, text: string, perCharMs: number,
                         time: FakeTime): void {
  for (const ch of text) {
    input.value += ch;
    input.dispatchEvent(new InputEvent('input', { data: ch, bubbles: true }));
    time.advance(perCharMs);
  }
}
