// Console wiring: composer (keystrokes -> events), client (websocket),
// view (server events -> DOM). The interview task keeps the input
// locked until the first question has rendered; a disconnect shows a
// banner and locks the input again.

import { DEFAULT_IDLE_MS, EventComposer, type Clock, type Scheduler } from './composer.js';
import { SessionClient, type SocketFactory } from './client.js';
import { ConsoleView } from './view.js';
import type { ServerEvent, Task } from './protocol.js';

export interface AppDeps {
  doc: Document;
  clock: Clock;
  scheduler: Scheduler;
  socketFactory: SocketFactory;
  url: string;
}

export class ConsoleApp {
  readonly view: ConsoleView;
  readonly composer: EventComposer;
  readonly client: SessionClient;
  private readonly doc: Document;
  private readonly input: HTMLInputElement;
  private readonly sendBtn: HTMLButtonElement;
  private readonly connectBtn: HTMLButtonElement;
  private readonly taskSelect: HTMLSelectElement;
  private readonly idleInput: HTMLInputElement;
  private task: Task = 'listening';

  constructor(deps: AppDeps) {
    this.doc = deps.doc;
    this.view = new ConsoleView(deps.doc, (fn, ms) => {
      deps.scheduler.set(fn, ms);
    });
    this.input = deps.doc.getElementById('say') as HTMLInputElement;
    this.sendBtn = deps.doc.getElementById('send') as HTMLButtonElement;
    this.connectBtn = deps.doc.getElementById('connect') as HTMLButtonElement;
    this.taskSelect = deps.doc.getElementById('task') as HTMLSelectElement;
    this.idleInput = deps.doc.getElementById('idle-ms') as HTMLInputElement;

    this.client = new SessionClient(deps.url, deps.socketFactory);
    this.composer = new EventComposer(
      (msg) => {
        this.client.send(msg);
      },
      deps.clock,
      deps.scheduler,
      DEFAULT_IDLE_MS,
    );

    this.lockInput();
    this.wire();
  }

  private wire(): void {
    this.connectBtn.addEventListener('click', () => {
      this.connect();
    });
    this.input.addEventListener('input', (ev) => {
      const data = (ev as InputEvent).data;
      if (data) {
        for (const ch of data) {
          this.composer.keystroke(ch);
        }
      }
    });
    this.input.addEventListener('keydown', (ev) => {
      if ((ev as KeyboardEvent).key === 'Enter') {
        this.sendUtterance();
      }
    });
    this.sendBtn.addEventListener('click', () => {
      this.sendUtterance();
    });
    this.idleInput.addEventListener('change', () => {
      const ms = Number(this.idleInput.value);
      if (Number.isFinite(ms) && ms >= 100) {
        this.composer.idleMs = ms;
      }
    });
    for (const btn of Array.from(this.doc.querySelectorAll('[data-behavior]'))) {
      btn.addEventListener('click', () => {
        const kind = (btn as HTMLElement).dataset.behavior;
        this.client.send({
          op: 'behavior',
          kind: kind as 'laugh' | 'nod' | 'gaze_contact' | 'user_backchannel',
          t: this.composer.now(),
        });
      });
    }
  }

  connect(): void {
    this.task = (this.taskSelect.value as Task) || 'listening';
    this.view.clearBanner();
    this.client.onEvent = (event) => {
      this.handleEvent(event);
    };
    this.client.onOpen = () => {
      // Listening unlocks right away; the interview waits for its
      // first question so the user answers rather than opens.
      if (this.task === 'listening') {
        this.unlockInput();
      }
    };
    this.client.onDisconnect = () => {
      this.lockInput();
      this.view.showBanner('disconnected');
    };
    this.client.connect(this.task);
  }

  private handleEvent(event: ServerEvent): void {
    this.view.render(event);
    if (this.task === 'interview' && event.ev === 'question' && this.input.disabled) {
      this.unlockInput();
    }
  }

  sendUtterance(): void {
    const text = this.input.value.trim();
    if (text === '') {
      return;
    }
    this.composer.send();
    this.view.userBubble(text);
    this.input.value = '';
  }

  get inputLocked(): boolean {
    return this.input.disabled;
  }

  private lockInput(): void {
    this.input.disabled = true;
    this.sendBtn.disabled = true;
  }

  private unlockInput(): void {
    this.input.disabled = false;
    this.sendBtn.disabled = false;
  }
}

export function bootstrap(doc: Document): ConsoleApp {
  const scheduler: Scheduler = {
    set: (fn, ms) => setTimeout(fn, ms),
    clear: (h) => clearTimeout(h as number),
  };
  const proto = doc.location.protocol === 'https:' ? 'wss' : 'ws';
  const url = `${proto}://${doc.location.host}/ws/session`;
  return new ConsoleApp({
    doc,
    clock: () => performance.now(),
    scheduler,
    socketFactory: (u) => new WebSocket(u) as unknown as import('./client.js').SocketLike,
    url,
  });
}

declare global {
  interface Window {
    __REFLEX_NO_BOOTSTRAP__?: boolean;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined'
    && !window.__REFLEX_NO_BOOTSTRAP__) {
  window.addEventListener('DOMContentLoaded', () => {
    bootstrap(document);
  });
}
