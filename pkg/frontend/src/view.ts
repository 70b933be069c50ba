// DOM rendering for the chat console.
//
// Server events map to: backchannel -> transient toast, response and
// question -> transcript bubbles, turn_state -> badge, engagement ->
// meter fill, error -> red banner. Unknown events are logged and
// ignored so protocol growth never breaks the console.

import type { ServerEvent } from './protocol.js';

export const TOAST_TTL_MS = 1500;

export class ConsoleView {
  readonly transcript: HTMLElement;
  readonly toasts: HTMLElement;
  readonly badge: HTMLElement;
  readonly meterFill: HTMLElement;
  readonly meterLabel: HTMLElement;
  readonly banner: HTMLElement;
  private readonly scheduleRemoval: (fn: () => void, ms: number) => void;

  constructor(
    root: Document | HTMLElement,
    scheduleRemoval: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {
    const get = (id: string): HTMLElement => {
      const el = (root instanceof Document ? root : root.ownerDocument!).getElementById(id);
      if (!el) {
        throw new Error(`missing #${id} in document`);
      }
      return el;
    };
    this.transcript = get('transcript');
    this.toasts = get('toasts');
    this.badge = get('turn-badge');
    this.meterFill = get('engagement-fill');
    this.meterLabel = get('engagement-label');
    this.banner = get('banner');
    this.scheduleRemoval = scheduleRemoval;
  }

  render(event: ServerEvent): void {
    switch (event.ev) {
      case 'backchannel':
        this.toast(event.text);
        break;
      case 'response':
        this.bubble('agent', event.text, event.kind);
        break;
      case 'question':
        this.bubble('interviewer', event.text, 'question');
        break;
      case 'turn_state':
        this.badge.textContent = event.state;
        this.badge.dataset.state = event.state;
        break;
      case 'engagement': {
        const pct = Math.min(1, Math.max(0, event.score)) * 100;
        this.meterFill.style.width = `${pct.toFixed(1)}%`;
        this.meterLabel.textContent = `${pct.toFixed(1)}%`;
        break;
      }
      case 'error':
        this.showBanner(`${event.code}: ${event.msg}`);
        break;
      default:
        console.log('unknown server event ignored:', event);
    }
  }

  userBubble(text: string): void {
    this.bubble('user', text, 'user');
  }

  bubble(role: string, text: string, kind: string): void {
    const el = this.transcript.ownerDocument.createElement('div');
    el.className = `bubble ${role}`;
    el.dataset.kind = kind;
    el.textContent = text;
    this.transcript.appendChild(el);
  }

  toast(text: string): void {
    const el = this.toasts.ownerDocument.createElement('div');
    el.className = 'toast';
    el.textContent = text;
    this.toasts.appendChild(el);
    this.scheduleRemoval(() => {
      el.remove();
    }, TOAST_TTL_MS);
  }

  showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.classList.add('visible');
  }

  clearBanner(): void {
    this.banner.textContent = '';
    this.banner.classList.remove('visible');
  }
}
