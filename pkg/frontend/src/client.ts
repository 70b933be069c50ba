// Thin websocket wrapper for one gateway session.

import type { ClientMsg, ServerEvent, Task } from './protocol.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class SessionClient {
  onEvent: (event: ServerEvent) => void = () => {};
  onOpen: () => void = () => {};
  onDisconnect: () => void = () => {};
  private socket: SocketLike | null = null;
  private readonly factory: SocketFactory;
  private readonly url: string;

  constructor(url: string, factory: SocketFactory) {
    this.url = url;
    this.factory = factory;
  }

  connect(task: Task): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.send({ op: 'start', task });
      this.onOpen();
    };
    socket.onmessage = (ev) => {
      let parsed: ServerEvent;
      try {
        parsed = JSON.parse(ev.data) as ServerEvent;
      } catch {
        console.log('unparseable server line ignored:', ev.data);
        return;
      }
      this.onEvent(parsed);
    };
    socket.onclose = () => {
      this.socket = null;
      this.onDisconnect();
    };
    socket.onerror = () => {
      this.onDisconnect();
    };
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  send(msg: ClientMsg): void {
    if (this.socket === null) {
      return;
    }
    this.socket.send(JSON.stringify(msg));
  }

  end(): void {
    this.send({ op: 'end' });
    this.socket?.close();
  }
}
