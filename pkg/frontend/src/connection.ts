// Transport plumbing: request/response correlation over a message channel.
// The WebSocket transport is swappable for a recording fake in tests.

import type { Response, ServerEvent } from "./protocol.js";

export interface Transport {
  send(text: string): void;
  onMessage(cb: (text: string) => void): void;
  onClose(cb: () => void): void;
}

export class WsTransport implements Transport {
  private ws: WebSocket;
  private messageCb: ((text: string) => void) | null = null;
  private closeCb: (() => void) | null = null;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (ev) => this.messageCb?.(String(ev.data));
    this.ws.onclose = () => this.closeCb?.();
    this.ws.onerror = () => this.closeCb?.();
  }

  ready(): Promise<void> {
    if (this.ws.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.ws.addEventListener("open", () => resolve(), { once: true });
      this.ws.addEventListener("error", () => reject(new Error("ws error")), {
        once: true,
      });
    });
  }

  send(text: string): void {
    this.ws.send(text);
  }
  onMessage(cb: (text: string) => void): void {
    this.messageCb = cb;
  }
  onClose(cb: () => void): void {
    this.closeCb = cb;
  }
}

export class RequestError extends Error {
  constructor(
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class Client {
  private nextId = 1;
  private pending = new Map<
    number,
    { resolve: (v: unknown) => void; reject: (e: Error) => void }
  >();
  private eventCbs: Array<(ev: ServerEvent) => void> = [];
  private closeCbs: Array<() => void> = [];

  constructor(private transport: Transport) {
    transport.onMessage((text) => this.dispatch(text));
    transport.onClose(() => {
      for (const cb of this.closeCbs) cb();
    });
  }

  private dispatch(text: string): void {
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(text);
    } catch {
      return;
    }
    if ("event" in obj) {
      for (const cb of this.eventCbs) cb(obj as unknown as ServerEvent);
      return;
    }
    const response = obj as unknown as Response;
    const waiter = this.pending.get(response.id as number);
    if (!waiter) return;
    this.pending.delete(response.id as number);
    if (response.ok) {
      waiter.resolve(response.result);
    } else {
      const err = response.error ?? { code: "unknown", message: "error" };
      waiter.reject(new RequestError(err.code, err.message));
    }
  }

  request<T>(op: string, params: Record<string, unknown> = {}): Promise<T> {
    const id = this.nextId++;
    const message = JSON.stringify({ id, op, ...params });
    return new Promise<T>((resolve, reject) => {
      this.pending.set(id, {
        resolve: resolve as (v: unknown) => void,
        reject,
      });
      this.transport.send(message);
    });
  }

  onEvent(cb: (ev: ServerEvent) => void): void {
    this.eventCbs.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }
}
