// WebSocket session link with automatic reconnect.

import { parseServerMessage, type ServerMessage } from "./protocol.js";

export interface ConnectionHandlers {
  onMessage: (msg: ServerMessage) => void;
  onOpen: () => void;
  onClose: () => void;
}

export class Connection {
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly handlers: ConnectionHandlers,
    private readonly reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.handlers.onOpen();
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg !== null) this.handlers.onMessage(msg);
    };
    ws.onerror = () => ws.close();
    ws.onclose = () => {
      this.handlers.onClose();
      if (!this.closed) {
        setTimeout(() => this.open(), this.reconnectDelayMs);
      }
    };
  }

  send(text: string): boolean {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(text);
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}

export function defaultWsUrl(location: { protocol: string; host: string }, session = "console"): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws?session=${encodeURIComponent(session)}`;
}
