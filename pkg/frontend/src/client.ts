// WebSocket wiring: frames feed the ViewState; the caller learns about
// connection changes so it can disable input and offer a reconnect.

import { ClientMessage } from "./protocol.js";
import { ViewState } from "./view_state.js";

export class SteerClient {
  private ws: WebSocket | null = null;

  constructor(
    readonly url: string,
    readonly view: ViewState,
    private readonly onChange: () => void = () => {},
  ) {}

  connect(): void {
    this.view.connection = "connecting";
    this.onChange();
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.view.connection = "open";
      this.onChange();
    };
    ws.onmessage = (msg) => {
      this.view.applyRaw(String(msg.data));
      this.onChange();
    };
    ws.onclose = () => {
      this.view.connection = "closed";
      this.onChange();
    };
    ws.onerror = () => {
      console.warn("websocket error");
    };
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(message: ClientMessage): boolean {
    if (!this.connected || this.ws === null) return false;
    this.ws.send(JSON.stringify(message));
    return true;
  }

  sendWord(word: string): boolean {
    return this.send({ word });
  }
}
