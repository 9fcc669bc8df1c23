/**
 * WebSocket session binding with reconnect backoff and role tracking.
 * Decoded states land in the latest-wins mailbox; command sends are
 * blocked locally unless this connection holds the driver role.
 */

import { StateMailbox } from "./mailbox.js";
import {
  Command,
  HandshakeMessage,
  ReplyMessage,
  SchemaMismatchError,
  decodeServerMessage,
  encodeCommand,
} from "./protocol.js";

export type ConnectionStatus =
  | "connecting"
  | "connected"
  | "retrying"
  | "schema-mismatch"
  | "closed";

export interface ClientEvents {
  onStatus?: (status: ConnectionStatus, detail?: string) => void;
  onHandshake?: (handshake: HandshakeMessage) => void;
  onReply?: (reply: ReplyMessage) => void;
}

const BACKOFF_INITIAL_MS = 500;
const BACKOFF_MAX_MS = 8000;

export class TeleopClient {
  readonly mailbox = new StateMailbox();
  role: "driver" | "viewer" | "none" = "none";
  private socket: WebSocket | null = null;
  private seq = 0;
  private backoffMs = BACKOFF_INITIAL_MS;
  private stopped = false;

  constructor(
    private readonly url: string,
    private readonly events: ClientEvents = {},
    private readonly socketFactory: (url: string) => WebSocket = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.events.onStatus?.("connecting");
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = BACKOFF_INITIAL_MS;
      this.events.onStatus?.("connected");
    };
    socket.onmessage = (event: MessageEvent) => this.handleMessage(String(event.data));
    socket.onclose = () => this.scheduleRetry();
    socket.onerror = () => {
      /* close follows; retry handled there */
    };
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
    this.events.onStatus?.("closed");
  }

  /** Returns false (and sends nothing) for viewer connections. */
  sendCommand(command: Command): boolean {
    if (this.role !== "driver") return false;
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return false;
    this.seq += 1;
    this.socket.send(encodeCommand(command, this.seq));
    return true;
  }

  private handleMessage(raw: string): void {
    let message;
    try {
      message = decodeServerMessage(raw);
    } catch (err) {
      if (err instanceof SchemaMismatchError) {
        // incompatible server: stop retrying, surface the banner
        this.stopped = true;
        this.socket?.close();
        this.events.onStatus?.("schema-mismatch", err.message);
        return;
      }
      return; // ignore unparseable frames
    }
    if (message.type === "handshake") {
      this.role = message.role;
      this.events.onHandshake?.(message);
    } else if (message.type === "state") {
      this.mailbox.post(message);
    } else {
      this.events.onReply?.(message);
    }
  }

  private scheduleRetry(): void {
    if (this.stopped) return;
    this.role = "none";
    this.events.onStatus?.("retrying", `reconnecting in ${this.backoffMs} ms`);
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
    setTimeout(() => this.connect(), delay);
  }
}
