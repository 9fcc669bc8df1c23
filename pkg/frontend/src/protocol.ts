/**
 * Wire protocol types and decoding for the teleop service.
 *
 * Every message carries schema_version; states with a version other than
 * SCHEMA_VERSION are rejected so a stale client never renders garbage.
 */

export const SCHEMA_VERSION = 1;

export interface StabilityFlags {
  alpha_exceeds_72: boolean;
  pitch_exceeds_70: boolean;
  freq_exceeds_1p5: boolean;
}

export type Phase = "WALKING" | "FLIPPING" | "TIP_CONTACT" | "INJECTING" | "RECOVERING";
export type AnchorName = "FL" | "FR" | "TIP" | "NONE";

export interface StateMessage {
  type: "state";
  schema_version: number;
  time: number;
  position: [number, number, number];
  orientation: [number, number, number, number];
  alpha: number;
  beta: number;
  anchor: AnchorName;
  pitch_theta: number;
  speed: number;
  flags: StabilityFlags;
  phase: Phase;
  dose_released: number;
  paused: boolean;
  time_scale: number;
  terminal: boolean;
  trace: [number, number][];
}

export interface HandshakeMessage {
  type: "handshake";
  schema_version: number;
  scenario: string;
  role: "driver" | "viewer";
  telemetry_rate: number;
  manifest: Record<string, unknown>;
}

export interface ReplyMessage {
  type: "ack" | "error";
  schema_version: number;
  seq: number;
  reason?: string;
  command?: string;
}

export type ServerMessage = StateMessage | HandshakeMessage | ReplyMessage;

export type Command =
  | { type: "set_beta"; degrees: number }
  | { type: "set_gait"; alpha_max?: number; frequency?: number; waveform?: string }
  | { type: "set_mode"; mode: "walk" | "deploy" | "pause" }
  | { type: "reset" }
  | { type: "set_time_scale"; factor: number };

export class SchemaMismatchError extends Error {
  constructor(public readonly got: unknown) {
    super(`schema version mismatch: expected ${SCHEMA_VERSION}, got ${String(got)}`);
  }
}

export function decodeServerMessage(raw: string): ServerMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new Error("malformed JSON from server");
  }
  if (typeof doc !== "object" || doc === null || !("type" in doc)) {
    throw new Error("message is not an object with a type");
  }
  const msg = doc as { type: string; schema_version?: unknown };
  if (msg.type === "state" || msg.type === "handshake") {
    if (msg.schema_version !== SCHEMA_VERSION) {
      throw new SchemaMismatchError(msg.schema_version);
    }
  }
  switch (msg.type) {
    case "state":
      return msg as StateMessage;
    case "handshake":
      return msg as HandshakeMessage;
    case "ack":
    case "error":
      return msg as ReplyMessage;
    default:
      throw new Error(`unknown message type ${msg.type}`);
  }
}

export function encodeCommand(command: Command, seq: number): string {
  return JSON.stringify({ type: "command", seq, command });
}
