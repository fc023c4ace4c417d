// Wire protocol message types and parsing (one JSON object per WS message).

export type Mode = "front-camera" | "spir-existing" | "spir2";

export const MODES: Mode[] = ["front-camera", "spir-existing", "spir2"];

export interface Diag {
  record_id?: number | null;
  d?: number | null;
  theta?: number | null;
  sub_fraction?: number | null;
  switch_count?: number | null;
  delayed_t?: number | null;
}

export interface FrameMessage {
  type: "frame";
  t: number;
  png_or_ppm_b64: string;
  mode: Mode;
  diag: Diag;
}

export interface ConfigMessage {
  type: "config";
  mode?: Mode;
  preset?: string;
  seed?: number;
  duration?: number | null;
  send_every?: number;
  realtime?: boolean;
  image_interval?: number;
  max_steering?: number;
}

export interface EndMessage {
  type: "end";
  t: number;
  frames_sent: number;
}

export type ServerMessage = FrameMessage | ConfigMessage | EndMessage;

export interface CmdMessage {
  type: "cmd";
  throttle: number;
  steering: number;
}

export interface ModeMessage {
  type: "mode";
  value: Mode;
}

export function isMode(value: unknown): value is Mode {
  return typeof value === "string" && (MODES as string[]).includes(value);
}

export function parseServerMessage(data: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "frame":
      if (typeof msg.t === "number" && typeof msg.png_or_ppm_b64 === "string" && isMode(msg.mode)) {
        return {
          type: "frame",
          t: msg.t,
          png_or_ppm_b64: msg.png_or_ppm_b64,
          mode: msg.mode,
          diag: (typeof msg.diag === "object" && msg.diag !== null ? msg.diag : {}) as Diag,
        };
      }
      return null;
    case "config":
      return raw as ConfigMessage;
    case "end":
      if (typeof msg.t === "number") return raw as EndMessage;
      return null;
    default:
      return null;
  }
}

export function cmdMessage(throttle: number, steering: number): string {
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  return JSON.stringify({ type: "cmd", throttle: clamp(throttle), steering } satisfies CmdMessage);
}

export function modeMessage(value: Mode): string {
  return JSON.stringify({ type: "mode", value } satisfies ModeMessage);
}
