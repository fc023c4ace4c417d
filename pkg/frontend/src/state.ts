// Console state: connection, last acknowledged mode, latest frame, staleness.
//
// The console never extrapolates the vehicle pose; it displays exactly the
// frames the server sends, and the displayed mode is always the mode tag of
// the last server frame (i.e. server-acknowledged, not locally assumed).

import type { Diag, FrameMessage, Mode } from "./protocol.js";

export interface ConsoleState {
  connected: boolean;
  displayedMode: Mode | null;
  requestedMode: Mode | null;
  frameT: number | null;
  diag: Diag;
  lastFrameWallMs: number | null;
  imageInterval: number; // seconds, from the config echo
  maxSteering: number; // radians, from the config echo
  framesReceived: number;
}

export function initialState(): ConsoleState {
  return {
    connected: false,
    displayedMode: null,
    requestedMode: null,
    frameT: null,
    diag: {},
    lastFrameWallMs: null,
    imageInterval: 1.4,
    maxSteering: 0.6108652381980153,
    framesReceived: 0,
  };
}

export function applyFrame(state: ConsoleState, msg: FrameMessage, nowMs: number): void {
  state.frameT = msg.t;
  state.diag = msg.diag ?? {};
  state.displayedMode = msg.mode;
  state.lastFrameWallMs = nowMs;
  state.framesReceived += 1;
}

/** Stale when no frame has arrived for more than twice the image interval. */
export function isStale(state: ConsoleState, nowMs: number): boolean {
  if (state.lastFrameWallMs === null) return false;
  return nowMs - state.lastFrameWallMs > 2 * state.imageInterval * 1000;
}

export function stalenessSeconds(state: ConsoleState, nowMs: number): number {
  if (state.lastFrameWallMs === null) return 0;
  return (nowMs - state.lastFrameWallMs) / 1000;
}
