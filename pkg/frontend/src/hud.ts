// Diagnostics HUD formatting (pure functions; DOM wiring lives in main).

import type { ConsoleState } from "./state.js";

export function formatTheta(thetaRad: number | null | undefined): string {
  if (thetaRad === null || thetaRad === undefined) return "theta: --";
  return `theta: ${((thetaRad * 180) / Math.PI).toFixed(1)} deg`;
}

export function formatDistance(d: number | null | undefined): string {
  if (d === null || d === undefined) return "d: --";
  return `d: ${d.toFixed(2)} m`;
}

export function formatSwitches(count: number | null | undefined): string {
  if (count === null || count === undefined) return "switches: --";
  return `switches: ${Math.max(0, count - 1)}`;
}

export function hudLines(state: ConsoleState, nowMs: number, stale: boolean): string[] {
  const lines = [
    `mode: ${state.displayedMode ?? "--"}`,
    state.frameT === null ? "t: --" : `t: ${state.frameT.toFixed(2)} s`,
    formatDistance(state.diag.d),
    formatTheta(state.diag.theta),
    formatSwitches(state.diag.switch_count),
  ];
  if (state.requestedMode && state.requestedMode !== state.displayedMode) {
    lines.push(`(switching to ${state.requestedMode}...)`);
  }
  if (stale) {
    lines.push("STALE FRAME");
  }
  return lines;
}
