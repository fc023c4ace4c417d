import { describe, expect, it } from "vitest";

import { hudLines } from "../src/hud.js";
import type { FrameMessage } from "../src/protocol.js";
import { applyFrame, initialState, isStale } from "../src/state.js";

function frame(t: number, mode: FrameMessage["mode"] = "spir2", diag = {}): FrameMessage {
  return { type: "frame", t, png_or_ppm_b64: "", mode, diag };
}

describe("console state", () => {
  it("counts one render per delivered frame and tracks the frame tag", () => {
    const state = initialState();
    applyFrame(state, frame(1.9), 100);
    applyFrame(state, frame(3.3, "front-camera"), 200);
    expect(state.framesReceived).toBe(2);
    expect(state.displayedMode).toBe("front-camera");
    expect(state.frameT).toBe(3.3);
  });

  it("flags staleness past twice the image interval", () => {
    const state = initialState();
    state.imageInterval = 1.4;
    applyFrame(state, frame(0.0), 1000);
    expect(isStale(state, 1000 + 2 * 1400)).toBe(false);
    expect(isStale(state, 1000 + 2 * 1400 + 1)).toBe(true);
  });

  it("is never stale before the first frame (placeholder screen instead)", () => {
    const state = initialState();
    expect(isStale(state, 1e9)).toBe(false);
  });

  it("displayed mode follows only server-acknowledged frames", () => {
    const state = initialState();
    applyFrame(state, frame(1.0, "spir2"), 0);
    state.requestedMode = "front-camera"; // not yet acknowledged
    expect(state.displayedMode).toBe("spir2");
    applyFrame(state, frame(1.1, "front-camera"), 50);
    expect(state.displayedMode).toBe("front-camera");
  });
});

describe("hud", () => {
  it("shows theta in degrees", () => {
    const state = initialState();
    applyFrame(state, frame(2.0, "spir2", { theta: Math.PI / 3, d: 7.25, switch_count: 4 }), 0);
    const lines = hudLines(state, 0, false);
    expect(lines).toContain("theta: 60.0 deg");
    expect(lines).toContain("d: 7.25 m");
    expect(lines).toContain("switches: 3");
  });

  it("marks stale frames and pending mode switches", () => {
    const state = initialState();
    applyFrame(state, frame(2.0), 0);
    state.requestedMode = "front-camera";
    const lines = hudLines(state, 1e7, true);
    expect(lines).toContain("STALE FRAME");
    expect(lines.some((l) => l.includes("switching to front-camera"))).toBe(true);
  });

  it("renders placeholders before any frame", () => {
    const lines = hudLines(initialState(), 0, false);
    expect(lines).toContain("mode: --");
    expect(lines).toContain("t: --");
  });
});
