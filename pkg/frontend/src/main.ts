// Console entry point: wires the connection, renderer, HUD and input loops.

import { Connection, defaultWsUrl } from "./connection.js";
import { hudLines } from "./hud.js";
import { newAxes, newKeys, startCommandLoop, type GamepadSample } from "./input.js";
import { cmdMessage, isMode, modeMessage, MODES } from "./protocol.js";
import { CanvasRenderer } from "./renderer.js";
import { applyFrame, initialState, isStale } from "./state.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const modeBar = document.getElementById("modes") as HTMLDivElement;
const renderer = new CanvasRenderer(canvas);
const state = initialState();
const axes = newAxes();
const keys = newKeys();

const connection = new Connection(defaultWsUrl(window.location), {
  onOpen: () => {
    state.connected = true;
  },
  onClose: () => {
    state.connected = false;
  },
  onMessage: (msg) => {
    if (msg.type === "frame") {
      renderer.setFrame(msg.png_or_ppm_b64);
      applyFrame(state, msg, performance.now());
    } else if (msg.type === "config") {
      if (msg.image_interval) state.imageInterval = msg.image_interval;
      if (msg.max_steering) state.maxSteering = msg.max_steering;
      if (msg.mode) state.requestedMode = msg.mode;
    }
  },
});
connection.connect();

// Mode switch buttons; the HUD shows the server-acknowledged mode only.
for (const mode of MODES) {
  const btn = document.createElement("button");
  btn.textContent = mode;
  btn.onclick = () => {
    state.requestedMode = mode;
    connection.send(modeMessage(mode));
  };
  modeBar.appendChild(btn);
}

const KEYMAP: Record<string, keyof typeof keys> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
  " ": "brake",
};

window.addEventListener("keydown", (ev) => {
  const mapped = KEYMAP[ev.key];
  if (mapped && state.connected) {
    keys[mapped] = true;
    ev.preventDefault();
  }
  if (ev.key >= "1" && ev.key <= "3") {
    const mode = MODES[Number(ev.key) - 1];
    if (isMode(mode)) {
      state.requestedMode = mode;
      connection.send(modeMessage(mode));
    }
  }
});
window.addEventListener("keyup", (ev) => {
  const mapped = KEYMAP[ev.key];
  if (mapped) keys[mapped] = false;
});

function readGamepad(): GamepadSample | null {
  const pads = navigator.getGamepads?.() ?? [];
  const pad = pads.find((p) => p !== null);
  if (!pad) return null;
  return { steerAxis: pad.axes[0] ?? 0, throttleAxis: pad.axes[1] ?? 0 };
}

startCommandLoop(
  axes,
  keys,
  (throttle, steering) => {
    if (state.connected) connection.send(cmdMessage(throttle, steering));
  },
  () => state.maxSteering,
  readGamepad,
);

function paint(): void {
  const now = performance.now();
  renderer.draw(hudLines(state, now, isStale(state, now)), !state.connected);
  requestAnimationFrame(paint);
}
requestAnimationFrame(paint);
