// Operator input: keyboard (arrow keys with auto-centering steering) and an
// absolute-axis gamepad, sampled at a fixed 50 Hz command cadence.

export interface InputAxes {
  throttle: number; // [-1, 1]
  steering: number; // radians, [-maxSteering, maxSteering]
}

export interface KeyStates {
  up: boolean;
  down: boolean;
  left: boolean;
  right: boolean;
  brake: boolean;
}

export const COMMAND_PERIOD_MS = 20; // 50 Hz, matching the telemetry interval

const THROTTLE_STEP = 0.04; // per sample while a key is held
const STEER_STEP_FRACTION = 0.06; // of max steering, per sample
const STEER_CENTER_FRACTION = 0.04; // auto-centering rate per sample

export function newAxes(): InputAxes {
  return { throttle: 0, steering: 0 };
}

export function newKeys(): KeyStates {
  return { up: false, down: false, left: false, right: false, brake: false };
}

/** Advance axes one 20 ms sample from the held keys; steering auto-centers. */
export function stepKeyboard(axes: InputAxes, keys: KeyStates, maxSteering: number): InputAxes {
  let throttle = axes.throttle;
  if (keys.brake) {
    throttle = 0;
  } else {
    if (keys.up) throttle += THROTTLE_STEP;
    if (keys.down) throttle -= THROTTLE_STEP;
  }
  throttle = Math.max(-1, Math.min(1, throttle));

  let steering = axes.steering;
  const step = STEER_STEP_FRACTION * maxSteering;
  if (keys.left) steering -= step; // screen-left turns the wheel left
  if (keys.right) steering += step;
  if (!keys.left && !keys.right) {
    const center = STEER_CENTER_FRACTION * maxSteering;
    if (Math.abs(steering) <= center) steering = 0;
    else steering -= Math.sign(steering) * center;
  }
  steering = Math.max(-maxSteering, Math.min(maxSteering, steering));
  return { throttle, steering };
}

export interface GamepadSample {
  steerAxis: number; // raw [-1, 1], left = -1
  throttleAxis: number; // raw [-1, 1], push forward = -1
}

const DEADZONE = 0.08;

function deadzone(v: number): number {
  return Math.abs(v) < DEADZONE ? 0 : v;
}

/** Map absolute gamepad axes onto the command axes (full-left = -maxSteering). */
export function applyGamepad(sample: GamepadSample, maxSteering: number): InputAxes {
  const steer = deadzone(Math.max(-1, Math.min(1, sample.steerAxis)));
  const thr = deadzone(Math.max(-1, Math.min(1, sample.throttleAxis)));
  return { throttle: 0 - thr, steering: steer * maxSteering };
}

export type SendCommand = (throttle: number, steering: number) => void;

export interface CommandLoop {
  stop: () => void;
  sampleCount: () => number;
}

/**
 * Fixed-rate command loop: every 20 ms advance the axes (gamepad when a
 * sampler is supplied and reports a pad, keyboard otherwise) and emit one
 * cmd message, including periodic zero-throttle commands when idle.
 */
export function startCommandLoop(
  axes: InputAxes,
  keys: KeyStates,
  send: SendCommand,
  maxSteering: () => number,
  readGamepad: () => GamepadSample | null = () => null,
  setIntervalFn: typeof setInterval = setInterval,
  clearIntervalFn: typeof clearInterval = clearInterval,
): CommandLoop {
  let count = 0;
  const handle = setIntervalFn(() => {
    const pad = readGamepad();
    const next = pad ? applyGamepad(pad, maxSteering()) : stepKeyboard(axes, keys, maxSteering());
    axes.throttle = next.throttle;
    axes.steering = next.steering;
    send(axes.throttle, axes.steering);
    count += 1;
  }, COMMAND_PERIOD_MS);
  return {
    stop: () => clearIntervalFn(handle),
    sampleCount: () => count,
  };
}
