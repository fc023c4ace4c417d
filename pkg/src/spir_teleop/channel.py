"""Narrow-band channel emulation: interval-gated capture, fixed-delay delivery.

Each message class (image / telemetry / command) has a transmission interval
(how often a message may leave the producer) and a delay (send to delivery).
Payloads cross by reference; image bandwidth is represented by a documented
byte-size model rather than an actual codec.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

_EPS = 1e-9


@dataclass(frozen=True)
class ChannelPreset:
    """Per-class channel parameters; intervals and delays in seconds."""

    name: str
    jpeg_quality: int
    image_width: int = 640
    image_height: int = 480
    image_interval: float = 0.7
    image_delay: float = 1.2
    data_interval: float = 0.02
    data_delay: float = 0.5
    # Operator-to-vehicle uplink delay; mirrors the downlink data delay.
    command_delay: float = 0.5

    def __post_init__(self):
        if self.image_interval <= 0 or self.data_interval <= 0:
            raise ValueError("intervals must be positive")
        if min(self.image_delay, self.data_delay, self.command_delay) < 0:
            raise ValueError("delays must be non-negative")


FRONT_CAMERA_PRESET = ChannelPreset(
    name="front-camera",
    jpeg_quality=15,
    image_interval=0.7,
    image_delay=1.2,
)

SPIR_PRESET = ChannelPreset(
    name="spir",
    jpeg_quality=50,
    image_interval=1.4,
    image_delay=1.9,
)

PRESETS = {p.name: p for p in (FRONT_CAMERA_PRESET, SPIR_PRESET)}


def preset_by_name(name: str) -> ChannelPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class TimedMessage:
    payload: Any
    send_time: float
    deliver_time: float
    seq: int = 0


class Channel:
    """One message class: interval gate on capture, fixed delay, ordered queue.

    Optional bounded jitter (seeded, non-negative) can be added to the delay;
    it defaults to zero so runs stay deterministic and exactly Table-shaped.
    """

    def __init__(self, interval: float, delay: float, jitter: float = 0.0, seed: int = 0):
        if interval <= 0:
            raise ValueError("interval must be positive")
        if delay < 0 or jitter < 0:
            raise ValueError("delay and jitter must be non-negative")
        self.interval = interval
        self.delay = delay
        self.jitter = jitter
        self._rng = np.random.default_rng(seed)
        self._heap: list[tuple[float, float, int, Any]] = []
        self._seq = 0
        self.last_emission_time: float | None = None

    def maybe_capture(self, sim_time: float, producer: Callable[[], Any]) -> TimedMessage | None:
        """Emit a message when the interval has elapsed since the last one.

        `producer` is only invoked when a message is actually emitted.
        """
        last = self.last_emission_time
        if last is not None and sim_time - last < self.interval - _EPS:
            return None
        self.last_emission_time = sim_time
        extra = float(self._rng.uniform(0.0, self.jitter)) if self.jitter > 0 else 0.0
        msg = TimedMessage(producer(), sim_time, sim_time + self.delay + extra, self._seq)
        self._seq += 1
        heapq.heappush(self._heap, (msg.deliver_time, msg.send_time, msg.seq, msg.payload))
        return msg

    def inject(self, payload: Any, send_time: float) -> TimedMessage:
        """Queue a message bypassing the interval gate (replay, live console)."""
        msg = TimedMessage(payload, send_time, send_time + self.delay, self._seq)
        self._seq += 1
        heapq.heappush(self._heap, (msg.deliver_time, msg.send_time, msg.seq, msg.payload))
        return msg

    def poll(self, sim_time: float) -> list[Any]:
        """Pop every payload due at sim_time, in (deliver, send, insertion) order."""
        out = []
        while self._heap and self._heap[0][0] <= sim_time + _EPS:
            out.append(heapq.heappop(self._heap)[3])
        return out

    def pending(self) -> int:
        return len(self._heap)


@dataclass
class ChannelSet:
    """The three links of one session, built from a preset."""

    image: Channel
    telemetry: Channel
    command: Channel
    preset: ChannelPreset = field(repr=False, default=SPIR_PRESET)

    @staticmethod
    def from_preset(preset: ChannelPreset, jitter: float = 0.0, seed: int = 0) -> "ChannelSet":
        return ChannelSet(
            image=Channel(preset.image_interval, preset.image_delay, jitter, seed),
            telemetry=Channel(preset.data_interval, preset.data_delay, jitter, seed + 1),
            command=Channel(preset.data_interval, preset.command_delay, jitter, seed + 2),
            preset=preset,
        )


# Payload size model standing in for JPEG encoding: a fixed 64-byte header
# plus (0.1 + 0.02 * quality) bits per pixel, rounded up to whole bytes.
HEADER_BYTES = 64


def payload_size_model(width: int, height: int, quality: int) -> int:
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    pixels = width * height
    if pixels == 0:
        return HEADER_BYTES
    bits_per_pixel = 0.1 + 0.02 * quality
    return HEADER_BYTES + math.ceil(pixels * bits_per_pixel / 8.0)
