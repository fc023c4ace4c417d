import math

import numpy as np
import pytest

from spir_teleop.channel import (
    FRONT_CAMERA_PRESET,
    HEADER_BYTES,
    SPIR_PRESET,
    Channel,
    ChannelSet,
    payload_size_model,
    preset_by_name,
)

DT = 0.02


def ticks(horizon):
    n = int(round(horizon / DT))
    return [i * DT for i in range(n + 1)]


def test_presets_match_table():
    spir = preset_by_name("spir")
    assert spir.jpeg_quality == 50
    assert (spir.image_width, spir.image_height) == (640, 480)
    assert spir.image_interval == 1.4
    assert spir.image_delay == 1.9
    assert spir.data_interval == 0.02
    assert spir.data_delay == 0.5
    front = preset_by_name("front-camera")
    assert front.jpeg_quality == 15
    assert front.image_interval == 0.7
    assert front.image_delay == 1.2
    assert front.data_delay == 0.5


def test_spir_capture_times():
    ch = Channel(SPIR_PRESET.image_interval, SPIR_PRESET.image_delay)
    sends = []
    for t in ticks(10.0):
        msg = ch.maybe_capture(t, lambda: "frame")
        if msg is not None:
            sends.append(msg.send_time)
    expected = [i * 1.4 for i in range(8)]  # 0, 1.4, ..., 9.8
    assert len(sends) == len(expected)
    for got, want in zip(sends, expected):
        assert got == pytest.approx(want, abs=1e-9)


def test_capture_at_2p8_delivers_at_4p7():
    ch = Channel(1.4, 1.9)
    msgs = []
    for t in ticks(3.0):
        m = ch.maybe_capture(t, lambda: "x")
        if m is not None:
            msgs.append(m)
    third = msgs[2]
    assert third.send_time == pytest.approx(2.8, abs=1e-9)
    assert third.deliver_time == pytest.approx(4.7, abs=1e-9)


def test_zero_delay_degenerate_channel():
    ch = Channel(0.02, 0.0)
    m = ch.maybe_capture(0.5, lambda: "p")
    assert m is not None
    assert m.deliver_time == m.send_time


def test_poll_empty_queue():
    ch = Channel(1.0, 1.0)
    assert ch.poll(100.0) == []


def test_poll_orders_ties_by_send_time():
    ch = Channel(1.0, 1.0)
    # Two injected messages due at the same tick.
    ch.inject("b_sent_later", 0.6)
    ch.inject("a_sent_first", 0.4)
    # Different deliver times: 1.4 and 1.6; both due at t=2.
    assert ch.poll(2.0) == ["a_sent_first", "b_sent_later"]


def test_poll_matches_sort_oracle():
    rng = np.random.default_rng(17)
    ch = Channel(1.0, 0.0)
    sent = []
    for i in range(400):
        send = float(rng.uniform(0, 50))
        delay = float(rng.uniform(0, 5))
        ch.delay = delay  # vary per message to stress ordering
        ch.inject(("p", i), send)
        sent.append((send + delay, send, i))
    delivered = []
    for t in np.arange(0.0, 60.0, 0.13):
        delivered.extend(ch.poll(float(t)))
    oracle = [("p", i) for (_, _, i) in sorted(sent)]
    assert delivered == oracle


def test_never_delivered_early():
    rng = np.random.default_rng(3)
    for _ in range(50):
        interval = float(rng.uniform(0.05, 2.0))
        delay = float(rng.uniform(0.0, 3.0))
        ch = Channel(interval, delay)
        sends = {}
        for t in ticks(20.0):
            m = ch.maybe_capture(t, lambda: object())
            if m is not None:
                sends[id(m.payload)] = m.send_time
            for p in ch.poll(t):
                assert t >= sends[id(p)] + delay - 1e-9


def test_emission_count_over_horizon():
    rng = np.random.default_rng(8)
    for _ in range(30):
        interval_ticks = int(rng.integers(1, 120))
        interval = interval_ticks * DT
        ch = Channel(interval, 0.3)
        horizon = float(rng.uniform(2.0, 30.0))
        count = 0
        for t in ticks(horizon):
            if ch.maybe_capture(t, lambda: None) is not None:
                count += 1
        assert count == math.floor(round(horizon / interval, 9)) + 1


def test_telemetry_lag_exact():
    cs = ChannelSet.from_preset(SPIR_PRESET)
    delivered = []
    for t in ticks(3.0):
        cs.telemetry.maybe_capture(t, lambda t=t: {"t": t})
        for p in cs.telemetry.poll(t):
            delivered.append((t, p["t"]))
    assert delivered
    for arrive, stamped in delivered:
        assert arrive - stamped == pytest.approx(SPIR_PRESET.data_delay, abs=1e-9)


def test_payload_model_monotone_and_header():
    assert payload_size_model(640, 480, 15) <= payload_size_model(640, 480, 50)
    assert payload_size_model(320, 240, 50) <= payload_size_model(640, 480, 50)
    assert payload_size_model(0, 0, 50) == HEADER_BYTES


def test_payload_model_formula():
    # Documented model: 64 + ceil(w*h*(0.1 + 0.02*q)/8) bytes.
    w, h, q = 640, 480, 50
    expected = 64 + math.ceil(w * h * (0.1 + 0.02 * q) / 8.0)
    assert payload_size_model(w, h, q) == expected
    with pytest.raises(ValueError):
        payload_size_model(640, 480, 0)


def test_jitter_disabled_by_default_and_deterministic_with_seed():
    a = Channel(0.5, 1.0, jitter=0.2, seed=7)
    b = Channel(0.5, 1.0, jitter=0.2, seed=7)
    for t in ticks(5.0):
        ma = a.maybe_capture(t, lambda: None)
        mb = b.maybe_capture(t, lambda: None)
        assert (ma is None) == (mb is None)
        if ma is not None:
            assert ma.deliver_time == mb.deliver_time
            assert ma.deliver_time >= ma.send_time + 1.0 - 1e-12
