import math

import pytest

from memspike.waveforms import (
    DcStep,
    PulseTrain,
    Sine,
    SumWave,
    eval_waveform,
    waveform_from_dict,
    waveform_to_dict,
)


def test_dc_step_before_and_after_onset():
    w = DcStep(amplitude=1.0, t_on=0.5)
    assert eval_waveform(w, 0.4) == 0.0
    assert eval_waveform(w, 0.5) == 1.0
    assert eval_waveform(w, 100.0) == 1.0


def test_dc_step_window():
    w = DcStep(amplitude=2.0, t_on=1.0, t_off=2.0)
    assert eval_waveform(w, 1.5) == 2.0
    assert eval_waveform(w, 2.0) == 0.0


def test_sine_zero_and_quarter_period():
    w = Sine(amplitude=1.0, omega=2.0 * math.pi)
    assert eval_waveform(w, 0.0) == 0.0
    assert eval_waveform(w, 0.25) == pytest.approx(1.0)


def test_pulse_train_duty_cycle():
    w = PulseTrain(amplitude=3.0, period=1.0, duty=0.25)
    assert eval_waveform(w, 0.1) == 3.0
    assert eval_waveform(w, 0.3) == 0.0
    assert eval_waveform(w, 1.1) == 3.0


def test_sum_adds_components():
    w = SumWave((DcStep(amplitude=1.0), Sine(amplitude=1.0, omega=2.0 * math.pi)))
    assert eval_waveform(w, 0.25) == pytest.approx(2.0)


def test_invariant_validation():
    with pytest.raises(ValueError):
        DcStep(amplitude=1.0, t_on=2.0, t_off=1.0)
    with pytest.raises(ValueError):
        PulseTrain(amplitude=1.0, period=0.0, duty=0.5)
    with pytest.raises(ValueError):
        PulseTrain(amplitude=1.0, period=1.0, duty=1.0)


@pytest.mark.parametrize("w", [
    DcStep(amplitude=1.5, t_on=0.1, t_off=0.9),
    Sine(amplitude=0.5, omega=3.0, phase=0.2),
    PulseTrain(amplitude=1.0, period=0.5, duty=0.3),
    SumWave((DcStep(amplitude=1.0), Sine(amplitude=2.0, omega=1.0))),
])
def test_dict_round_trip(w):
    assert waveform_from_dict(waveform_to_dict(w)) == w


def test_unknown_variant_rejected():
    with pytest.raises(ValueError):
        waveform_from_dict({"variant": "sawtooth", "amplitude": 1.0})
