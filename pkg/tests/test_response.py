import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotrad.response import (Lorentz, ParticleResponse, PowerLaw, Tabulated, Zero, alpha_im, combined_alpha_im,
                             load_tabulated, model_from_dict, model_to_dict, response_to_dict, validate_model)

freq = st.floats(1e6, 1e16)

MODELS = [Lorentz(1e-21, 2e13, 1e13), PowerLaw(1e-35, 1), PowerLaw(2e-60, 3),
          Tabulated([1e12, 1e13, 5e13], [0.0, 2e-22, 1e-23]), Zero()]


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
@given(w=freq)
def test_odd_extension(model, w):
    assert alpha_im(model, -w) == -alpha_im(model, w)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
@given(w=freq)
def test_passive_models_nonnegative(model, w):
    assert alpha_im(model, w) >= 0


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
def test_zero_frequency_and_nan(model):
    assert alpha_im(model, 0.0) == 0.0
    with pytest.raises(ValueError):
        alpha_im(model, math.nan)


def test_lorentz_low_frequency_slope():
    m = Lorentz(1e-21, 2e13, 1e13)
    w = 1e6
    assert alpha_im(m, w) / w == pytest.approx(m.slope_at_zero(), rel=1e-12)
    assert m.slope_at_zero() == pytest.approx(1e-21 * 1e13 / 4e26, rel=1e-15)


def test_lorentz_peak_value():
    # at resonance alpha'' = alpha0 w0 / g
    m = Lorentz(1e-21, 2e13, 1e13)
    assert alpha_im(m, 2e13) == pytest.approx(2e-21, rel=1e-14)


def test_power_law_values():
    assert alpha_im(PowerLaw(2.0, 3), -3.0) == -54.0
    assert PowerLaw(2.0, 3).slope_at_zero() == 0.0
    with pytest.raises(ValueError):
        PowerLaw(1.0, 0)


def test_tabulated_interpolates_and_never_extrapolates():
    t = Tabulated([1.0, 2.0, 4.0], [1.0, 3.0, 1.0])
    assert alpha_im(t, 1.5) == 2.0
    assert alpha_im(t, 3.0) == 2.0
    assert alpha_im(t, 0.5) == 0.0
    assert alpha_im(t, 5.0) == 0.0
    assert alpha_im(t, -1.5) == -2.0


def test_combined_channels_add():
    r = ParticleResponse(PowerLaw(1.0), PowerLaw(2.0))
    assert combined_alpha_im(r, 2.0) == 6.0
    assert r.alpha_im(-2.0) == -6.0


def test_validate_accepts_passive_models():
    for m in MODELS:
        assert validate_model(m, 1e16)
    assert validate_model(ParticleResponse(MODELS[0], MODELS[1]), 1e16)


def test_validate_flags_negative_table_entry():
    rep = validate_model(Tabulated([1.0, 2.0, 3.0], [1.0, -0.5, 1.0]), 10.0)
    assert not rep
    assert rep.index == 1
    assert "-5.000e-01" in rep.message


def test_validate_flags_descending_grid():
    rep = validate_model(Tabulated([1.0, 3.0, 2.0], [1.0, 1.0, 1.0]), 10.0)
    assert not rep and rep.index == 2


def test_validate_flags_active_analytic_models():
    assert not validate_model(PowerLaw(-1.0), 1.0)
    assert not validate_model(Lorentz(-1e-21, 2e13, 1e13), 1e15)
    rep = validate_model(ParticleResponse(Zero(), PowerLaw(-1.0)), 1.0)
    assert not rep and rep.message.startswith("magnetic")


def test_validate_rejects_bad_range():
    with pytest.raises(ValueError):
        validate_model(Zero(), 0.0)


def test_table_shape_errors():
    with pytest.raises(ValueError):
        Tabulated([1.0], [1.0])
    with pytest.raises(ValueError):
        Tabulated([1.0, 2.0], [1.0, np.inf])


def test_load_tabulated(tmp_path):
    f = tmp_path / "eps.csv"
    f.write_text("# omega, alpha\n1e12,0\n2e12,1e-22\n3e12,0\n")
    t = load_tabulated(f)
    assert alpha_im(t, 1.5e12) == pytest.approx(5e-23)
    assert t.source == str(f)
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n4,5,6\n")
    with pytest.raises(ValueError, match="2 columns"):
        load_tabulated(bad)
    with pytest.raises(ValueError):
        load_tabulated(tmp_path / "missing.csv")


@pytest.mark.parametrize("model", MODELS[:3] + [Zero()], ids=lambda m: type(m).__name__)
def test_dict_roundtrip(model):
    assert model_from_dict(model_to_dict(model)) == model


def test_dict_table_path_relative(tmp_path):
    (tmp_path / "t.csv").write_text("1,0\n2,1\n")
    t = model_from_dict({"type": "tabulated", "path": "t.csv"}, tmp_path)
    assert alpha_im(t, 2.0) == 1.0
    assert response_to_dict(ParticleResponse(t))["electric"]["points"] == 2


@pytest.mark.parametrize("spec", [
    {"type": "drude"},
    {"type": "lorentz", "alpha0_cm3": 1, "omega0_rad_s": 1},
    {"type": "zero", "extra": 1},
    {"alpha0_cm3": 1},
])
def test_dict_errors(spec):
    with pytest.raises(ValueError):
        model_from_dict(spec)
