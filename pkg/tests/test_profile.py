import pytest
from scipy import integrate

from common.errors import DegenerateProfileError, InvalidParameterError
from gammalab import profile as phi


@pytest.mark.parametrize("kind, p, scale", [
    ("indicator", 1.0, 0.5),
    ("indicator", 2.0, 1.0),
    ("saturating_power", 1.0, 0.25),
    ("saturating_power", 2.0, 1.0 / 3.0),
    ("compact_bump", 1.0, 0.5),
])
def test_default_scale_is_normalized(kind, p, scale):
    profile = phi.make_profile(kind, p)
    assert profile.scale == pytest.approx(scale)
    assert profile.normalized
    assert phi.normalization_integral(profile) == pytest.approx(0.5, abs=1e-9)


def test_normalize_rescales_unit_indicator():
    raw = phi.make_profile("indicator", 1.0, scale=1.0)
    assert not raw.normalized
    assert phi.normalization_integral(raw) == pytest.approx(1.0, abs=1e-9)
    fixed = phi.normalize(raw)
    assert fixed.scale == pytest.approx(0.5)
    assert fixed.normalized


def test_jump_takes_left_limit(indicator, compact):
    assert phi.eval_phi(indicator, 1.0) == 0.0
    assert phi.eval_phi_side(indicator, 1.0, "right") == 0.5
    assert phi.eval_phi(indicator, 1.0 + 1e-6) == 0.5
    assert phi.eval_phi(compact, 1.0) == 0.5
    assert phi.eval_phi_side(compact, 1.0, "right") == 0.0


def test_phi_delta_at_unit_scale_matches_phi(saturating):
    ts = [0.0, 0.3, 1.0, 2.5, 10.0]
    for t in ts:
        assert phi.eval_phi_delta(saturating, t, 1.0) == phi.eval_phi(saturating, t)
    # φ_δ(t) = δ^p φ(t/δ)
    assert phi.eval_phi_delta(saturating, 0.05, 0.1) == pytest.approx(0.1 * phi.eval_phi(saturating, 0.5))


def test_snap_to_jumps(indicator):
    assert phi.snap_to_jumps(indicator, 1.0 + 1e-12) == 1.0
    assert phi.snap_to_jumps(indicator, 1.001) == pytest.approx(1.001)


@pytest.mark.parametrize("kind", ["indicator", "saturating_power", "compact_bump"])
@pytest.mark.parametrize("t", [0.4, 1.0, 2.5])
def test_antiderivative_matches_quad(kind, t):
    profile = phi.make_profile(kind, 1.0)
    expected, _ = integrate.quad(lambda s: phi.eval_phi(profile, s), 0.0, t, points=[1.0] if t > 1.0 else None)
    assert phi.antiderivative(profile, t) == pytest.approx(expected, abs=1e-10)


def test_verify_conditions_passes_for_builtin(indicator):
    report = phi.verify_conditions(indicator)
    assert report.passed
    assert report.normalization == pytest.approx(0.5, abs=1e-9)
    assert report.limit_factor == pytest.approx(1.0, abs=1e-8)


def test_verify_conditions_reports_unnormalized():
    report = phi.verify_conditions(phi.make_profile("indicator", 1.0, scale=1.0))
    assert not report.checks["normalization"]
    assert report.checks["alpha_bound"] and report.checks["beta_bound"]
    assert not report.passed
    assert report.limit_factor == pytest.approx(2.0, abs=1e-8)


def test_alpha_bound_violation_is_reported():
    profile = phi.make_profile("saturating_power", 1.0, alpha=0.01)
    report = phi.verify_conditions(profile)
    assert not report.checks["alpha_bound"]


def test_tabulated_sample_file():
    profile = phi.load_tabulated(phi.SAMPLE_PROFILE_FILE, 1.0)
    assert profile.jump_points == (1.5,)
    assert phi.eval_phi(profile, 1.5) == pytest.approx(0.3)
    assert phi.eval_phi_side(profile, 1.5, "right") == pytest.approx(0.5)
    assert phi.eval_phi(profile, 0.75) == pytest.approx(0.1)
    assert phi.eval_phi(profile, 100.0) == pytest.approx(0.5)
    normalized = phi.normalize(profile)
    assert phi.normalization_integral(normalized) == pytest.approx(0.5, abs=1e-9)


def test_tabulated_antiderivative_across_jump():
    profile = phi.load_tabulated(phi.SAMPLE_PROFILE_FILE, 1.0)
    # 0.5~1: 0.05, 1~1.5: 0.125, 1.5~2: 0.25
    assert phi.antiderivative(profile, 2.0) == pytest.approx(0.05 + 0.125 + 0.25)


def test_zero_profile_cannot_be_normalized():
    zero = phi.tabulated_profile([0.0, 1.0], [0.0, 0.0], 1.0)
    with pytest.raises(DegenerateProfileError):
        phi.normalize(zero)


@pytest.mark.parametrize("kwargs", [
    {"kind": "bogus", "p": 1.0},
    {"kind": "indicator", "p": 0.5},
    {"kind": "indicator", "p": 1.0, "scale": -1.0},
])
def test_invalid_profiles(kwargs):
    with pytest.raises(InvalidParameterError):
        phi.make_profile(**kwargs)


def test_tabulated_jump_marker_must_match_duplicates():
    with pytest.raises(InvalidParameterError):
        phi.tabulated_profile([0.0, 1.0, 1.0, 2.0], [0.0, 0.1, 0.5, 0.5], 1.0, jumps=())
