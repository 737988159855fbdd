import math

import pytest

from common.errors import InconclusiveQuadratureError, InvalidParameterError
from gammalab import profile as phi
from gammalab.evaluator import (
    FarFieldPolicy,
    QuadConfig,
    SegmentEnergyTable,
    divergence_certificate,
    lambda_affine_1d,
    lambda_delta,
    lambda_delta_on_line,
    lambda_plain,
    lambda_zero,
    local_energy,
    staircase_oracle,
)
from gammalab.gridfn import (
    Interval,
    PiecewiseLinearFn,
    from_values,
    make_affine,
    make_heaviside,
    make_staircase,
    reflect,
    scale_values,
    shift_values,
    spatial_block_rescale,
)


def indicator_affine(delta):
    return 1.0 - delta + delta * math.log(delta)


def saturating_affine(delta):
    return 1.0 - 0.75 * delta + 0.5 * delta * math.log(delta)


@pytest.mark.parametrize("delta", [0.5, 0.1, 0.01])
def test_identity_matches_closed_form_indicator(indicator, identity, delta):
    energy = lambda_delta(identity, (0.0, 1.0), delta, 1.0, indicator)
    assert not energy.diverges
    assert energy.value == pytest.approx(indicator_affine(delta), rel=1e-6)


def test_identity_value_at_tenth(indicator, identity):
    assert lambda_delta(identity, (0.0, 1.0), 0.1, 1.0, indicator).value == pytest.approx(0.6697415, abs=1e-7)


@pytest.mark.parametrize("delta", [0.1, 0.01])
def test_identity_matches_closed_form_saturating(saturating, identity, delta):
    energy = lambda_delta(identity, (0.0, 1.0), delta, 1.0, saturating)
    assert energy.value == pytest.approx(saturating_affine(delta), rel=1e-6)


@pytest.mark.parametrize("kind", ["indicator", "saturating_power", "compact_bump"])
def test_affine_1d_oracle_agrees(kind):
    profile = phi.make_profile(kind, 1.0)
    line = make_affine((0.2, 0.7), 2.0, -0.1)
    expected = lambda_affine_1d(2.0, 0.5, 0.05, 1.0, profile)
    assert lambda_delta(line, line.interval, 0.05, 1.0, profile).value == pytest.approx(expected, rel=1e-6)


def test_affine_1d_oracle_for_p2():
    profile = phi.make_profile("saturating_power", 2.0)
    line = make_affine((0.0, 1.0), 1.0, 0.0)
    expected = lambda_affine_1d(1.0, 1.0, 0.1, 2.0, profile)
    assert lambda_delta(line, (0.0, 1.0), 0.1, 2.0, profile).value == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("delta", [0.1, 0.05])
def test_staircase_matches_series(indicator, delta):
    stairs = make_staircase((0.0, 1.0), delta)
    energy = lambda_delta(stairs, (0.0, 1.0), delta, 1.0, indicator)
    assert not energy.diverges
    assert energy.value == pytest.approx(staircase_oracle(delta, indicator), rel=1e-6)
    # 계단은 U 보다 에너지가 낮다
    assert energy.value < indicator_affine(delta) - 0.05


def test_compact_bump_double_staircase_is_free(compact):
    delta = 0.05
    energy = lambda_delta(make_staircase((0.0, 1.0), 2.0 * delta), (0.0, 1.0), delta, 1.0, compact)
    assert energy.value == 0.0
    assert energy.certificate is None


@pytest.mark.parametrize("depth", [12, 24])
def test_step_divergence_classification(indicator, compact, step, depth):
    config = QuadConfig(max_subdivision_depth=depth, divergence_probe_levels=depth)
    divergent = lambda_delta(step, (0.0, 1.0), 0.5, 1.0, indicator, config)
    assert divergent.value == math.inf
    assert divergent.certificate.location == 0.5
    assert divergent.certificate.side == "exact"
    assert divergent.certificate.phi_delta_lower_bound > 0.0
    finite = lambda_delta(step, (0.0, 1.0), 0.5, 1.0, compact, config)
    assert math.isfinite(finite.value)
    assert finite.certificate is None


def test_one_sided_divergence_uses_slopes(indicator):
    # 점프 δ 양옆이 증가하면 |Δu| 는 δ 위에서 다가간다: 오른쪽 극한 φ(1+) > 0 → 발산
    ramp = PiecewiseLinearFn([0.0, 0.5, 1.0], [0.0, 0.5, 1.1], [0.0, 0.6, 1.1])
    cert = divergence_certificate(ramp, 0.1, indicator)
    assert cert is not None and cert.side == "above"
    # 양옆이 평평하면 정확히 φ(1) = 0 → 유한
    flat = PiecewiseLinearFn([0.0, 0.5, 1.0], [0.0, 0.0, 0.1], [0.0, 0.1, 0.1])
    assert divergence_certificate(flat, 0.1, indicator) is None


def test_small_jump_under_saturating_power_diverges(saturating):
    bumpy = PiecewiseLinearFn([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], [0.0, 0.52, 1.0])
    assert lambda_delta(bumpy, (0.0, 1.0), 0.1, 1.0, saturating).diverges


def test_definitional_scaling(indicator, saturating):
    u = from_values([0.0, 0.4, 1.0], [0.0, 0.7, 0.2])
    for profile in (indicator, saturating):
        direct = lambda_delta(u, (0.0, 1.0), 0.1, 1.0, profile).value
        scaled = 0.1 * lambda_plain(scale_values(u, 10.0), (0.0, 1.0), 1.0, profile).value
        assert direct == pytest.approx(scaled, rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("values", [[0.0, 1.0], [0.0, 0.5, 0.4, 1.0]])
def test_block_rescale_identity(indicator, n, values):
    x = [0.0, 1.0] if len(values) == 2 else [0.0, 0.3, 0.6, 1.0]
    h = from_values(x, values)
    stretched = PiecewiseLinearFn(n * h.x, n * h.left, n * h.right)
    g = spatial_block_rescale(stretched, n)
    delta = 0.1
    left = lambda_delta(g, (0.0, 1.0), delta / n, 1.0, indicator).value
    right = lambda_delta(stretched, (0.0, float(n)), delta, 1.0, indicator).value / n
    assert left == pytest.approx(right, rel=1e-6)


def test_symmetries(saturating):
    u = from_values([0.0, 0.25, 0.6, 1.0], [0.3, -0.2, 0.5, 0.1])
    base = lambda_delta(u, (0.0, 1.0), 0.1, 1.0, saturating).value
    for other in (scale_values(u, -1.0), shift_values(u, 2.5), reflect(u)):
        assert lambda_delta(other, (0.0, 1.0), 0.1, 1.0, saturating).value == pytest.approx(base, rel=1e-9)


def test_domain_monotonicity(indicator, identity):
    whole = lambda_delta(identity, (0.0, 1.0), 0.05, 1.0, indicator).value
    part = lambda_delta(identity, (0.2, 0.7), 0.05, 1.0, indicator).value
    assert part < whole


def test_thread_count_does_not_change_value(indicator):
    u = from_values([0.0, 0.2, 0.5, 0.9, 1.0], [0.0, 0.3, 0.1, 0.8, 1.0])
    single = lambda_delta(u, (0.0, 1.0), 0.05, 1.0, indicator, QuadConfig(threads=1)).value
    multi = lambda_delta(u, (0.0, 1.0), 0.05, 1.0, indicator, QuadConfig(threads=4)).value
    assert single == multi


def test_local_energy_of_identity(indicator, identity):
    # 2 ∫_{δ}^{1/2} (δ/2) s^{-2} ds
    assert local_energy(identity, 0.5, 0.1, 1.0, indicator) == pytest.approx(0.8, rel=1e-9)


def test_local_energy_on_divergent_jump(indicator, step):
    assert local_energy(step, 0.5, 0.5, 1.0, indicator) == math.inf


def test_on_line_energy(compact, indicator):
    window = make_affine(Interval(0.0, 1.0, True), 1.0, 0.0)
    core = lambda_delta(window, (0.0, 1.0), 0.1, 1.0, compact).value
    on_line = lambda_delta_on_line(window, 0.1, 1.0, compact)
    assert on_line.value > core
    cutoff = QuadConfig(far_field_cutoff_policy=FarFieldPolicy.HARD_CUTOFF)
    assert lambda_delta_on_line(window, 0.1, 1.0, compact, cutoff).value == core
    # 지시 함수 프로파일은 바깥 상수 0 과 1 사이에서 p = 1 이면 발산
    far = lambda_delta_on_line(window, 0.1, 1.0, indicator)
    assert far.diverges and far.certificate.side == "far-field"


def test_on_line_far_field_p2():
    profile = phi.make_profile("indicator", 2.0)
    window = make_affine(Interval(0.0, 1.0, True), 1.0, 0.0)
    core = lambda_delta(window, (0.0, 1.0), 0.1, 2.0, profile).value
    on_line = lambda_delta_on_line(window, 0.1, 2.0, profile)
    # 바깥×바깥 항만으로 2·φ_δ(1)/(p(p−1)) = 0.01
    assert on_line.value > core + 0.01


def test_staircase_oracle_edge_cases(compact):
    assert staircase_oracle(0.05) > 0.0
    assert staircase_oracle(0.05, compact) == math.inf
    with pytest.raises(InvalidParameterError):
        staircase_oracle(1.5)


def test_limit_functional(step, identity):
    assert lambda_zero(step, 1.0, 0.7) == pytest.approx(0.7)
    assert lambda_zero(step, 2.0, 0.7) == math.inf
    assert lambda_zero(identity, 2.0, 0.5) == pytest.approx(0.5)


def test_invalid_inputs(indicator, identity):
    with pytest.raises(InvalidParameterError):
        lambda_delta(identity, (0.0, 1.0), 0.0, 1.0, indicator)
    with pytest.raises(InvalidParameterError):
        lambda_delta(identity, (0.0, 1.0), 0.1, 2.0, indicator)
    raw = phi.make_profile("indicator", 1.0, scale=1.0)
    with pytest.raises(InvalidParameterError):
        lambda_delta(identity, (0.0, 1.0), 0.1, 1.0, raw)
    # 명시적으로 허용하면 정규화 전 값 (두 배)
    loose = lambda_delta(identity, (0.0, 1.0), 0.1, 1.0, raw, QuadConfig(require_normalized=False))
    assert loose.value == pytest.approx(2.0 * indicator_affine(0.1), rel=1e-6)


def test_budget_exhaustion_is_reported(indicator, identity):
    config = QuadConfig(gauss_order=2, max_subdivision_depth=0, rel_tol=1e-15, abs_tol=0.0)
    with pytest.raises(InconclusiveQuadratureError):
        lambda_delta(identity, (0.0, 1.0), 0.1, 1.0, indicator, config)


def test_segment_table_updates_incrementally(indicator):
    u = from_values([0.0, 0.25, 0.5, 0.75, 1.0], [0.0, 0.3, 0.45, 0.8, 1.0])
    table = SegmentEnergyTable(u, 0.05, 1.0, indicator)
    assert table.total == pytest.approx(lambda_delta(u, (0.0, 1.0), 0.05, 1.0, indicator).value, rel=1e-12)
    moved = from_values(u.x, [0.0, 0.3, 0.6, 0.8, 1.0])
    updated = table.propose(moved, [1, 2])
    fresh = lambda_delta(moved, (0.0, 1.0), 0.05, 1.0, indicator).value
    assert updated.total == pytest.approx(fresh, rel=1e-12)
    # 원래 표는 바뀌지 않는다
    assert table.fn is u


def test_segment_table_follows_moved_breakpoint(indicator):
    u = from_values([0.0, 0.25, 0.5, 0.75, 1.0], [0.0, 0.3, 0.45, 0.8, 1.0])
    table = SegmentEnergyTable(u, 0.05, 1.0, indicator)
    shifted = PiecewiseLinearFn([0.0, 0.25, 0.6, 0.75, 1.0], u.left, u.right)
    updated = table.propose(shifted, [1, 2])
    fresh = lambda_delta(shifted, (0.0, 1.0), 0.05, 1.0, indicator).value
    assert updated.total == pytest.approx(fresh, rel=1e-12)


def test_segment_table_detects_new_divergent_jump(indicator):
    u = from_values([0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
    table = SegmentEnergyTable(u, 0.1, 1.0, indicator)
    jumped = PiecewiseLinearFn(u.x, [0.0, 0.5, 1.0], [0.0, 0.8, 1.0])
    assert table.propose(jumped, [1]).total == math.inf


def test_heaviside_fixture_matches_builder(step):
    assert step.same_as(make_heaviside((0.0, 1.0), 0.5))
