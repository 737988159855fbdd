import math

import numpy as np
import pytest
from scipy import integrate

from common.errors import InvalidParameterError, InvalidSpecError
from gammalab import gridfn as gf


def test_evaluate_takes_requested_side(step):
    assert gf.evaluate(step, 0.5) == 1.0
    assert gf.evaluate(step, 0.5, "left") == 0.0
    assert gf.evaluate(step, [0.25, 0.75]).tolist() == [0.0, 1.0]
    # 정의역 밖은 끝값 상수
    assert gf.evaluate(step, 2.0) == 1.0


def test_structure_of_step(step):
    assert step.n_segments == 2
    assert step.jumps.tolist() == [1.0]
    assert not step.is_continuous
    assert step.slopes.tolist() == [0.0, 0.0]


def test_tiny_jumps_are_snapped():
    fn = gf.PiecewiseLinearFn([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], [0.0, 0.5 + 1e-15, 1.0])
    assert fn.is_continuous


@pytest.mark.parametrize("x, left, right", [
    ([0.0], [0.0], [0.0]),
    ([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
    ([0.0, 1.0], [0.0, math.nan], [0.0, 1.0]),
])
def test_invalid_functions(x, left, right):
    with pytest.raises(InvalidSpecError):
        gf.PiecewiseLinearFn(x, left, right)


def test_staircase_levels():
    stairs = gf.make_staircase((0.0, 1.0), 0.25)
    assert stairs.x.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert stairs.right.tolist()[:-1] == [0.0, 0.25, 0.5, 0.75]
    assert stairs.jumps == pytest.approx([0.25, 0.25, 0.25])
    assert np.all(stairs.slopes == 0.0)


def test_tent_is_continuous():
    tent = gf.make_tent((0.0, 1.0))
    assert tent.is_continuous
    assert gf.evaluate(tent, 0.5) == 1.0
    assert gf.total_variation(tent) == pytest.approx(2.0)


def test_lp_distance_identity_to_step(identity, step):
    assert gf.lp_distance(identity, step, 1.0) == pytest.approx(0.25, abs=1e-14)
    assert gf.lp_distance(identity, step, 2.0) == pytest.approx(math.sqrt(1.0 / 12.0), abs=1e-14)


def test_lp_distance_sign_change_p1():
    zero = gf.make_affine((0.0, 1.0), 0.0, 0.0)
    line = gf.make_affine((0.0, 1.0), 2.0, -1.0)
    assert gf.lp_distance(line, zero, 1.0) == pytest.approx(0.5, abs=1e-14)


def test_lp_distance_general_p_matches_trapezoid():
    u = gf.from_values([0.0, 0.3, 1.0], [0.0, 0.8, -0.4])
    grid = np.linspace(0.0, 1.0, 200001)
    expected = integrate.trapezoid(np.abs(gf.evaluate(u, grid)) ** 1.5, grid) ** (1.0 / 1.5)
    zero = gf.make_affine((0.0, 1.0), 0.0, 0.0)
    assert gf.lp_distance(u, zero, 1.5) == pytest.approx(expected, rel=1e-6)


def test_difference_quotient_of_step(step):
    # 길이 h 인 구간 위에서만 τ_h H = 1/h 이므로 ∫|τ_h H| = 1
    assert gf.difference_quotient_norm(step, 0.1, 1.0, (0.0, 1.0)) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        gf.difference_quotient_norm(step, 1.5, 1.0, (0.0, 1.0))


def test_seminorms(identity, step):
    assert gf.total_variation(step) == 1.0
    assert gf.sobolev_seminorm_p(identity, 2.0) == pytest.approx(1.0)
    assert gf.sobolev_seminorm_p(step, 2.0) == math.inf
    assert gf.sobolev_seminorm_p(step, 1.0) == 1.0


def test_restrict_and_glue_round_trip():
    tent = gf.make_tent((0.0, 1.0), 0.4, 2.0)
    left = gf.restrict(tent, (0.0, 0.7))
    right = gf.restrict(tent, (0.7, 1.0))
    glued = gf.glue([left, right])
    assert gf.lp_distance(glued, tent, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert glued.is_continuous


def test_glue_rejects_gaps():
    with pytest.raises(InvalidSpecError):
        gf.glue([gf.make_affine((0.0, 0.4), 1.0, 0.0), gf.make_affine((0.5, 1.0), 1.0, 0.0)])


def test_glue_makes_jump_from_mismatched_ends():
    glued = gf.glue([gf.make_affine((0.0, 0.5), 0.0, 0.0), gf.make_affine((0.5, 1.0), 0.0, 1.0)])
    assert glued.jumps.tolist() == [1.0]


def test_reflect_and_values(identity):
    flipped = gf.reflect(identity)
    assert gf.evaluate(flipped, 0.0) == 1.0
    assert gf.evaluate(gf.scale_values(identity, -2.0), 0.5) == -1.0
    assert gf.evaluate(gf.shift_values(identity, 3.0), 0.5) == 3.5


def test_extend_constant(identity):
    wide = gf.extend_constant(identity, gf.Interval(-1.0, 2.0, True))
    assert wide.truncation_of_line
    assert gf.evaluate(wide, -0.5) == 0.0
    assert gf.evaluate(wide, 1.5) == 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_tile_rescale_breakpoints_and_distance(n):
    h = gf.from_values([0.0, 0.3, 0.6, 1.0], [0.0, 0.5, 0.4, 1.0])
    identity = gf.make_affine((0.0, 1.0), 1.0, 0.0)
    tiled = gf.tile_rescale(h, n)
    assert len(tiled.x) - 2 == n * (len(h.x) - 2) + n - 1
    assert gf.lp_distance(tiled, identity, 1.0) == pytest.approx(gf.lp_distance(h, identity, 1.0) / n)
    assert gf.total_variation(tiled) == pytest.approx(gf.total_variation(h))


def test_tile_rescale_rejects_bad_n(identity):
    with pytest.raises(InvalidParameterError):
        gf.tile_rescale(identity, 0)


def test_spatial_block_rescale():
    u = gf.from_values([0.0, 1.0, 2.0], [0.0, 2.0, 2.0])
    g = gf.spatial_block_rescale(u, 2)
    assert g.x.tolist() == [0.0, 0.5, 1.0]
    assert g.left.tolist() == [0.0, 1.0, 1.0]


def test_flatten_matches_target_near_edges(identity):
    wiggle = gf.from_values([0.0, 0.2, 0.5, 0.8, 1.0], [0.1, 0.3, 0.45, 0.9, 0.95])
    spec = gf.FlattenSpec.thirds((0.0, 1.0), 0.3, 0.7, identity)
    flat = gf.flatten_near_points(wiggle, spec)
    # (0, 0.1) 과 (0.9, 1) 에서는 목표 함수와 정확히 같다
    assert gf.lp_distance(flat, identity, 1.0, (0.0, 0.1)) == pytest.approx(0.0, abs=1e-12)
    assert gf.lp_distance(flat, identity, 1.0, (0.9, 1.0)) == pytest.approx(0.0, abs=1e-12)
    # 기준점 사이에서는 원래 함수 그대로
    assert gf.lp_distance(flat, wiggle, 1.0, (0.3, 0.7)) == pytest.approx(0.0, abs=1e-12)
    # 평탄 구간: 기준점 바로 바깥에서 기준점 값
    assert gf.evaluate(flat, 0.25) == pytest.approx(gf.evaluate(wiggle, 0.3))


def test_flatten_is_fixed_point_on_target(identity):
    spec = gf.FlattenSpec.thirds((0.0, 1.0), 0.3, 0.7, identity)
    flat = gf.flatten_near_points(identity, spec)
    assert flat.is_continuous
    assert gf.lp_distance(flat, identity, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_flatten_rejects_bad_anchor(identity):
    spec = gf.FlattenSpec.thirds((0.0, 2.0), 0.3, 1.5, identity)
    with pytest.raises(InvalidSpecError):
        gf.flatten_near_points(identity, spec)


def test_text_round_trip(tmp_path, step):
    path = gf.dump_text(step, tmp_path / "step.fn", comments=["계단"])
    loaded = gf.load_text(path)
    assert loaded.same_as(step)
    assert path.read_text(encoding="utf-8").startswith("# 계단\n# gridfn")


def test_parse_text_errors():
    with pytest.raises(InvalidSpecError):
        gf.parse_text("0 0 0\n1 1 1\n")
    with pytest.raises(InvalidSpecError):
        gf.parse_text("# gridfn a=0 b=1 truncation_of_line=0 breakpoints=3\n0 0 0\n1 1 1\n")


def test_sample_frame_contains_both_limits(step):
    frame = gf.sample_frame(step, points=11)
    at_jump = frame[frame["x"] == 0.5]["value"].tolist()
    assert sorted(set(at_jump)) == [0.0, 1.0]
