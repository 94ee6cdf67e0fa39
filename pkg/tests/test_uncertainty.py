import statistics

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uqfilter import (
    ClassInterval,
    McConfig,
    ValidationError,
    column_skewness,
    interval_per_class,
    iteration_rng,
    mc_sample,
    quantize_tensor,
    z_value,
)
from uqfilter.nets import draw_mask
from uqfilter.quantize import qhead_forward

unit_scores = st.floats(0.0, 1.0, allow_nan=False)
score_matrices = arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 8)),
                        elements=unit_scores)


def test_mc_config_validation():
    McConfig(num_iter=2, conf_factor=0.5)
    with pytest.raises(ValidationError):
        McConfig(num_iter=1, conf_factor=0.5)
    with pytest.raises(ValidationError):
        McConfig(num_iter=10, conf_factor=0.0)
    with pytest.raises(ValidationError):
        McConfig(num_iter=10, conf_factor=1.0)
    with pytest.raises(ValidationError):
        McConfig(num_iter=10, conf_factor=0.5, threshold=0.0)


def test_z_value_frozen_oracle():
    # Reference values from scipy.stats.norm.ppf((1 + c) / 2).
    assert z_value(0.9) == pytest.approx(1.6448536269514722, abs=1e-12)
    assert z_value(0.7) == pytest.approx(1.0364333894937898, abs=1e-12)
    assert z_value(0.95) == pytest.approx(1.959963984540054, abs=1e-12)


@given(st.floats(0.01, 0.99))
def test_z_value_matches_independent_inverse_cdf(conf):
    # Implementation uses the stdlib inverse CDF; scipy is a separate code base.
    assert z_value(conf) == pytest.approx(scipy.stats.norm.ppf((1 + conf) / 2), abs=1e-9)


def test_z_value_monotone_and_validated():
    assert z_value(0.9) > z_value(0.8) > z_value(0.7) > 0
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValidationError):
            z_value(bad)


def test_interval_hand_case():
    samples = np.array([[0.6], [0.7], [0.8]])
    (iv,) = interval_per_class(samples, z=2.0)
    assert iv.mean == pytest.approx(0.7)
    assert iv.std == pytest.approx(0.1)  # Bessel-corrected: sqrt(0.02 / 2)
    assert iv.lo == pytest.approx(0.5)
    assert iv.hi == pytest.approx(0.9)


def test_interval_uses_sample_std():
    col = [0.2, 0.35, 0.5, 0.9]
    (iv,) = interval_per_class(np.array(col).reshape(-1, 1), z=1.0)
    assert iv.std == pytest.approx(statistics.stdev(col), rel=1e-12)
    assert iv.mean == pytest.approx(statistics.mean(col), rel=1e-12)


def test_intervals_are_not_clipped():
    samples = np.array([[0.9], [1.0], [0.95], [1.0]])
    (iv,) = interval_per_class(samples, z=5.0)
    assert iv.hi > 1.0


@given(score_matrices, st.floats(0.0, 10.0))
@settings(max_examples=100)
def test_interval_width_and_symmetry(samples, z):
    for iv in interval_per_class(samples, z):
        width = iv.hi - iv.lo
        assert width == pytest.approx(2.0 * z * iv.std, rel=1e-12, abs=1e-12)
        assert iv.lo + iv.hi == pytest.approx(2.0 * iv.mean, rel=1e-12, abs=1e-12)


@given(score_matrices, st.floats(0.1, 3.0), st.floats(1.01, 2.0))
@settings(max_examples=100)
def test_larger_z_contains_smaller(samples, z, factor):
    small = interval_per_class(samples, z)
    large = interval_per_class(samples, z * factor)
    for a, b in zip(small, large):
        assert b.lo <= a.lo and a.hi <= b.hi


def test_interval_input_validation():
    with pytest.raises(ValidationError):
        interval_per_class(np.array([[0.5, 0.5]]), z=1.0)  # one row
    with pytest.raises(ValidationError):
        interval_per_class(np.array([0.5, 0.5]), z=1.0)  # 1-D
    with pytest.raises(ValidationError):
        interval_per_class(np.array([[0.5], [1.5]]), z=1.0)  # out of range
    with pytest.raises(ValidationError):
        interval_per_class(np.array([[0.5], [np.nan]]), z=1.0)
    with pytest.raises(ValidationError):
        interval_per_class(np.array([[0.5], [0.5]]), z=-1.0)


def test_class_interval_validation():
    with pytest.raises(ValidationError):
        ClassInterval(mean=0.5, std=-0.1, z=1.0)
    with pytest.raises(ValidationError):
        ClassInterval(mean=0.5, std=0.1, z=-1.0)


def test_mc_sample_shape_and_determinism(qmodel, test_samples, mc_cfg):
    q = quantize_tensor(test_samples[0].features, qmodel.input_qp)
    a = mc_sample(qmodel, q, mc_cfg)
    b = mc_sample(qmodel, q, mc_cfg)
    assert a.shape == (mc_cfg.num_iter, qmodel.num_classes)
    np.testing.assert_array_equal(a, b)
    assert np.all(a >= 0.0) and np.all(a <= 1.0)

    other = mc_sample(qmodel, q, McConfig(num_iter=20, conf_factor=0.7, base_seed=12))
    assert not np.array_equal(a, other)


def test_mc_sample_rows_depend_only_on_iteration_index(qmodel, test_samples, mc_cfg):
    # Row k must be reproducible in isolation: seeded by (base_seed, k),
    # not by how many rows were drawn before it.
    q = quantize_tensor(test_samples[0].features, qmodel.input_qp)
    matrix = mc_sample(qmodel, q, mc_cfg)
    for k in (0, 3, mc_cfg.num_iter - 1):
        rng = iteration_rng(mc_cfg.base_seed, k)
        masks = (
            draw_mask(qmodel.feature_dim, qmodel.dropout1, rng),
            draw_mask(qmodel.hidden_dim, qmodel.dropout2, rng),
        )
        np.testing.assert_array_equal(matrix[k], qhead_forward(qmodel, q, masks))


def test_column_skewness_symmetric_and_guarded():
    sym = np.array([[0.2], [0.4], [0.6], [0.8]])
    assert column_skewness(sym)[0] == pytest.approx(0.0, abs=1e-12)
    constant = np.full((5, 2), 0.3)
    np.testing.assert_array_equal(column_skewness(constant), [0.0, 0.0])
    skewed = np.array([[0.0], [0.0], [0.1], [0.9]])
    assert column_skewness(skewed)[0] == pytest.approx(
        float(scipy.stats.skew(skewed[:, 0], bias=True)), rel=1e-9
    )
