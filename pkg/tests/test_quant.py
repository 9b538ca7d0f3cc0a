import math

import numpy as np
import pytest

from arsr.core.model import collapse, expand, forward, zeros
from arsr.core.quant import (
    QuantizedModel,
    QuantParams,
    calibrate,
    fake_quant,
    model_forward,
    pow2_ceil,
    quant_error,
    quantize,
    quantize_model,
    quantized_forward,
)
from arsr.exceptions import ContractError, DataError, ValueOutOfRangeError
from arsr.metrics import psnr


def output_psnr(cfg, weights, qmodel, inputs):
    fp = np.concatenate([forward(cfg, weights, x) for x in inputs])
    q = np.concatenate([quantized_forward(cfg, qmodel, x) for x in inputs])
    return psnr(fp, q)


@pytest.fixture
def trained_like(small_cfg):
    """随机初始化后折叠的推理网络与校准输入"""
    cfg = small_cfg(scale=2, groups=2)
    weights = collapse(cfg, expand(cfg, seed=11))
    rng = np.random.default_rng(5)
    calib = [rng.random((1, 1, 16, 16), dtype=np.float32) for _ in range(3)]
    return cfg, weights, calib


class TestQuantParams:
    """测试量化参数"""

    def test_qmax(self):
        """测试整数范围"""
        assert QuantParams(bits=12).qmax == 2047
        assert QuantParams(bits=2).qmax == 1

    def test_bits_range(self):
        """测试位宽越界"""
        with pytest.raises(ValueOutOfRangeError):
            QuantParams(bits=17)
        with pytest.raises(ValueOutOfRangeError):
            QuantParams(bits=1)

    def test_pow2_scale_must_be_power_of_two(self):
        """测试 pow2 尺度必须是 2 的整数次幂"""
        with pytest.raises(ContractError):
            QuantParams(bits=8, scale=0.3, pow2=True)
        assert QuantParams(bits=8, scale=0.25, pow2=True).exponent == -2

    def test_non_positive_scale(self):
        """测试非正尺度"""
        with pytest.raises(ContractError):
            QuantParams(scale=0.0)


class TestCalibrate:
    """测试尺度校准"""

    def test_max_abs_scale(self):
        """测试 max|v| = 1, b = 12 时 s = 1/2047"""
        q = calibrate(np.array([-1.0, 0.25, 0.5]), bits=12)
        assert q.scale == pytest.approx(1 / 2047)

    def test_pow2_rounds_up(self):
        """测试 pow2 向上取整到 2 的幂"""
        q = calibrate(np.array([-1.0, 0.25, 0.5]), bits=12, pow2=True)
        assert q.scale == 2.0**-10
        assert q.scale >= 1 / 2047
        assert q.scale / 2 < 1 / 2047
        assert q.scale * 2.0 ** (-q.exponent) == 1.0

    def test_pow2_ceil(self):
        """测试 2 的幂向上取整"""
        assert pow2_ceil(0.25) == 0.25
        assert pow2_ceil(0.3) == 0.5
        assert pow2_ceil(3.0) == 4.0

    def test_all_zero_values(self):
        """测试全零数据尺度为 1"""
        q = calibrate(np.zeros(10))
        assert q.scale == 1.0
        assert not np.any(quantize(np.array([0.3, -0.2]), q))

    @pytest.mark.parametrize("values", [np.array([1.0, np.nan]), np.array([np.inf]), np.array([])])
    def test_invalid_values(self, values):
        """测试空数据与 NaN/Inf"""
        with pytest.raises(DataError):
            calibrate(values)


class TestFakeQuant:
    """测试模拟量化"""

    def test_on_grid_unchanged(self):
        """测试网格上的值保持不变"""
        q = QuantParams(bits=8, scale=0.125)
        x = np.array([-3, 0, 5, 127], dtype=np.float64) * 0.125
        np.testing.assert_array_equal(fake_quant(x, q), x)

    def test_saturation(self):
        """测试超出范围时饱和"""
        q = calibrate(np.array([-1.0, 1.0]), bits=12)
        out = fake_quant(np.array([10.0, -10.0]) * q.scale * 2047, q)
        np.testing.assert_allclose(out, [2047 * q.scale, -2047 * q.scale])

    def test_round_half_away_from_zero(self):
        """测试 0.5 远离零舍入"""
        q = QuantParams(bits=8, scale=1.0)
        np.testing.assert_array_equal(quantize(np.array([0.5, -0.5, 1.5, -2.5]), q), [1, -1, 2, -3])

    def test_error_bound(self, rng):
        """测试未饱和元素误差不超过 s/2"""
        x = rng.uniform(-1, 1, 10000)
        q = calibrate(x, bits=12)
        assert np.max(np.abs(fake_quant(x, q) - x)) <= q.scale / 2 + 1e-15

    def test_idempotent_and_odd(self, rng):
        """测试幂等与奇对称"""
        x = rng.standard_normal(500)
        q = calibrate(x, bits=8)
        once = fake_quant(x, q)
        np.testing.assert_array_equal(fake_quant(once, q), once)
        np.testing.assert_array_equal(fake_quant(-x, q), -once)

    def test_monotone_in_bits(self, rng):
        """测试位宽增加时均方误差不增"""
        x = rng.standard_normal(2000)
        errors = [quant_error(x, calibrate(x, bits=b))[1] for b in range(4, 13)]
        assert all(a >= b for a, b in zip(errors, errors[1:]))

    def test_preserves_float32(self):
        """测试保留 float32"""
        x = np.linspace(-1, 1, 9, dtype=np.float32)
        assert fake_quant(x, calibrate(x)).dtype == np.float32


class TestQuantizeModel:
    """测试训练后量化"""

    def test_requires_collapsed(self, small_cfg):
        """测试扩展形态权重"""
        cfg = small_cfg()
        with pytest.raises(ContractError):
            quantize_model(expand(cfg, seed=0), cfg, calib_inputs=[np.zeros((1, 1, 8, 8), np.float32)])

    def test_empty_calibration(self, trained_like):
        """测试空校准集"""
        cfg, weights, _ = trained_like
        with pytest.raises(ContractError):
            quantize_model(weights, cfg, calib_inputs=[])

    def test_weights_on_grid(self, trained_like):
        """测试量化后的核落在各自网格上"""
        cfg, weights, calib = trained_like
        qmodel = quantize_model(weights, cfg, bits=12, calib_inputs=calib)
        assert isinstance(qmodel, QuantizedModel)
        assert len(qmodel.layers) == cfg.n_layers
        for (conv,), lq in zip(qmodel.weights.layers, qmodel.layers):
            codes = conv.kernels.astype(np.float64) / lq.weight.scale
            np.testing.assert_allclose(codes, np.round(codes), atol=1e-3)
            assert np.max(np.abs(np.round(codes))) <= lq.weight.qmax

    def test_psnr_12_bits(self, trained_like):
        """测试 12 bit 量化输出 PSNR >= 40 dB"""
        cfg, weights, calib = trained_like
        qmodel = quantize_model(weights, cfg, bits=12, calib_inputs=calib)
        assert output_psnr(cfg, weights, qmodel, calib) >= 40.0

    def test_psnr_16_bits(self, trained_like):
        """测试 16 bit 量化输出 PSNR >= 60 dB"""
        cfg, weights, calib = trained_like
        qmodel = quantize_model(weights, cfg, bits=16, calib_inputs=calib)
        assert output_psnr(cfg, weights, qmodel, calib) >= 60.0

    def test_pow2_scales_and_error(self, trained_like):
        """测试 pow2 尺度为 2 的幂且误差不小于非 pow2"""
        cfg, weights, calib = trained_like
        plain = quantize_model(weights, cfg, bits=12, pow2=False, calib_inputs=calib)
        shifted = quantize_model(weights, cfg, bits=12, pow2=True, calib_inputs=calib)
        for lq in shifted.layers:
            for q in (lq.weight, lq.activation):
                assert math.frexp(q.scale)[0] == 0.5
        plain_errors = [quant_error(c.kernels, lq.weight)[1] for (c,), lq in zip(weights.layers, plain.layers)]
        pow2_errors = [quant_error(c.kernels, lq.weight)[1] for (c,), lq in zip(weights.layers, shifted.layers)]
        assert sum(pow2_errors) >= sum(plain_errors)

    def test_model_forward_dispatch(self, trained_like):
        """测试统一前向入口"""
        cfg, weights, calib = trained_like
        qmodel = quantize_model(weights, cfg, bits=16, calib_inputs=calib)
        np.testing.assert_array_equal(model_forward(cfg, weights, calib[0]), forward(cfg, weights, calib[0]))
        np.testing.assert_array_equal(model_forward(cfg, qmodel, calib[0]), quantized_forward(cfg, qmodel, calib[0]))

    def test_zero_network_stays_nearest(self, small_cfg, rng):
        """测试全零网络量化后仍为最近邻放大（输入在网格上）"""
        cfg = small_cfg()
        y = (rng.integers(0, 256, (1, 1, 8, 8)) / 255).astype(np.float32)
        qmodel = quantize_model(zeros(cfg), cfg, bits=16, calib_inputs=[y])
        out = quantized_forward(cfg, qmodel, y)
        expected = np.repeat(np.repeat(y, 2, axis=2), 2, axis=3)
        np.testing.assert_allclose(out, expected, atol=qmodel.input.scale)
