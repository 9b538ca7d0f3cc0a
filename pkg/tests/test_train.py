import numpy as np
import pytest

from arsr.core.model import WeightForm, expand, forward, nearest_upscale, zeros
from arsr.core.train import (
    LossKind,
    LossSpec,
    MomentumSGD,
    TrainConfig,
    backward,
    check_gradients,
    fit,
    loss,
    make_patch_pairs,
)
from arsr.exceptions import ContractError, DataError, ShapeError


def toy_pairs(rng, count=4, size=16, scale=2):
    """HR = 最近邻放大的 LR + 0.25，网络需要学到一个偏移"""
    pairs = []
    for _ in range(count):
        lr = rng.uniform(0.0, 0.7, (1, 1, size, size)).astype(np.float32)
        pairs.append((lr, nearest_upscale(lr, scale) + np.float32(0.25)))
    return pairs


class TestLoss:
    """测试损失函数"""

    @pytest.mark.parametrize("kind", list(LossKind))
    def test_zero_error(self, kind, rng):
        """测试预测等于目标时损失与梯度为零"""
        x = rng.random((1, 1, 4, 4)).astype(np.float32)
        value, grad = loss(x, x.copy(), LossSpec(kind))
        assert value == 0.0
        assert not np.any(grad)

    def test_huber_piecewise(self):
        """测试 Huber δ=1 的两段取值"""
        target = np.zeros((1, 1, 1, 1))
        assert loss(np.full((1, 1, 1, 1), 0.5), target, LossSpec("huber"))[0] == pytest.approx(0.125)
        assert loss(np.full((1, 1, 1, 1), 2.0), target, LossSpec("huber"))[0] == pytest.approx(1.5)

    def test_huber_continuous_at_delta(self):
        """测试 |e| = δ 处两段连续"""
        delta = 0.3
        value, _ = loss(np.full((1, 1, 1, 1), delta), np.zeros((1, 1, 1, 1)), LossSpec("huber", delta))
        assert value == pytest.approx(0.5 * delta * delta)

    def test_mse_and_mae(self):
        """测试 MSE / MAE 的值与梯度"""
        pred = np.array([[[[1.0, -1.0, 0.0, 3.0]]]])
        target = np.zeros_like(pred)
        value, grad = loss(pred, target, LossSpec("mse"))
        assert value == pytest.approx(11 / 4)
        np.testing.assert_allclose(grad, 2 * pred / 4)
        value, grad = loss(pred, target, LossSpec("mae"))
        assert value == pytest.approx(5 / 4)
        np.testing.assert_allclose(grad, [[[[0.25, -0.25, 0.0, 0.25]]]])

    def test_shape_mismatch(self):
        """测试形状不一致"""
        with pytest.raises(ShapeError):
            loss(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 3)), LossSpec())

    def test_invalid_delta(self):
        """测试非正 delta"""
        with pytest.raises(ContractError):
            LossSpec("huber", delta=0.0)


class TestBackward:
    """测试反向传播"""

    @pytest.mark.parametrize("kind", ["mae", "mse", "huber"])
    def test_gradient_check(self, tiny_cfg, kind):
        """测试每个核、偏置与输入的梯度和中心差分一致"""
        rng = np.random.default_rng(42)
        w = expand(tiny_cfg, seed=3)
        x = rng.random((1, 1, 8, 8))
        target = rng.random((1, 1, 16, 16))
        spec = LossSpec(kind, delta=0.1)
        report = check_gradients(tiny_cfg, w, x, target, spec, eps=1e-3, atol=1e-2, rtol=0.02)
        assert report.passed, report.failures()
        assert {entry.param for entry in report.entries} == {"kernels", "bias", "input"}

    def test_gradient_check_grouped(self, small_cfg):
        """测试分组映射层的梯度"""
        cfg = small_cfg(scale=3, groups=2)
        rng = np.random.default_rng(9)
        w = expand(cfg, seed=5)
        x = rng.random((1, 1, 6, 6))
        target = rng.random((1, 1, 18, 18))
        report = check_gradients(cfg, w, x, target, LossSpec("mse"), include_input=False)
        assert report.passed, report.failures()

    def test_zero_upstream(self, tiny_cfg, rng):
        """测试上游梯度为零时权重梯度全为零"""
        x = rng.random((1, 1, 8, 8)).astype(np.float32)
        grads = backward(tiny_cfg, expand(tiny_cfg, seed=0), x, np.zeros((1, 1, 16, 16), np.float32))
        assert grads.max_abs() == 0.0

    def test_upstream_shape(self, tiny_cfg):
        """测试上游梯度形状不一致"""
        with pytest.raises(ShapeError):
            backward(tiny_cfg, zeros(tiny_cfg, "expanded"), np.zeros((1, 1, 8, 8)), np.zeros((1, 1, 8, 8)))

    def test_input_gradient_includes_residual(self, tiny_cfg):
        """测试全零网络对输入的梯度等于全局残差的广播项"""
        upstream = np.ones((1, 1, 16, 16), np.float32)
        grads = backward(tiny_cfg, zeros(tiny_cfg, "expanded"), np.zeros((1, 1, 8, 8), np.float32), upstream)
        np.testing.assert_allclose(grads.input, 4.0)


class TestMomentumSGD:
    """测试动量 SGD"""

    def test_tiny_lr_keeps_weights(self, tiny_cfg, rng):
        """测试学习率趋近零时权重不变"""
        w = expand(tiny_cfg, seed=1)
        x = rng.random((1, 1, 8, 8)).astype(np.float32)
        grads = backward(tiny_cfg, w, x, rng.standard_normal((1, 1, 16, 16)).astype(np.float32))
        updated = MomentumSGD(lr=1e-12, momentum=0.9).step(w, grads)
        for before, after in zip(w.convs(), updated.convs()):
            np.testing.assert_allclose(after.kernels, before.kernels, atol=1e-9)
            np.testing.assert_allclose(after.bias, before.bias, atol=1e-9)

    def test_momentum_accumulates(self, tiny_cfg, rng):
        """测试第二步更新包含动量项"""
        w = zeros(tiny_cfg, "expanded")
        x = rng.random((1, 1, 8, 8)).astype(np.float32)
        grads = backward(tiny_cfg, w, x, np.ones((1, 1, 16, 16), np.float32))
        optimizer = MomentumSGD(lr=0.1, momentum=0.5)
        first = optimizer.step(w, grads)
        second = optimizer.step(first, grads)
        bias_grad = grads.layers[-1][1].bias
        np.testing.assert_allclose(first.layers[-1][1].bias, -0.1 * bias_grad, rtol=1e-6)
        np.testing.assert_allclose(second.layers[-1][1].bias, -0.1 * bias_grad * 2.5, rtol=1e-6)


class TestFit:
    """测试训练循环"""

    def test_identity_task_stays_zero(self, tiny_cfg, rng):
        """测试零初始化网络在最近邻任务上损失保持为零"""
        pairs = [(lr, nearest_upscale(lr, 2)) for lr, _ in toy_pairs(rng, count=2, size=8)]
        tcfg = TrainConfig(lr=0.05, epochs=5, batch=2, patch=8, init="zero")
        result = fit(tiny_cfg, tcfg, LossSpec("mse"), pairs)
        assert result.history == [0.0] * 5
        assert result.weights.form is WeightForm.EXPANDED

    @pytest.mark.slow
    def test_overfit_converges(self, tiny_cfg):
        """测试 4 个固定样本对 500 个 epoch 后损失降到首个 epoch 的 10% 以下"""
        pairs = toy_pairs(np.random.default_rng(0))
        tcfg = TrainConfig(lr=0.02, momentum=0.9, epochs=500, batch=4, patch=16, seed=0)
        result = fit(tiny_cfg, tcfg, LossSpec("mse"), pairs)
        assert len(result.history) == 500
        assert result.history[-1] < 0.1 * result.history[0]

    def test_deterministic_history(self, tiny_cfg):
        """测试相同种子与数据得到逐位相同的损失历史"""
        pairs = toy_pairs(np.random.default_rng(1), count=2, size=8)
        tcfg = TrainConfig(epochs=4, batch=2, patch=8, seed=3)
        first = fit(tiny_cfg, tcfg, LossSpec("mae"), pairs)
        second = fit(tiny_cfg, tcfg, LossSpec("mae"), pairs)
        assert first.history == second.history
        assert first.weights.equals(second.weights)

    def test_bad_pair_shape(self, tiny_cfg, rng):
        """测试 HR 尺寸不是 LR × r"""
        lr = rng.random((1, 1, 8, 8)).astype(np.float32)
        with pytest.raises(DataError):
            fit(tiny_cfg, TrainConfig(epochs=1), LossSpec(), [(lr, np.zeros((1, 1, 12, 12), np.float32))])

    def test_empty_pairs(self, tiny_cfg):
        """测试空样本"""
        with pytest.raises(DataError):
            fit(tiny_cfg, TrainConfig(epochs=1), LossSpec(), [])

    def test_rejects_collapsed_start(self, tiny_cfg, rng):
        """测试从推理形态开始训练"""
        pairs = toy_pairs(rng, count=1, size=8)
        with pytest.raises(ContractError):
            fit(tiny_cfg, TrainConfig(epochs=1), LossSpec(), pairs, weights=zeros(tiny_cfg, "collapsed"))

    def test_zero_epochs(self, tiny_cfg, rng):
        """测试 0 个 epoch 返回初始权重"""
        result = fit(tiny_cfg, TrainConfig(epochs=0, seed=2), LossSpec(), toy_pairs(rng, count=1, size=8))
        assert result.history == []
        assert result.weights.equals(expand(tiny_cfg, seed=2))


class TestTrainConfig:
    """测试训练配置"""

    def test_momentum_range(self):
        """测试动量必须小于 1"""
        with pytest.raises(ContractError):
            TrainConfig(momentum=1.0)

    def test_unknown_init(self):
        """测试未知初始化方式"""
        with pytest.raises(ContractError):
            TrainConfig(init="gaussian")


class TestMakePatchPairs:
    """测试训练块裁剪"""

    def test_aligned_crops(self, rng):
        """测试 HR 块与 LR 块位置对齐"""
        lr = rng.random((20, 24)).astype(np.float32)
        hr = np.repeat(np.repeat(lr, 2, axis=0), 2, axis=1)
        pairs = make_patch_pairs([(lr, hr)], patch=8, scale=2, per_frame=3, seed=4)
        assert len(pairs) == 3
        for lr_patch, hr_patch in pairs:
            assert lr_patch.shape == (1, 1, 8, 8)
            np.testing.assert_array_equal(hr_patch, nearest_upscale(lr_patch, 2))

    def test_deterministic(self, rng):
        """测试裁剪位置由种子确定"""
        lr = rng.random((20, 20)).astype(np.float32)
        hr = rng.random((40, 40)).astype(np.float32)
        a = make_patch_pairs([(lr, hr)], patch=8, scale=2, per_frame=2, seed=1)
        b = make_patch_pairs([(lr, hr)], patch=8, scale=2, per_frame=2, seed=1)
        for (la, ha), (lb, hb) in zip(a, b):
            np.testing.assert_array_equal(la, lb)
            np.testing.assert_array_equal(ha, hb)

    def test_patch_too_large(self, rng):
        """测试块大于帧"""
        with pytest.raises(DataError):
            make_patch_pairs([(np.zeros((4, 4)), np.zeros((8, 8)))], patch=8, scale=2)

    def test_hr_too_small(self):
        """测试 HR 小于 LR × r"""
        with pytest.raises(DataError):
            make_patch_pairs([(np.zeros((8, 8)), np.zeros((12, 12)))], patch=4, scale=2)


def test_forward_matches_tape(tiny_cfg, rng):
    """带中间量记录的前向与普通前向一致"""
    from arsr.core.train import forward_with_tape

    w = expand(tiny_cfg, seed=6)
    x = rng.random((2, 1, 8, 8)).astype(np.float32)
    out, _ = forward_with_tape(tiny_cfg, w, x)
    np.testing.assert_array_equal(out, forward(tiny_cfg, w, x))
