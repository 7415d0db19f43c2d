"""Candidate-matching losses against hand values and an independent
from-definitions oracle (plain Python floats, no shared code paths)."""

import math

import numpy as np
import pytest

from mvrs.refseg import (
    LossWeights,
    PredictionCandidate,
    PredictionSet,
    bce_loss,
    dice_loss,
    loss_gradients,
    mask_ce_loss,
    match_cost,
    select_best,
    total_loss,
)

W = LossWeights()


# ---------------------------------------------------------------- oracle --
def oracle_bce(p, target, clamp=1e-7):
    q = min(max(p, clamp), 1.0 - clamp)
    return -(math.log(q) if target else math.log(1.0 - q))


def oracle_mask_ce(pred, gt, clamp=1e-7):
    total = 0.0
    count = 0
    for p, g in zip(np.asarray(pred).ravel(), np.asarray(gt).ravel()):
        total += oracle_bce(float(p), int(g), clamp)
        count += 1
    return total / count


def oracle_dice(pred, gt, eps=1.0):
    p = np.asarray(pred).ravel()
    g = np.asarray(gt).ravel()
    overlap = sum(float(a) * float(b) for a, b in zip(p, g))
    return 1.0 - (2.0 * overlap + eps) / (sum(map(float, p)) + sum(map(float, g)) + eps)


def oracle_total(pset, gt, w):
    costs = [
        w.mask_weight * oracle_mask_ce(c.mask, gt, w.prob_clamp)
        + w.dice_weight * oracle_dice(c.mask, gt, w.dice_epsilon)
        for c in pset.candidates
    ]
    matched = min(range(len(costs)), key=lambda i: costs[i])
    loss = costs[matched]
    for j, cand in enumerate(pset.candidates):
        if j != matched:
            loss += w.cls_weight * oracle_bce(cand.confidence, 0, w.prob_clamp)
        elif w.include_matched_cls:
            loss += w.cls_weight * oracle_bce(cand.confidence, 1, w.prob_clamp)
    return loss, matched


def random_instance(rng, n_max=5, t_max=2, hw_max=8, interior=False):
    n = int(rng.integers(1, n_max + 1))
    t = int(rng.integers(1, t_max + 1))
    h = int(rng.integers(1, hw_max + 1))
    w = int(rng.integers(1, hw_max + 1))
    lo, hi = (0.05, 0.95) if interior else (0.0, 1.0)
    cands = [
        PredictionCandidate(
            confidence=float(rng.uniform(lo, hi)),
            mask=rng.uniform(lo, hi, size=(t, h, w)),
        )
        for _ in range(n)
    ]
    gt = rng.integers(0, 2, size=(t, h, w)).astype(np.uint8)
    return PredictionSet(candidates=tuple(cands)), gt


# ---------------------------------------------------------------- fixtures --
class TestBceLoss:
    def test_confident_correct_is_near_zero(self):
        assert bce_loss(1.0, 1, W) <= 1e-6

    def test_half_is_ln2(self):
        assert bce_loss(0.5, 0, W) == pytest.approx(math.log(2), abs=1e-9)
        assert bce_loss(0.5, 1, W) == pytest.approx(math.log(2), abs=1e-9)

    def test_confident_wrong_hand_value(self):
        assert bce_loss(0.9, 0, W) == pytest.approx(-math.log(0.1), abs=1e-9)


class TestMaskCeLoss:
    def test_perfect_prediction_near_zero(self):
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        assert mask_ce_loss(gt.astype(np.float64), gt, W) <= 1e-6

    def test_uniform_half_is_ln2(self):
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        pred = np.full((1, 2, 2), 0.5)
        assert mask_ce_loss(pred, gt, W) == pytest.approx(math.log(2), abs=1e-12)

    def test_two_pixel_hand_value(self):
        pred = np.array([[[0.9, 0.1]]])
        gt = np.array([[[1, 0]]], dtype=np.uint8)
        assert mask_ce_loss(pred, gt, W) == pytest.approx(-math.log(0.9), abs=1e-9)

    def test_bounded_by_clamp(self):
        pred = np.zeros((1, 3, 3))
        gt = np.ones((1, 3, 3), dtype=np.uint8)
        assert mask_ce_loss(pred, gt, W) <= -math.log(W.prob_clamp) + 1e-9

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mask_ce_loss(np.zeros((1, 2, 2)), np.zeros((1, 2, 3), dtype=np.uint8), W)


class TestDiceLoss:
    def test_perfect_overlap_is_zero(self):
        ones = np.ones((1, 2, 2))
        assert dice_loss(ones, ones.astype(np.uint8), W) == pytest.approx(0.0, abs=1e-12)

    def test_empty_pred_vs_full_gt(self):
        pred = np.zeros((1, 2, 2))
        gt = np.ones((1, 2, 2), dtype=np.uint8)
        assert dice_loss(pred, gt, W) == pytest.approx(0.8, abs=1e-12)

    def test_half_subset_hand_value(self):
        pred = np.array([[[1.0, 1.0], [0.0, 0.0]]])
        gt = np.ones((1, 2, 2), dtype=np.uint8)
        assert dice_loss(pred, gt, W) == pytest.approx(2.0 / 7.0, abs=1e-12)

    def test_stays_below_one(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pset, gt = random_instance(rng)
            for c in pset.candidates:
                assert 0.0 <= dice_loss(c.mask, gt, W) < 1.0


class TestMatchCost:
    def test_perfect_candidate_near_zero(self):
        gt = np.array([[[1, 0], [1, 1]]], dtype=np.uint8)
        cand = PredictionCandidate(confidence=0.9, mask=gt.astype(np.float64))
        assert match_cost(cand, gt, W) <= 1e-5

    def test_worst_case_hand_value(self):
        # all-zero prediction against all-ones truth, defaults:
        # 5 * (-ln 1e-7) + 5 * 0.8
        pred = np.zeros((1, 2, 2))
        gt = np.ones((1, 2, 2), dtype=np.uint8)
        cand = PredictionCandidate(confidence=0.5, mask=pred)
        expected = 5.0 * -math.log(1e-7) + 5.0 * 0.8
        assert match_cost(cand, gt, W) == pytest.approx(expected, rel=1e-9)
        assert match_cost(cand, gt, W) == pytest.approx(84.590478, abs=1e-5)

    def test_doubling_weights_doubles_cost(self):
        rng = np.random.default_rng(1)
        pset, gt = random_instance(rng)
        cand = pset.candidates[0]
        doubled = LossWeights(mask_weight=10.0, dice_weight=10.0)
        assert match_cost(cand, gt, doubled) == pytest.approx(
            2 * match_cost(cand, gt, W), rel=1e-12
        )


class TestSelectBest:
    def test_perfect_beats_disjoint(self):
        gt = np.array([[[1, 1], [0, 0]]], dtype=np.uint8)
        good = PredictionCandidate(confidence=0.5, mask=gt.astype(np.float64))
        bad = PredictionCandidate(confidence=0.5, mask=1.0 - gt.astype(np.float64))
        assert select_best(PredictionSet(candidates=(good, bad)), gt, W) == 0
        assert select_best(PredictionSet(candidates=(bad, good)), gt, W) == 1

    def test_identical_candidates_tie_to_lowest_index(self):
        gt = np.array([[[1, 0]]], dtype=np.uint8)
        cand = PredictionCandidate(confidence=0.5, mask=np.full((1, 1, 2), 0.5))
        assert select_best(PredictionSet(candidates=(cand, cand, cand)), gt, W) == 0

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            pset, gt = random_instance(rng)
            costs = [match_cost(c, gt, W) for c in pset.candidates]
            assert select_best(pset, gt, W) == int(np.argmin(costs))

    def test_argmin_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            pset, gt = random_instance(rng)
            scale = float(rng.uniform(0.1, 10.0))
            scaled = LossWeights(mask_weight=5.0 * scale, dice_weight=5.0 * scale)
            assert select_best(pset, gt, W) == select_best(pset, gt, scaled)


class TestTotalLoss:
    def test_single_perfect_candidate_is_free(self):
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        pset = PredictionSet(
            candidates=(PredictionCandidate(confidence=0.3, mask=gt.astype(np.float64)),)
        )
        loss, matched = total_loss(pset, gt, W)
        assert matched == 0
        assert loss <= 1e-5

    def test_two_candidate_hand_value(self):
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        pset = PredictionSet(
            candidates=(
                PredictionCandidate(confidence=0.9, mask=gt.astype(np.float64)),
                PredictionCandidate(confidence=0.2, mask=np.full((1, 2, 2), 0.5)),
            )
        )
        loss, matched = total_loss(pset, gt, W)
        assert matched == 0
        assert loss == pytest.approx(2.0 * -math.log(0.8), abs=1e-6)

    def test_n1_reduces_to_match_cost(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            pset, gt = random_instance(rng, n_max=1)
            loss, matched = total_loss(pset, gt, W)
            assert matched == 0
            assert loss == pytest.approx(match_cost(pset.candidates[0], gt, W), rel=1e-12)

    def test_nonnegative_and_zero_only_when_clean(self):
        rng = np.random.default_rng(5)
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        clean = PredictionSet(
            candidates=(
                PredictionCandidate(confidence=1.0, mask=gt.astype(np.float64)),
                PredictionCandidate(confidence=0.0, mask=np.zeros((1, 2, 2))),
            )
        )
        loss, _ = total_loss(clean, gt, W)
        assert 0.0 <= loss <= 1e-5
        for _ in range(50):
            pset, gt = random_instance(rng)
            loss, _ = total_loss(pset, gt, W)
            assert loss >= 0.0

    def test_dirty_instances_cost_something(self):
        gt = np.array([[[1, 0]]], dtype=np.uint8)
        pset = PredictionSet(
            candidates=(
                PredictionCandidate(confidence=1.0, mask=gt.astype(np.float64)),
                PredictionCandidate(confidence=0.5, mask=np.zeros((1, 1, 2))),
            )
        )
        loss, _ = total_loss(pset, gt, W)
        assert loss > 0.1  # the second candidate claims confidence 0.5

    def test_matches_from_definitions_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            pset, gt = random_instance(rng)
            got_loss, got_idx = total_loss(pset, gt, W)
            want_loss, want_idx = oracle_total(pset, gt, W)
            assert got_idx == want_idx
            assert got_loss == pytest.approx(want_loss, abs=1e-9)

    def test_include_matched_cls_switch(self):
        gt = np.array([[[1, 0]]], dtype=np.uint8)
        pset = PredictionSet(
            candidates=(
                PredictionCandidate(confidence=0.8, mask=gt.astype(np.float64)),
                PredictionCandidate(confidence=0.2, mask=np.full((1, 1, 2), 0.5)),
            )
        )
        base, _ = total_loss(pset, gt, W)
        w_on = LossWeights(include_matched_cls=True)
        with_cls, _ = total_loss(pset, gt, w_on)
        assert with_cls == pytest.approx(base + 2.0 * -math.log(0.8), abs=1e-9)
        oracle_loss, _ = oracle_total(pset, gt, w_on)
        assert with_cls == pytest.approx(oracle_loss, abs=1e-12)


class TestLossGradients:
    @staticmethod
    def fd_oracle(pset, gt, w, h=1e-5):
        """Central finite differences with the matched index held fixed."""
        matched = select_best(pset, gt, w)

        def loss_with_fixed_match(cands):
            loss = match_cost(cands[matched], gt, w)
            for j, cand in enumerate(cands):
                if j != matched:
                    loss += w.cls_weight * bce_loss(cand.confidence, 0, w)
                elif w.include_matched_cls:
                    loss += w.cls_weight * bce_loss(cand.confidence, 1, w)
            return loss

        n = len(pset)
        conf_grads = np.zeros(n)
        mask_grads = np.zeros((n,) + pset.shape)
        for j in range(n):
            for sign, bucket in ((+1, "up"), (-1, "down")):
                cands = list(pset.candidates)
                cands[j] = PredictionCandidate(
                    confidence=cands[j].confidence + sign * h, mask=cands[j].mask
                )
                if bucket == "up":
                    up = loss_with_fixed_match(cands)
                else:
                    down = loss_with_fixed_match(cands)
            conf_grads[j] = (up - down) / (2 * h)
            flat = pset.candidates[j].mask.ravel()
            for pix in range(flat.size):
                for sign, bucket in ((+1, "up"), (-1, "down")):
                    perturbed = flat.copy()
                    perturbed[pix] += sign * h
                    cands = list(pset.candidates)
                    cands[j] = PredictionCandidate(
                        confidence=cands[j].confidence,
                        mask=perturbed.reshape(pset.shape),
                    )
                    if bucket == "up":
                        up = loss_with_fixed_match(cands)
                    else:
                        down = loss_with_fixed_match(cands)
                mask_grads[j].ravel()[pix] = (up - down) / (2 * h)
        return conf_grads, mask_grads, matched

    @staticmethod
    def max_rel_err(got, want, floor=1e-8):
        denom = np.maximum(np.maximum(np.abs(got), np.abs(want)), floor)
        return float((np.abs(got - want) / denom).max())

    def test_matches_central_differences(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(10):
            pset, gt = random_instance(rng, n_max=2, t_max=1, hw_max=4, interior=True)
            got_c, got_m, idx = loss_gradients(pset, gt, W)
            want_c, want_m, want_idx = self.fd_oracle(pset, gt, W)
            assert idx == want_idx
            worst = max(worst, self.max_rel_err(got_c, want_c))
            worst = max(worst, self.max_rel_err(got_m, want_m))
        assert worst <= 1e-4

    def test_zero_weights_zero_gradients(self):
        rng = np.random.default_rng(8)
        pset, gt = random_instance(rng, interior=True)
        w0 = LossWeights(cls_weight=0.0, mask_weight=0.0, dice_weight=0.0)
        conf_grads, mask_grads, _ = loss_gradients(pset, gt, w0)
        assert np.abs(conf_grads).max() == 0.0
        assert np.abs(mask_grads).max() == 0.0

    def test_unmatched_masks_have_zero_gradient(self):
        rng = np.random.default_rng(9)
        pset, gt = random_instance(rng, n_max=4, interior=True)
        conf_grads, mask_grads, matched = loss_gradients(pset, gt, W)
        for j in range(len(pset)):
            if j != matched:
                assert np.abs(mask_grads[j]).max() == 0.0
                assert conf_grads[j] > 0.0  # pushes confidence toward 0
        assert conf_grads[matched] == 0.0

    def test_perfect_candidate_gradients_vanish_into_the_optimum(self):
        # near-perfect interior prediction: mask gradients point toward the
        # truth, i.e. negative where gt=1, positive where gt=0
        gt = np.array([[[1, 0], [0, 1]]], dtype=np.uint8)
        mask = np.where(gt == 1, 0.999, 0.001).astype(np.float64)
        pset = PredictionSet(candidates=(PredictionCandidate(confidence=0.9, mask=mask),))
        _, mask_grads, _ = loss_gradients(pset, gt, W)
        assert (mask_grads[0][gt == 1] < 0).all()
        assert (mask_grads[0][gt == 0] > 0).all()
