import json
from fractions import Fraction

import pytest
from hypothesis import given

from qmforms import reference
from qmforms.altform import AltForm
from qmforms.errors import NotInCommutatorSubgroupError, RankMismatchError, ResourceLimitError, ValidationError
from qmforms.qm import (
    BrooksTerm,
    PulledBack,
    QmSpec,
    brooks_on_power,
    commutator_subgroup_ball,
    count_occurrences,
    estimate_defect,
    eval_brooks,
    eval_core,
    eval_qm,
    homogenize_estimate,
)
from qmforms.words import (
    Word,
    abelianize,
    commutator,
    conjugate,
    inverse,
    parse_word,
    power,
    random_commutator_element,
    random_word,
)

from conftest import commutator_elements, words

UNIT = AltForm([[0, 1], [-1, 0]])


def W(text, rank=2):
    return parse_word(text, rank)


def brooks_spec(pattern="a b", weight=1, core=None, depth=64, bound=0):
    core = core if core is not None else AltForm.zero(2)
    return QmSpec(2, core, (BrooksTerm(W(pattern), Fraction(weight)),), depth, Fraction(bound))


class TestCore:
    def test_unit_square(self):
        assert eval_core(UNIT, W("a b A B")) == 1 == reference.shoelace_area(W("a b A B"), 1, 2)

    def test_identity(self):
        assert eval_core(UNIT, Word.identity(2)) == 0

    def test_stretched_commutator(self):
        w = commutator(power(W("a"), 3), W("b"))
        assert eval_core(UNIT, w) == 3 == reference.shoelace_area(w, 1, 2)

    def test_rejects_outside_n(self):
        with pytest.raises(NotInCommutatorSubgroupError):
            eval_core(UNIT, W("a"))

    def test_rank_mismatch(self):
        with pytest.raises(RankMismatchError):
            eval_core(UNIT, Word.identity(3))

    def test_long_word_numpy_path_matches_oracle(self, rng):
        for _ in range(20):
            g1 = random_word(3, 4, rng, min_len=1)
            g2 = random_word(3, 4, rng)
            w = commutator(power(g1, rng.randint(130, 200)), g2)
            B = AltForm.from_upper(3, {(0, 1): 2, (0, 2): -1, (1, 2): 3})
            want = sum(B[i, j] * reference.shoelace_area(w, i + 1, j + 1) for i, j in [(0, 1), (0, 2), (1, 2)])
            assert eval_core(B, w) == want

    @given(commutator_elements(), commutator_elements())
    def test_homomorphism(self, u, v):
        assert eval_core(UNIT, u * v) == eval_core(UNIT, u) + eval_core(UNIT, v)

    @given(commutator_elements(), words())
    def test_conjugation_invariance(self, w, f):
        assert eval_core(UNIT, conjugate(w, f)) == eval_core(UNIT, w)

    @given(words(rank=3), words(rank=3))
    def test_commutator_is_bilinear_form(self, f1, f2):
        B = AltForm.from_upper(3, {(0, 1): 1, (0, 2): Fraction(1, 2), (1, 2): -2})
        assert eval_core(B, commutator(f1, f2)) == B(abelianize(f1), abelianize(f2))

    def test_homogeneity(self, rng):
        for _ in range(500):
            w = random_commutator_element(2, 3, rng)
            k = rng.randint(-6, 6)
            assert eval_core(UNIT, power(w, k)) == k * eval_core(UNIT, w)


class TestBrooks:
    def test_examples(self):
        assert eval_brooks(W("a b"), W("a b a b")) == 2
        assert eval_brooks(W("a b"), Word.identity(2)) == 0
        assert eval_brooks(W("a b"), W("B A")) == -1

    def test_overlaps_counted(self):
        assert count_occurrences((1, 1, 1, 1), (1, 1)) == 3

    def test_empty_pattern(self):
        with pytest.raises(ValidationError):
            eval_brooks(Word.identity(2), W("a"))
        with pytest.raises(ValidationError):
            BrooksTerm(Word.identity(2), Fraction(1))

    @given(words(max_len=3).filter(len), words(max_len=12))
    def test_antisymmetry(self, p, g):
        assert eval_brooks(p, inverse(g)) == -eval_brooks(p, g)

    def test_matches_naive_count(self, rng):
        for _ in range(2000):
            m = rng.randint(1, 3)
            p = random_word(m, 4, rng, min_len=1)
            g = random_word(m, 30, rng)
            assert eval_brooks(p, g) == reference.naive_count(p, g)

    def test_numpy_path_matches_naive(self, rng):
        for _ in range(20):
            p = random_word(2, 3, rng, min_len=1)
            g = random_word(2, 2000, rng, min_len=300)
            assert eval_brooks(p, g) == reference.naive_count(p, g)

    def test_power_shortcut_matches_materialized(self, rng):
        for _ in range(3000):
            m = rng.randint(1, 3)
            w = random_word(m, 8, rng)
            p = random_word(m, 5, rng, min_len=1)
            K = rng.randint(1, 20)
            assert brooks_on_power(p, w, K) == eval_brooks(p, power(w, K))


class TestEvalQm:
    def test_pure_core(self):
        assert eval_qm(QmSpec.pure_core(UNIT), W("a b A B")) == 1

    def test_identity(self):
        spec = brooks_spec(core=UNIT)
        assert eval_qm(spec, Word.identity(2)) == 0

    def test_brooks_depth_one(self):
        assert eval_qm(brooks_spec(depth=1), W("a b A B")) == 1

    def test_rejects_outside_n(self):
        with pytest.raises(NotInCommutatorSubgroupError):
            eval_qm(brooks_spec(), W("a b"))

    def test_matches_naive(self, rng):
        for _ in range(300):
            spec = brooks_spec(
                pattern=str(random_word(2, 3, rng, min_len=1)),
                weight=Fraction(rng.randint(-3, 3), rng.randint(1, 3)),
                core=UNIT * rng.randint(-2, 2),
                depth=rng.randint(1, 16),
            )
            w = random_commutator_element(2, 3, rng)
            assert eval_qm(spec, w) == reference.naive_mu(spec, w)

    def test_homogenize_estimate(self):
        spec = QmSpec.pure_core(UNIT)
        w = W("a b A B")
        for K in (1, 3, 16):
            assert homogenize_estimate(spec, w, K) == eval_core(UNIT, w)
        assert homogenize_estimate(brooks_spec(), Word.identity(2), 5) == 0

    def test_homogenize_depths_within_defect(self):
        spec = brooks_spec(depth=1)
        w = commutator(W("a"), W("b"))
        d = estimate_defect(spec, 6).lower_bound
        assert abs(homogenize_estimate(spec, w, 1) - homogenize_estimate(spec, w, 16)) <= 2 * d

    def test_homogenize_estimate_equals_eval_at_depth(self, rng):
        for _ in range(200):
            K = rng.randint(1, 10)
            spec = brooks_spec(pattern=str(random_word(2, 3, rng, min_len=1)), depth=K)
            w = random_commutator_element(2, 3, rng)
            assert homogenize_estimate(spec, w, K) == eval_qm(spec, w)

    def test_pullback_evaluates_through_substitution(self):
        spec = QmSpec.pure_core(UNIT)
        swapped = PulledBack(spec, [W("b"), W("a")])
        assert swapped.evaluate(W("a b A B")) == -1


class TestDefect:
    def test_homomorphism_has_zero_defect(self):
        est = estimate_defect(QmSpec.pure_core(UNIT), 6)
        assert est.lower_bound == 0

    def test_zero_spec(self):
        assert estimate_defect(QmSpec.zero(2), 4).lower_bound == 0
        assert estimate_defect(QmSpec.zero(2), 4, mode="random", samples=10).lower_bound == 0

    def test_brooks_ab_radius_6(self):
        # frozen from reference.exhaustive_defect at radius 6
        est = estimate_defect(brooks_spec(core=UNIT), 6)
        assert est.lower_bound == Fraction(127, 64)
        assert est.exhaustive
        x, y = est.witness_pair
        spec = brooks_spec(core=UNIT)
        assert abs(eval_qm(spec, x * y) - eval_qm(spec, x) - eval_qm(spec, y)) == est.lower_bound

    def test_matches_reference(self):
        spec = brooks_spec(pattern="a b A", weight=Fraction(3, 2), core=UNIT, depth=8)
        assert estimate_defect(spec, 4).lower_bound == reference.exhaustive_defect(spec, 4)

    def test_random_mode_witness(self):
        spec = brooks_spec()
        est = estimate_defect(spec, 8, mode="random", samples=300, seed=3)
        assert not est.exhaustive
        x, y = est.witness_pair
        assert abs(eval_qm(spec, x * y) - eval_qm(spec, x) - eval_qm(spec, y)) == est.lower_bound

    def test_scaled_kernel_matches_eval_qm(self, rng):
        from qmforms.qm import _ScaledBrooks

        for _ in range(300):
            m = rng.randint(2, 3)
            terms = tuple(
                BrooksTerm(random_word(m, 4, rng, min_len=1), Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
                for _ in range(rng.randint(1, 3))
            )
            spec = QmSpec(m, AltForm.zero(m), terms, rng.randint(1, 9), 0)
            kernel = _ScaledBrooks(spec) if not spec.is_homomorphism else None
            w = random_commutator_element(m, 4, rng)
            if kernel is None:
                continue
            assert Fraction(kernel(w.letters), kernel.scale) == eval_qm(spec, w)

    def test_resource_cap(self):
        with pytest.raises(ResourceLimitError):
            estimate_defect(brooks_spec(), 8, max_pairs=1000)

    def test_ball_matches_bruteforce_count(self):
        assert len(commutator_subgroup_ball(2, 6)) == 49
        assert all(not any(abelianize(w)) for w in commutator_subgroup_ball(3, 4))

    def test_default_bound_is_twice_radius_8(self):
        spec = QmSpec(2, UNIT, (BrooksTerm(W("a b"), Fraction(1)),))
        assert spec.bound == 2 * Fraction(127, 64)

    def test_quasimorphism_law_with_default_bound(self, rng):
        spec = QmSpec(2, UNIT, (BrooksTerm(W("a b"), Fraction(1)),))
        D = spec.envelope_constant()
        for _ in range(1000):
            x = random_commutator_element(2, 4, rng)
            y = random_commutator_element(2, 4, rng)
            assert abs(eval_qm(spec, x * y) - eval_qm(spec, x) - eval_qm(spec, y)) <= D


class TestSpecDocument:
    def test_roundtrip(self):
        spec = QmSpec(
            2, UNIT, (BrooksTerm(W("a b"), Fraction(-2, 3)),), 32, Fraction(7, 2)
        )
        again = QmSpec.from_json(json.loads(json.dumps(spec.to_json())))
        assert again == spec

    def test_loads(self):
        doc = '{"rank": 2, "core": [["0", "1/2"], ["-1/2", "0"]], "brooks": [{"pattern": "a B", "weight": "3"}], "homog_depth": 4, "defect_bound": "5"}'
        spec = QmSpec.loads(doc)
        assert spec.core[0, 1] == Fraction(1, 2)
        assert spec.brooks[0].pattern == W("a B") and spec.brooks[0].weight == 3
        assert spec.bound == 5

    @pytest.mark.parametrize(
        "doc",
        [
            "{not json",
            '{"rank": 2, "core": [["0", "1"], ["1", "0"]]}',
            '{"rank": 2, "core": [["1", "0"], ["0", "0"]]}',
            '{"rank": 0}',
            '{"rank": 2, "brooks": [{"pattern": ""}]}',
            '{"rank": 2, "brooks": [{"pattern": "c"}]}',
            '{"rank": 2, "homog_depth": 0}',
            '{"rank": 2, "defect_bound": "-1"}',
            '{"rank": 2, "core": [[0.5, 0], [0, 0]]}',
            '{"rank": 2, "colour": "red"}',
        ],
    )
    def test_invalid(self, doc):
        with pytest.raises(ValidationError):
            QmSpec.loads(doc)
