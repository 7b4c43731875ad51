"""Preference relation analysis: validation, killer detection, partitions,
splits, antagonistic extensions, Pareto sets."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from spearena import fixtures
from spearena.errors import InputError, PreconditionError
from spearena.prefs import (
    LINEAR,
    STRICT_WEAK,
    IntervalPartition,
    KillerPresentError,
    OutcomeSet,
    PreferenceProfile,
    PreferenceRelation,
    antagonistic_extension,
    chain_relation,
    check_partition,
    class_relation,
    find_spe_killer,
    incomparability_is_equivalence,
    interval_partition,
    make_relation,
    pareto_optimal,
    two_block_split,
    validate_relation,
)

XY = OutcomeSet(("x", "y"))
XYZ = OutcomeSet(("x", "y", "z"))
XYZT = OutcomeSet(("x", "y", "z", "t"))


def brute_force_partition_ok(profile, partition):
    """Independent re-check of the two partition conditions over all pairs."""
    ref = partition.reference
    for i, blk_i in enumerate(partition.blocks):
        for j, blk_j in enumerate(partition.blocks):
            if i >= j:
                continue
            for x in blk_i:
                for y in blk_j:
                    for a in profile.players:
                        if not profile.prec(a, x, y):
                            return False
    for p in profile.players:
        for blk, flag in zip(partition.blocks, partition.orientation[p]):
            for x in blk:
                for y in blk:
                    if x == y:
                        continue
                    base = profile.prec(ref, x, y)
                    mine = profile.prec(p, x, y)
                    if flag == "same" and mine != base:
                        return False
                    if flag == "inverse" and mine != profile.prec(ref, y, x):
                        return False
    return True


def brute_force_splits(rel_a, rel_b, outcomes):
    """Every valid two-block split, by exhaustive subset enumeration."""
    outs = tuple(outcomes)
    found = []
    for mask in range(1, 2 ** len(outs) - 1):
        upper = tuple(o for i, o in enumerate(outs) if mask >> i & 1)
        lower = tuple(o for i, o in enumerate(outs) if not mask >> i & 1)
        if all(
            not rel_a.prec(u, l) and not rel_b.prec(u, l)
            for u in upper
            for l in lower
        ):
            found.append((upper, lower))
    return found


class TestValidateRelation:
    def test_two_element_total_order(self):
        rel = make_relation([("x", "y")], LINEAR)
        assert validate_relation(rel, XY).ok

    def test_symmetric_pair_rejected(self):
        rel = make_relation([("x", "y"), ("y", "x")], LINEAR)
        report = validate_relation(rel, XY)
        assert not report.ok
        assert report.axiom in ("asymmetry", "irreflexivity")
        assert set(report.witness) <= {"x", "y"}

    def test_proposition_linear_b_relation_as_swo(self):
        # y < z < x < t has six pairs after closure and is a strict weak order
        rel = chain_relation(["y", "z", "x", "t"], STRICT_WEAK)
        assert len(rel.pairs) == 6
        assert validate_relation(rel, XYZT).ok

    def test_missing_totality(self):
        rel = make_relation([("x", "y")], LINEAR)
        report = validate_relation(rel, XYZ)
        assert not report.ok and report.axiom == "totality"

    def test_complement_transitivity_violation(self):
        # x < z only: incomparability {x,y}, {y,z} but not {x,z}
        rel = make_relation([("x", "z")], STRICT_WEAK)
        report = validate_relation(rel, XYZ)
        assert not report.ok and report.axiom == "complement-transitivity"

    def test_unknown_outcome_is_input_error(self):
        rel = make_relation([("x", "w")], LINEAR)
        with pytest.raises(InputError):
            validate_relation(rel, XY)

    @given(st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_swo_iff_incomparability_equivalence(self, seed):
        rng = random.Random(seed)
        outs = ("x", "y", "z", "w")
        pool = [
            (a, b)
            for a in outs
            for b in outs
            if a != b
        ]
        pairs = rng.sample(pool, rng.randint(0, 6))
        rel = make_relation(pairs, STRICT_WEAK)
        outcome_set = OutcomeSet(outs)
        report = validate_relation(rel, outcome_set)
        if report.ok:
            assert incomparability_is_equivalence(rel, outcome_set)
        elif report.axiom == "complement-transitivity":
            assert not incomparability_is_equivalence(rel, outcome_set)


class TestFindSpeKiller:
    def test_intro_pattern(self):
        witness = find_spe_killer(fixtures.intro_killer_profile())
        assert witness is not None
        assert witness.as_tuple() == ("a", "b", "x", "y", "z")

    def test_identical_orders_have_none(self):
        rel = chain_relation(["z", "y", "x"])
        profile = PreferenceProfile(
            players=("a", "b"), outcomes=XYZ, relations={"a": rel, "b": rel}
        )
        assert find_spe_killer(profile) is None

    def test_three_player_observation_orders_have_none(self):
        assert find_spe_killer(fixtures.three_player_profile()) is None

    def test_deterministic_first_witness(self):
        profile = fixtures.intro_killer_profile()
        assert find_spe_killer(profile) == find_spe_killer(profile)


class TestIntervalPartition:
    def test_two_antagonists_single_block(self):
        profile = PreferenceProfile(
            players=("a", "b"),
            outcomes=XY,
            relations={"a": chain_relation(["x", "y"]), "b": chain_relation(["y", "x"])},
        )
        part = interval_partition(profile)
        assert part.blocks == (("x", "y"),)
        assert part.orientation["b"] == ("inverse",)

    def test_identical_orders_singleton_blocks(self):
        rel = chain_relation(["x", "y"])
        profile = PreferenceProfile(
            players=("a", "b"), outcomes=XY, relations={"a": rel, "b": rel}
        )
        assert interval_partition(profile).blocks == (("x",), ("y",))

    def test_mixed_profile_brute_force(self):
        profile = PreferenceProfile(
            players=("a", "b"),
            outcomes=XYZ,
            relations={
                "a": chain_relation(["x", "y", "z"]),
                "b": chain_relation(["y", "x", "z"]),
            },
        )
        part = interval_partition(profile)
        assert part.blocks == (("x", "y"), ("z",))
        assert part.orientation["b"][0] == "inverse"
        assert brute_force_partition_ok(profile, part)

    def test_killer_rejected_with_witness(self):
        with pytest.raises(KillerPresentError) as err:
            interval_partition(fixtures.intro_killer_profile())
        assert err.value.witness.as_tuple() == ("a", "b", "x", "y", "z")

    @given(st.integers(0, 10**6))
    @settings(max_examples=100, deadline=None)
    def test_killer_absent_iff_partition_exists(self, seed):
        rng = random.Random(seed)
        players = ("a", "b", "c")[: rng.randint(1, 3)]
        outs = ("x", "y", "z", "w", "v")[: rng.randint(2, 5)]
        profile = fixtures.random_linear_profile(rng, players, outs)
        killer = find_spe_killer(profile)
        if killer is None:
            part = interval_partition(profile)
            assert check_partition(profile, part)
            assert brute_force_partition_ok(profile, part)
        else:
            with pytest.raises(KillerPresentError):
                interval_partition(profile)

    @given(st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_nonsingleton_blocks_witness_inversion(self, seed):
        rng = random.Random(seed)
        players = ("a", "b", "c")[: rng.randint(2, 3)]
        outs = ("x", "y", "z", "w")[: rng.randint(2, 4)]
        profile = fixtures.random_linear_profile(rng, players, outs)
        if find_spe_killer(profile) is not None:
            return
        part = interval_partition(profile)
        for i, blk in enumerate(part.blocks):
            if len(blk) > 1:
                assert any(
                    part.orientation[p][i] == "inverse" for p in profile.players
                )


class TestCheckPartition:
    def test_construction_output_passes(self):
        profile = fixtures.intro_antagonist_profile()
        assert check_partition(profile, interval_partition(profile))

    def test_wrong_block_order_fails(self):
        profile = PreferenceProfile(
            players=("a",),
            outcomes=XY,
            relations={"a": chain_relation(["y", "x"])},
        )
        bad = IntervalPartition(
            blocks=(("x",), ("y",)), orientation={"a": ("same", "same")}, reference="a"
        )
        assert not check_partition(profile, bad)

    def test_wrong_orientation_flag_fails(self):
        rel = chain_relation(["x", "y"])
        profile = PreferenceProfile(
            players=("a", "b"), outcomes=XY, relations={"a": rel, "b": rel}
        )
        bad = IntervalPartition(
            blocks=(("x", "y"),),
            orientation={"a": ("same",), "b": ("inverse",)},
            reference="a",
        )
        assert not check_partition(profile, bad)


class TestTwoBlockSplit:
    def test_common_top(self):
        ra = chain_relation(["y", "x"], STRICT_WEAK)
        rb = chain_relation(["y", "x"], STRICT_WEAK)
        assert two_block_split(ra, rb, ("x", "y")) == (("x",), ("y",))

    def test_antagonists_have_none(self):
        ra = chain_relation(["y", "x"], STRICT_WEAK)
        rb = chain_relation(["x", "y"], STRICT_WEAK)
        assert two_block_split(ra, rb, ("x", "y")) is None

    def test_against_exhaustive_enumeration(self):
        ra = class_relation((("t", "z"), ("x", "y")))
        rb = chain_relation(["y", "z", "x", "t"], STRICT_WEAK)
        outs = ("x", "y", "z", "t")
        split = two_block_split(ra, rb, outs)
        all_splits = brute_force_splits(ra, rb, outs)
        if not all_splits:
            assert split is None
        else:
            assert split in all_splits
            assert len(split[0]) == min(len(u) for u, _ in all_splits)

    @given(st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_minimality_against_brute_force(self, seed):
        rng = random.Random(seed)
        outs = ("x", "y", "z", "w")[: rng.randint(2, 4)]
        ra = fixtures.random_swo_relation(rng, outs)
        rb = fixtures.random_swo_relation(rng, outs)
        split = two_block_split(ra, rb, outs)
        all_splits = brute_force_splits(ra, rb, outs)
        if split is None:
            assert not all_splits
        else:
            assert split in all_splits
            assert len(split[0]) == min(len(u) for u, _ in all_splits)


class TestAntagonisticExtension:
    def test_forced_two_element_case(self):
        ra = make_relation([("x", "y")], STRICT_WEAK)
        rb = make_relation([("y", "x")], STRICT_WEAK)
        ext = antagonistic_extension(ra, rb, ("x", "y"))
        assert ext.prec("x", "y")

    def test_empty_against_chain(self):
        ra = make_relation([], STRICT_WEAK)
        rb = chain_relation(["y", "z", "x"], STRICT_WEAK)
        ext = antagonistic_extension(ra, rb, ("x", "y", "z"))
        # x < z < y: b's order fully inverted
        assert ext.prec("x", "z") and ext.prec("z", "y") and ext.prec("x", "y")

    def test_common_pair_is_precondition_error(self):
        rel = make_relation([("x", "y")], STRICT_WEAK)
        with pytest.raises(PreconditionError) as err:
            antagonistic_extension(rel, rel, ("x", "y"))
        assert "('x', 'y')" in str(err.value)

    @given(st.integers(0, 10**6))
    @settings(max_examples=120, deadline=None)
    def test_containment_properties(self, seed):
        rng = random.Random(seed)
        outs = ("x", "y", "z", "w", "v")[: rng.randint(2, 5)]
        ra, rb = fixtures.random_disjoint_swo_pair(rng, outs)
        ext = antagonistic_extension(ra, rb, outs)
        assert validate_relation(ext, OutcomeSet(outs)).ok and ext.kind == LINEAR
        for x, y in ra.pairs:
            assert ext.prec(x, y)
        for x, y in rb.pairs:
            assert ext.prec(y, x)


class TestParetoOptimal:
    def test_opposed_interests_keep_both(self):
        profile = PreferenceProfile(
            players=("a", "b"),
            outcomes=XY,
            relations={"a": chain_relation(["y", "x"]), "b": chain_relation(["x", "y"])},
        )
        assert pareto_optimal(("x", "y"), profile) == ("x", "y")

    def test_unanimity_keeps_top(self):
        rel = chain_relation(["y", "x"])
        profile = PreferenceProfile(
            players=("a", "b"), outcomes=XY, relations={"a": rel, "b": rel}
        )
        assert pareto_optimal(("x", "y"), profile) == ("x",)

    def test_killer_profile_brute_force(self):
        profile = fixtures.intro_killer_profile()
        result = pareto_optimal(("x", "y", "z"), profile)
        # independent check straight from the definition
        expected = []
        for x in ("x", "y", "z"):
            ok = True
            for y in ("x", "y", "z"):
                for a in ("a", "b"):
                    if profile.prec(a, x, y) and not any(
                        profile.prec(b, y, x) for b in ("a", "b")
                    ):
                        ok = False
            if ok:
                expected.append(x)
        assert result == tuple(expected) == ("x", "y")

    @given(st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_nonempty_for_swo_profiles(self, seed):
        rng = random.Random(seed)
        outs = ("x", "y", "z", "w")[: rng.randint(1, 4)]
        profile = PreferenceProfile(
            players=("a", "b"),
            outcomes=OutcomeSet(outs),
            relations={
                "a": fixtures.random_swo_relation(rng, outs),
                "b": fixtures.random_swo_relation(rng, outs),
            },
        )
        subset = tuple(
            o for o in outs if rng.random() < 0.7
        ) or (outs[0],)
        assert pareto_optimal(subset, profile)
