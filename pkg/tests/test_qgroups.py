import numpy as np
import pytest

from freesym.errors import BudgetError, InputMismatchError, SizeLimitError
from freesym.fixtures import (
    bistochastic_orthogonal_rep,
    bistochastic_unitary_rep,
    fixture_set,
    haar_unitary_spec,
    irrational_phase_rep,
    nilpotent_pair_rep,
    permutation_rep,
    phase_diag_rep,
    rotation_rep,
    sign_diag_rep,
    uncorrected_bistochastic_unitary_rep,
    unit_i_diag_rep,
    witness_for_family,
)
from freesym.partitions import StarPattern
from freesym.qgroups import (
    FamilyTag,
    MatrixRep,
    all_family_tags,
    block_identity_holds,
    check_biunitary,
    check_family,
    coproduct_lift,
    family_below,
    full_delta_identity_holds,
    hadamard,
    lattice_position,
    operator_norm,
    structural_consequences,
)

F = FamilyTag


def test_biunitary_basics():
    assert check_biunitary(permutation_rep(3)).residual == 0.0
    assert check_biunitary(rotation_rep(2)).residual < 1e-12
    assert check_biunitary(nilpotent_pair_rep(2)).holds

    bad = uncorrected_bistochastic_unitary_rep(3)
    chk = check_biunitary(bad)
    assert not chk.holds
    # uu* has the 2x2 block [[2.5,-1.5],[-1.5,2.5]]; worst eigenvalue gap 3
    assert chk.residual == pytest.approx(3.0, abs=1e-12)
    assert chk.details["square_consistency"]

    flat = MatrixRep(np.full((3, 3), 1 / 3, dtype=complex))
    assert not check_biunitary(flat).holds


def test_block_identity_on_rotation():
    rot = rotation_rep(2)
    assert block_identity_holds(rot, "11", 0).holds
    assert block_identity_holds(rot, "11", 1).holds
    bad0 = block_identity_holds(rot, "1", 0)
    bad1 = block_identity_holds(rot, "1", 1)
    assert not bad0.holds and not bad1.holds
    assert bad0.residual == pytest.approx(0.4, abs=1e-12)  # 0.6+0.8 vs 1
    assert bad1.residual == pytest.approx(0.8, abs=1e-12)  # 0.8-0.6 vs 1
    for j in range(3):
        assert block_identity_holds(phase_diag_rep(3, 3), "111", j).holds


def test_full_delta_identities():
    for rep in (rotation_rep(2), bistochastic_unitary_rep(3), unit_i_diag_rep(2)):
        assert full_delta_identity_holds(rep, "*1").holds

    nil = nilpotent_pair_rep(2)
    assert full_delta_identity_holds(nil, "1*1*").holds
    bad = full_delta_identity_holds(nil, "11**")
    assert not bad.holds
    assert bad.residual == pytest.approx(1.0, abs=1e-12)  # squares vanish
    assert bad.witness is not None and len(set(bad.witness)) == 1

    with pytest.raises(BudgetError):
        full_delta_identity_holds(permutation_rep(3), "1" * 13)
    with pytest.raises(InputMismatchError):
        full_delta_identity_holds(permutation_rep(3), "1")


def test_family_checks_match_known_witnesses():
    bs = bistochastic_orthogonal_rep(3)
    assert check_family(bs, F("B_S_PLUS")).holds
    s_chk = check_family(bs, F("S_PLUS"))
    assert not s_chk.holds
    assert s_chk.residual == pytest.approx(4 / 9, abs=1e-12)  # -1/3 square

    bp = bistochastic_unitary_rep(3)
    assert check_family(bp, F("B_PLUS")).holds
    o_chk = check_family(bp, F("O_PLUS"))
    assert not o_chk.holds
    assert o_chk.residual == pytest.approx(1.0, abs=1e-12)  # column squares sum 0
    assert not check_family(bp, F("B_S_PLUS")).holds

    nil = nilpotent_pair_rep(2)
    assert check_family(nil, F("H_PRIME_PLUS")).holds
    assert not check_family(nil, F("H_0_PLUS")).holds

    rot = rotation_rep(2)
    assert check_family(rot, F("O_PLUS")).holds
    assert not check_family(rot, F("B_S_PLUS")).holds
    assert not check_family(rot, F("S_PLUS")).holds

    ui = unit_i_diag_rep(3)
    assert check_family(ui, F("U_PLUS")).holds
    assert check_family(ui, F("H_PRIME_PLUS")).holds
    assert check_family(ui, F("H_0_PLUS")).holds
    assert check_family(ui, F("H_M_PLUS", 4)).holds
    assert not check_family(ui, F("H_M_PLUS", 3)).holds
    assert not check_family(ui, F("B_PLUS")).holds
    assert not check_family(ui, F("O_PLUS")).holds

    sd = sign_diag_rep(2)
    assert check_family(sd, F("H_S_PLUS")).holds
    assert check_family(sd, F("O_PLUS")).holds
    assert check_family(sd, F("H_M_PLUS", 4)).holds
    assert not check_family(sd, F("H_M_PLUS", 3)).holds
    assert not check_family(sd, F("B_S_PLUS")).holds

    perm = permutation_rep(3)
    for tag in all_family_tags(6):
        assert check_family(perm, tag).holds, tag


def test_classical_variant_checks():
    assert check_family(rotation_rep(2), F("O_PLUS", classical=True)).holds
    chk = check_family(nilpotent_pair_rep(2), F("H_PRIME_PLUS", classical=True))
    assert not chk.holds
    assert chk.details["commutativity"] == pytest.approx(1.0, abs=1e-12)


def test_subgroup_monotonicity_on_fixtures():
    tags = all_family_tags(6)
    for name, (rep, _) in fixture_set().reps.items():
        holds = {tag: check_family(rep, tag).holds for tag in tags}
        for a in tags:
            for b in tags:
                if family_below(a, b) and holds[a]:
                    assert holds[b], (name, a, b)


def test_family_below_relation():
    for kind in ("B_S_PLUS", "H_S_PLUS", "B_PLUS", "O_PLUS", "U_PLUS"):
        assert family_below(F("S_PLUS"), F(kind))
    assert family_below(F("S_PLUS"), F("H_M_PLUS", 5))
    assert family_below(F("H_M_PLUS", 3), F("H_M_PLUS", 6))
    assert not family_below(F("H_M_PLUS", 6), F("H_M_PLUS", 3))
    assert not family_below(F("H_M_PLUS", 3), F("H_M_PLUS", 4))
    assert family_below(F("H_S_PLUS"), F("H_M_PLUS", 4))
    assert not family_below(F("H_S_PLUS"), F("H_M_PLUS", 3))
    assert family_below(F("B_S_PLUS"), F("B_PLUS"))
    assert family_below(F("B_S_PLUS"), F("O_PLUS"))
    assert family_below(F("H_0_PLUS"), F("H_PRIME_PLUS"))
    assert not family_below(F("H_PRIME_PLUS"), F("H_0_PLUS"))
    assert not family_below(F("O_PLUS"), F("H_PRIME_PLUS"))
    assert not family_below(F("O_PLUS"), F("O_PLUS", classical=True))


def test_hadamard_contraction():
    rot = np.array([[0.6, 0.8], [0.8, -0.6]], dtype=complex)
    ones = np.ones((2, 2), dtype=complex)
    w = hadamard(rot, ones)
    assert np.allclose(w, rot)
    assert operator_norm(w) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(ones) == pytest.approx(2.0, abs=1e-12)

    eye_rep = MatrixRep(np.eye(3, dtype=complex))
    v = np.arange(9, dtype=float).reshape(3, 3) + 0j
    diag_part = hadamard(eye_rep.entries[:, :, 0, 0], v)
    assert np.allclose(diag_part, np.diag(np.diag(v)))
    assert operator_norm(diag_part) <= operator_norm(v) + 1e-12

    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        u, _ = np.linalg.qr(g)
        v = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert operator_norm(hadamard(u, v)) <= operator_norm(v) + 1e-12


def test_hadamard_blockwise_on_fixture_models():
    rng = np.random.default_rng(11)
    for name, (rep, _) in fixture_set().reps.items():
        v = rng.standard_normal(rep.entries.shape) + 1j * rng.standard_normal(
            rep.entries.shape
        )
        vrep = MatrixRep(v)
        prod = hadamard(rep, vrep)
        assert operator_norm(prod) <= operator_norm(vrep) + 1e-12, name


def test_coproduct_lift():
    p = permutation_rep(3)
    lifted = coproduct_lift(p, p)
    square = p.flatten() @ p.flatten()
    assert np.allclose(lifted.flatten(), square)

    rot = rotation_rep(2)
    self_lift = coproduct_lift(rot, rot)
    assert check_family(self_lift, F("O_PLUS")).holds

    trivial = MatrixRep(np.eye(2, dtype=complex))
    again = coproduct_lift(rot, trivial)
    assert np.allclose(again.entries, rot.entries)

    with pytest.raises(InputMismatchError):
        coproduct_lift(rotation_rep(2), permutation_rep(3))


def test_coproduct_lift_preserves_delta_patterns():
    scan = [StarPattern(s) for s in ("11", "1*", "*1", "**", "1*1*", "11**", "111")]
    for name, (rep, _) in fixture_set().reps.items():
        lifted = coproduct_lift(rep, rep)
        for d in scan:
            if full_delta_identity_holds(rep, d).holds:
                lifted_chk = full_delta_identity_holds(lifted, d)
                assert lifted_chk.residual <= 1e-8, (name, d.letters)


def test_structural_consequences_nilpotent():
    report = structural_consequences(nilpotent_pair_rep(2))
    assert "1*1*" in report["satisfied_patterns"]
    assert "11**" not in report["satisfied_patterns"]
    assert report["checks"]["partial_isometries"].holds
    assert report["checks"]["cross_orthogonality"].holds
    assert "normal_entries" not in report["checks"]
    assert report["holds"]
    # and the entries genuinely are non-normal, consistent with the absence
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    assert not np.allclose(e12 @ e12.conj().T, e12.conj().T @ e12)


def test_structural_consequences_phase_and_rotation():
    report = structural_consequences(phase_diag_rep(3, 3))
    assert "111" in report["satisfied_patterns"]
    assert report["checks"]["power_sums"].holds
    assert report["checks"]["entrywise_inverse"].holds
    assert report["checks"]["cyclic_rotations"].holds
    assert report["holds"]

    report = structural_consequences(rotation_rep(2))
    assert set(report["satisfied_patterns"]) >= {"11", "1*", "*1", "**"}
    assert "1*1*" not in report["satisfied_patterns"]
    assert report["holds"]


def test_lattice_positions():
    pos = lattice_position(unit_i_diag_rep(3))
    assert pos["minimal"] == ["H_M_PLUS(4)"]
    assert "H_M_PLUS(8)" in pos["satisfied"]
    assert "H_M_PLUS(12)" in pos["satisfied"]
    assert "H_0_PLUS" in pos["satisfied"]
    assert pos["closure"]["implied"] == "H_M_PLUS(4)"
    assert pos["closure"]["consistent"]
    assert pos["upward_consistent"]

    assert lattice_position(rotation_rep(2))["minimal"] == ["O_PLUS"]
    assert lattice_position(permutation_rep(3))["minimal"] == ["S_PLUS"]

    pos = lattice_position(sign_diag_rep(2))
    assert pos["minimal"] == ["H_S_PLUS"]
    assert pos["closure"]["implied"] == "H_S_PLUS"

    pos = lattice_position(bistochastic_unitary_rep(3))
    assert pos["minimal"] == ["B_PLUS"]
    assert pos["closure"]["implied"] is None

    pos = lattice_position(bistochastic_orthogonal_rep(3))
    assert pos["minimal"] == ["B_S_PLUS"]
    assert pos["closure"]["consistent"]


def test_rep_validation_and_tags():
    with pytest.raises(InputMismatchError):
        MatrixRep(np.zeros((2, 3, 1, 1)))
    with pytest.raises(InputMismatchError):
        MatrixRep(np.zeros((2, 2, 2, 3)))
    with pytest.raises(SizeLimitError):
        MatrixRep(np.zeros((10, 10, 7, 7)))
    with pytest.raises(InputMismatchError):
        MatrixRep(np.full((2, 2), np.nan))

    assert FamilyTag.parse("H_M_PLUS:3") == F("H_M_PLUS", 3)
    assert FamilyTag.parse("o_plus") == F("O_PLUS")
    assert FamilyTag.parse("O_PLUS:classical") == F("O_PLUS", classical=True)
    assert FamilyTag.parse("H_M_PLUS:4:classical") == F(
        "H_M_PLUS", 4, classical=True
    )
    assert F("H_M_PLUS", 5).spell() == "H_M_PLUS:5"
    with pytest.raises(InputMismatchError):
        FamilyTag.parse("X_PLUS")
    with pytest.raises(InputMismatchError):
        FamilyTag("H_M_PLUS", 2)
    with pytest.raises(InputMismatchError):
        FamilyTag("O_PLUS", 3)


def test_fixture_set_and_haar_spec():
    fixtures = fixture_set()
    assert set(fixtures.reps) == {
        "permutation",
        "rotation",
        "bistochastic_orthogonal",
        "sign_diag",
        "bistochastic_unitary",
        "phase_diag_3",
        "irrational_phase",
        "nilpotent_pair",
        "unit_i_diag",
    }
    assert "spec_circular" in fixtures.specs
    assert "haar_unitary" in fixtures.specs

    haar = haar_unitary_spec(6)
    assert haar.entries["1*"] == pytest.approx(1.0)
    assert haar.entries["*1"] == pytest.approx(1.0)
    assert haar.entries["1*1*"] == pytest.approx(-1.0)
    assert haar.entries["*1*1"] == pytest.approx(-1.0)
    assert haar.entries["1*1*1*"] == pytest.approx(2.0)
    assert "11**" not in haar.entries
    for letters in haar.entries:
        d = StarPattern(letters)
        assert d.imbalance == 0 and d.is_strictly_alternating()


def test_witness_for_family_satisfies_itself():
    for n in (2, 3):
        for tag in all_family_tags(4):
            rep = witness_for_family(tag, n)
            assert check_family(rep, tag).holds, (tag, n)


def test_irrational_phase_avoids_all_moduli():
    rep = irrational_phase_rep(2)
    assert check_family(rep, F("H_0_PLUS")).holds
    for m in range(3, 13):
        assert not check_family(rep, F("H_M_PLUS", m)).holds, m
