import pytest

from natlogic.catalog import collapse_example
from natlogic.search import (
    LS_STRUCTURALITY_FAILURE,
    MULTIPLE_NATEXTS,
    SS_CUT_FAILURE,
    Witness,
    ls_structurality_space,
    multiple_natexts_space,
    search_counterexample,
    ss_cut_space,
)
from natlogic.terms import VarSet


def test_space_sizes():
    assert len(ss_cut_space()) == 2856
    assert len(ls_structurality_space()) == 1500
    assert len(multiple_natexts_space()) == 13


@pytest.mark.parametrize("claim", [SS_CUT_FAILURE, LS_STRUCTURALITY_FAILURE])
def test_default_search_finds_a_replayable_witness(claim):
    result = search_counterexample(claim)
    assert result.found
    assert result.examined <= result.space
    assert result.witness.replay()
    again = Witness.parse(result.witness.write())
    assert again.to_dict() == result.witness.to_dict()
    assert again.replay()


def test_cut_failure_witness_shape():
    witness = search_counterexample(SS_CUT_FAILURE).witness
    assert witness.goal is not None
    assert witness.lemmas
    assert set(witness.lemmas).isdisjoint(witness.premises)


def test_search_is_deterministic():
    first = search_counterexample(LS_STRUCTURALITY_FAILURE, seed=7)
    second = search_counterexample(LS_STRUCTURALITY_FAILURE, seed=7)
    assert first.to_dict() == second.to_dict()


def test_zero_budget():
    result = search_counterexample(SS_CUT_FAILURE, budget=0)
    assert result.examined == 0
    assert not result.found
    assert not result.exhausted
    assert result.notes == ["budget of 0 candidates spent"]
    assert result.to_dict()["exhausted"] is False


def test_search_errors():
    with pytest.raises(ValueError):
        search_counterexample("cut-elimination")
    with pytest.raises(ValueError):
        search_counterexample(SS_CUT_FAILURE, budget=-1)


def test_multiple_natural_extensions_search():
    result = search_counterexample(MULTIPLE_NATEXTS)
    assert result.found or result.exhausted
    if result.found:
        assert result.witness.count >= 2
        assert result.witness.replay()
    else:
        assert result.examined == result.space == 13
        assert result.notes == ["search space exhausted: all 13 candidate(s) examined without a witness"]
        assert result.to_dict()["exhausted"] is True


def test_false_claims_do_not_replay():
    witness = Witness(MULTIPLE_NATEXTS, collapse_example(), VarSet.of("x", "y"), count=2)
    check = witness.replay()
    assert not check
    assert check.witness == {"found": 1, "claimed": 2}


def test_witness_files_need_a_known_claim():
    with pytest.raises(ValueError):
        Witness.parse("sig a:0\nvars x\nrule x => a\n")
    with pytest.raises(ValueError):
        Witness.parse("sig a:0\nvars x\nrule x => a\nclaim cut-elimination\n").replay()


def test_witness_file_round_trip(tmp_path):
    witness = Witness.parse(
        "name ls\nsig a:0 h:2\nvars x\nrule x => a\nbounds depth=1 iters=16\nextend x y\n"
        "claim ls-structurality-failure\npremises y\ngoal a\nsubst y := h(x, y)\n"
    )
    assert witness.replay()
    path = tmp_path / "ls.witness"
    witness.write_file(str(path))
    again = Witness.read_file(str(path))
    assert again.to_dict() == {
        "property": LS_STRUCTURALITY_FAILURE,
        "presentation": "ls",
        "target": ["x", "y"],
        "premises": ["y"],
        "goal": "a",
        "substitution": "y := h(x, y)",
    }
