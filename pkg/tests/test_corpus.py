import pytest

from conftest import CORPUS
from demonic_ol.corpus_runner import CorpusEntry, load_manifest, run_corpus, run_entry

LIGHT = ["coin-adversary-first", "coin-flip-first", "monty-hall-game", "monty-hall-stick", "monty-hall-switch",
         "resetting-walk", "fair-walk"]


def test_manifest_is_complete():
    entries = load_manifest()
    names = [e.name for e in entries]
    assert names == sorted(names) and len(set(names)) == len(names)
    assert set(LIGHT) <= set(names)
    for e in entries:
        assert (CORPUS / e.program).is_file()
        for chk in e.checks:
            (kind, spec), = chk.items()
            if kind == "script":
                assert (CORPUS / spec["file"]).is_file()


@pytest.mark.parametrize("name", LIGHT)
def test_light_entries(name):
    (entry,) = [e for e in load_manifest() if e.name == name]
    r = run_entry(entry)
    assert r.ok, r.dump()


def test_parallel_run_matches_serial():
    serial = run_corpus("coin-*")
    parallel = run_corpus("coin-*", jobs=2)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]


def test_unknown_check_kind_is_a_mismatch():
    e = CorpusEntry("odd", "monty_game.dol", ({"guess": {}},))
    r = run_entry(e, CORPUS)
    assert not r.ok and "unknown check kind" in r.outcomes[0].detail


def test_crash_is_a_mismatch():
    e = CorpusEntry("odd", "monty_game.dol", ({"denote": {"event": "pick = = car", "mass": 1}},))
    r = run_entry(e, CORPUS)
    assert not r.ok and r.outcomes[0].detail.startswith("ParseError")
