import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geckit.corpus import (
    CorpusFormatError,
    GoldEdit,
    load_m2,
    load_parallel,
    save_m2,
    save_parallel,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_parallel_basic(tmp_path):
    p = write(
        tmp_path,
        "c.tsv",
        "do you have best friend ?\tDo you have a best friend ?\n" "a\ta\n" "x y\t\n",
    )
    corpus = load_parallel(p)
    assert len(corpus) == 3
    s0 = corpus.samples[0]
    assert len(s0.source) == 6 and len(s0.target) == 7
    s1 = corpus.samples[1]
    assert s1.source == s1.target == ("a",)
    s2 = corpus.samples[2]
    assert len(s2.source) == 2 and s2.target == ()
    assert [s.id for s in corpus] == [0, 1, 2]


@pytest.mark.parametrize(
    "bad,fragment",
    [
        ("a b\n", "one tab"),
        ("a\tb\tc\n", "one tab"),
        ("\tb\n", "empty source"),
        ("a b\tc\n\nq\tr\n", "blank line"),
        ("a  b\tc\n", "empty token"),
    ],
)
def test_load_parallel_errors_name_line(tmp_path, bad, fragment):
    p = write(tmp_path, "bad.tsv", bad)
    with pytest.raises(CorpusFormatError) as exc:
        load_parallel(p)
    assert fragment in str(exc.value)
    assert ":" in str(exc.value)  # path:line prefix


token = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd", "Po")), min_size=1, max_size=6
).filter(lambda t: not any(c.isspace() for c in t) and "\t" not in t)
sentence = st.lists(token, min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(sentence, st.lists(token, max_size=8)), min_size=1, max_size=12))
def test_parallel_round_trip(tmp_path_factory, pairs):
    tmp = tmp_path_factory.mktemp("rt")
    text = "".join(" ".join(src) + "\t" + " ".join(tgt) + "\n" for src, tgt in pairs)
    p = write(tmp, "rt.tsv", text)
    corpus = load_parallel(p)
    out = tmp / "out.tsv"
    save_parallel(corpus, out)
    assert out.read_bytes() == p.read_bytes()
    for s in corpus:
        assert len(s.source) >= 1
        assert all(t and not any(c.isspace() for c in t) for t in s.source + s.target)


M2_MINIMAL = "S a b\nA 1 2|||R:X|||c|||REQUIRED|||-NONE-|||0\n\n"
M2_NOOP = "S a b\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n\n"
M2_TWO_ANNOTATORS = (
    "S i goes home\n"
    "A 1 2|||R:VERB|||go|||REQUIRED|||-NONE-|||0\n"
    "A 0 1|||R:PRON|||I|||REQUIRED|||-NONE-|||1\n"
    "A 1 2|||R:VERB|||went|||REQUIRED|||-NONE-|||1\n"
    "\n"
)


def test_load_m2_minimal(tmp_path):
    recs = load_m2(write(tmp_path, "g.m2", M2_MINIMAL))
    assert len(recs) == 1
    assert recs[0].source == ("a", "b")
    assert recs[0].edits == {0: (GoldEdit(1, 2, ("c",)),)}


def test_load_m2_noop_yields_empty_list(tmp_path):
    recs = load_m2(write(tmp_path, "g.m2", M2_NOOP))
    assert recs[0].edits == {0: ()}


def test_load_m2_two_annotators(tmp_path):
    # Hand-checked against the M2 layout: one edit for annotator 0 and two
    # for annotator 1, kept separate.
    recs = load_m2(write(tmp_path, "g.m2", M2_TWO_ANNOTATORS))
    assert recs[0].annotators() == [0, 1]
    assert recs[0].edits[0] == (GoldEdit(1, 2, ("go",)),)
    assert recs[0].edits[1] == (GoldEdit(0, 1, ("I",)), GoldEdit(1, 2, ("went",)))


def test_load_m2_deletion_and_insertion(tmp_path):
    text = (
        "S a b c\n"
        "A 1 2|||U:DET|||-NONE-|||REQUIRED|||-NONE-|||0\n"
        "A 3 3|||M:PUNCT|||. .|||REQUIRED|||-NONE-|||0\n"
        "\n"
    )
    recs = load_m2(write(tmp_path, "g.m2", text))
    assert recs[0].edits[0] == (GoldEdit(1, 2, ()), GoldEdit(3, 3, (".", ".")))


@pytest.mark.parametrize(
    "bad",
    [
        "S a\nA 1|||R:X|||c|||REQUIRED|||-NONE-|||0\n",  # bad span
        "S a\nA 0 1|||R:X|||c|||0\n",  # too few fields
        "S a\nA 0 5|||R:X|||c|||REQUIRED|||-NONE-|||0\n",  # span outside sentence
        "A 0 1|||R:X|||c|||REQUIRED|||-NONE-|||0\n",  # edit before S
        "Q nonsense\n",
    ],
)
def test_load_m2_errors(tmp_path, bad):
    with pytest.raises(CorpusFormatError):
        load_m2(write(tmp_path, "bad.m2", bad))


def test_m2_round_trip(tmp_path):
    recs = load_m2(write(tmp_path, "g.m2", M2_MINIMAL + M2_NOOP + M2_TWO_ANNOTATORS))
    out = tmp_path / "out.m2"
    save_m2(recs, out)
    again = load_m2(out)
    assert [(r.source, r.edits) for r in again] == [(r.source, r.edits) for r in recs]
