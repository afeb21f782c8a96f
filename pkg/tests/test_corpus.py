import json
import random

import pytest
from hypothesis import given, strategies as st

from tarjama.chunking import ChunkPolicy
from tarjama.cli import build_chunk_plan
from tarjama.corpus import (Candidate, Conversation, CorpusError,
                            IncompleteUnitSetError, LineError, Message, Part,
                            StructureMismatchError, ThinkSpanError,
                            UnitConsistencyError,
                            decompose, group_units_by_conversation,
                            identity_translate, join_parts, parse_corpus,
                            reconstruct, single_chunk_plan, split_parts,
                            unit_from_dict, unit_to_dict,
                            validate_candidate_structure)
from tarjama.tokenizers import TokenizerSpec

from conftest import corpus_jsonl, make_conversation, random_corpus


def test_parse_minimal_line():
    line = json.dumps({"id": "c1", "split": "dev", "messages": [
        {"role": "user", "content": "hi"}, {"role": "assistant", "content": "ahlan"}]})
    convs = parse_corpus(line)
    assert len(convs) == 1
    assert [m.index for m in convs[0].messages] == [0, 1]
    assert convs[0].messages[1].content == "ahlan"


def test_parse_duplicate_id_cites_both_lines():
    rows = []
    for i in range(8):
        rows.append(json.dumps({"id": f"c{i}", "split": "s", "messages": [
            {"role": "user", "content": "x"}]}))
    rows[2] = json.dumps({"id": "dup", "split": "s", "messages": [
        {"role": "user", "content": "x"}]})
    rows[6] = json.dumps({"id": "dup", "split": "s", "messages": [
        {"role": "user", "content": "y"}]})
    with pytest.raises(CorpusError, match=r"lines 3 and 7"):
        parse_corpus("\n".join(rows))


def test_parse_thousand_lines_order_preserved(rng):
    conversations = random_corpus(rng, 1000)
    parsed = parse_corpus(corpus_jsonl(conversations))
    assert len(parsed) == 1000
    assert [c.id for c in parsed] == [c.id for c in conversations]


def test_parse_missing_field_is_line_scoped():
    bad = json.dumps({"id": "c1", "messages": [{"role": "user", "content": "x"}]})
    with pytest.raises(LineError, match="line 1"):
        parse_corpus(bad)


def test_parse_empty_messages_rejected():
    bad = json.dumps({"id": "c1", "split": "s", "messages": []})
    with pytest.raises(LineError):
        parse_corpus(bad)


def test_parse_unpaired_surrogate_rejected():
    bad = '{"id": "c1", "split": "s", "messages": [{"role": "user", "content": "\\ud800"}]}'
    with pytest.raises(LineError, match="surrogate"):
        parse_corpus(bad)


def test_parse_lenient_skips_and_logs(caplog):
    good = json.dumps({"id": "ok", "split": "s",
                       "messages": [{"role": "user", "content": "x"}]})
    with caplog.at_level("WARNING"):
        convs = parse_corpus("not json\n" + good, strict=False)
    assert [c.id for c in convs] == ["ok"]
    assert any("line 1" in r.message for r in caplog.records)


def test_split_parts_plain():
    assert split_parts("hello") == [Part("visible", "hello")]


def test_split_parts_one_span():
    assert split_parts("<think>A</think>B") == [Part("think", "A"), Part("visible", "B")]


def test_split_parts_roundtrip_trailing_think():
    content = "X<think>Y</think>"
    parts = split_parts(content)
    assert parts == [Part("visible", "X"), Part("think", "Y")]
    assert join_parts(parts) == content


def test_split_parts_empty_content_yields_one_part():
    assert split_parts("") == [Part("visible", "")]


@pytest.mark.parametrize("content", ["<think>a", "a</think>", "<think>a</think></think>"])
def test_split_parts_unbalanced(content):
    with pytest.raises(ThinkSpanError):
        split_parts(content)


def test_split_parts_nested_rejected():
    with pytest.raises(ThinkSpanError, match="nested"):
        split_parts("<think>a<think>b</think></think>")


@st.composite
def balanced_content(draw):
    plain = st.text(max_size=40).map(
        lambda s: s.replace("<think>", " ").replace("</think>", " "))
    pieces = draw(st.lists(st.tuples(st.sampled_from(["think", "visible"]), plain),
                           max_size=6))
    return join_parts([Part(kind, text) for kind, text in pieces])


@given(balanced_content())
def test_split_join_roundtrip(content):
    assert join_parts(split_parts(content)) == content


def test_decompose_two_messages_single_chunks():
    conv = make_conversation("c", contents=[("user", "hi"), ("assistant", "ok")])
    units = decompose(conv, single_chunk_plan(conv))
    assert len(units) == 2
    assert all(u.chunk_count == 1 for u in units)
    assert [u.message_index for u in units] == [0, 1]


def test_decompose_think_then_visible():
    conv = make_conversation("c", contents=[("assistant", "<think>T</think>R")])
    units = decompose(conv, single_chunk_plan(conv))
    assert [(u.part_type, u.source_text) for u in units] == [("think", "T"), ("visible", "R")]
    assert [u.part_index for u in units] == [0, 1]


def test_decompose_three_chunks():
    conv = make_conversation("c", contents=[("user", "abcdef")])
    units = decompose(conv, {(0, 0): ["ab", "cd", "ef"]})
    assert [u.chunk_index for u in units] == [0, 1, 2]
    assert all(u.chunk_count == 3 for u in units)


def test_decompose_missing_part_errors():
    conv = make_conversation("c", contents=[("user", "hi"), ("assistant", "ok")])
    with pytest.raises(UnitConsistencyError, match="missing part"):
        decompose(conv, {(0, 0): ["hi"]})


def test_decompose_plan_must_concatenate():
    conv = make_conversation("c", contents=[("user", "abc")])
    with pytest.raises(UnitConsistencyError, match="concatenate"):
        decompose(conv, {(0, 0): ["ab", "x"]})


def test_reconstruct_identity_roundtrip():
    conv = make_conversation("c", contents=[
        ("system", "Be brief."),
        ("user", "hello there"),
        ("assistant", "<think>plan</think>answer"),
    ])
    units = [identity_translate(u) for u in decompose(conv, single_chunk_plan(conv))]
    rebuilt = reconstruct(units, split=conv.split)
    assert rebuilt == conv


def test_reconstruct_order_independent():
    conv = make_conversation("c", contents=[("user", "abcdef"), ("assistant", "xyz")])
    units = [identity_translate(u)
             for u in decompose(conv, {(0, 0): ["ab", "cd", "ef"], (1, 0): ["xyz"]})]
    shuffled = units[:]
    random.Random(7).shuffle(shuffled)
    assert reconstruct(shuffled, split=conv.split) == reconstruct(units, split=conv.split)


def test_reconstruct_missing_chunk_names_tuple():
    conv = make_conversation("c", contents=[("user", "abcdef")])
    units = [identity_translate(u) for u in decompose(conv, {(0, 0): ["ab", "cd", "ef"]})]
    del units[1]
    with pytest.raises(IncompleteUnitSetError) as err:
        reconstruct(units)
    assert (0, 0, 1) in err.value.missing


def test_reconstruct_conflicting_chunk_count():
    conv = make_conversation("c", contents=[("user", "abcd")])
    units = [identity_translate(u) for u in decompose(conv, {(0, 0): ["ab", "cd"]})]
    units[1].chunk_count = 3
    with pytest.raises(UnitConsistencyError, match="chunk_count"):
        reconstruct(units)


@given(st.data())
def test_roundtrip_property_with_chunked_plans(data):
    plain = st.text(max_size=60).map(
        lambda s: s.replace("<think>", " ").replace("</think>", " "))
    n_msgs = data.draw(st.integers(1, 4))
    contents = []
    for i in range(n_msgs):
        role = data.draw(st.sampled_from(["system", "user", "assistant", "tool"]))
        body = data.draw(plain)
        if data.draw(st.booleans()):
            body = f"<think>{data.draw(plain)}</think>{body}"
        contents.append((role, body))
    conv = make_conversation("prop", contents=contents)
    policy = ChunkPolicy(target_tokens=6, window_tokens=2, hard_cap_tokens=7)
    plan = build_chunk_plan(conv, TokenizerSpec.builtin(), policy)
    units = [identity_translate(u) for u in decompose(conv, plan)]
    assert reconstruct(units, split=conv.split) == conv


def test_unit_dict_roundtrip():
    conv = make_conversation("c")
    unit = decompose(conv, single_chunk_plan(conv))[0]
    assert unit_from_dict(unit_to_dict(unit)) == unit
    translated = identity_translate(unit, "mock")
    restored = unit_from_dict(unit_to_dict(translated))
    assert restored == translated


def test_group_units_preserves_first_seen_order():
    a = make_conversation("a")
    b = make_conversation("b")
    units = []
    for conv in (b, a):
        units.extend(identity_translate(u)
                     for u in decompose(conv, single_chunk_plan(conv)))
    grouped = group_units_by_conversation(units)
    assert list(grouped) == ["b", "a"]


def test_candidate_structure_validation():
    source = make_conversation("c", contents=[("user", "q"), ("assistant", "<think>t</think>a")])
    good = Candidate("c", "m", make_conversation(
        "c", contents=[("user", "س"), ("assistant", "<think>ف</think>ج")]))
    validate_candidate_structure(source, good)
    wrong_parts = Candidate("c", "m", make_conversation(
        "c", contents=[("user", "س"), ("assistant", "ج")]))
    with pytest.raises(StructureMismatchError):
        validate_candidate_structure(source, wrong_parts)
    wrong_role = Candidate("c", "m", make_conversation(
        "c", contents=[("user", "س"), ("user", "<think>ف</think>ج")]))
    with pytest.raises(StructureMismatchError):
        validate_candidate_structure(source, wrong_role)


def test_conversation_requires_contiguous_indices():
    with pytest.raises(ValueError):
        Conversation(id="x", split="s", messages=[
            Message(role="user", content="a", index=1)])
