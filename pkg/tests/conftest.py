import json
import random

import pytest

from tarjama.corpus import Conversation, Message

ARABIC_WORDS = ["مرحبا", "بالعالم", "كتاب", "جميل", "ترجمة", "نص", "سؤال",
                "جواب", "فكرة", "مثال"]
LATIN_WORDS = ["alpha", "beta", "gamma", "delta", "text", "sample", "chunk",
               "token", "queue", "rank"]


def make_conversation(conv_id: str, split: str = "dev",
                      contents: list[tuple[str, str]] = None,
                      category: str = None) -> Conversation:
    contents = contents or [("user", "hello"), ("assistant", "world")]
    messages = [Message(role=role, content=text, index=i)
                for i, (role, text) in enumerate(contents)]
    return Conversation(id=conv_id, split=split, messages=messages,
                        category=category)


def random_text(rng: random.Random, words: list[str], n_words: int,
                sentence_prob: float = 0.2) -> str:
    out = []
    for _ in range(n_words):
        out.append(rng.choice(words))
        if rng.random() < sentence_prob:
            out[-1] += rng.choice(".!?")
    return " ".join(out)


def random_corpus(rng: random.Random, n: int, think_prob: float = 0.3,
                  max_words: int = 30) -> list[Conversation]:
    conversations = []
    for i in range(n):
        contents = [("user", random_text(rng, LATIN_WORDS, rng.randint(1, max_words)))]
        reply = random_text(rng, ARABIC_WORDS, rng.randint(1, max_words))
        if rng.random() < think_prob:
            thought = random_text(rng, LATIN_WORDS, rng.randint(1, max_words))
            reply = f"<think>{thought}</think>{reply}"
        contents.append(("assistant", reply))
        if rng.random() < 0.2:
            contents.insert(0, ("system", "Be helpful."))
        conversations.append(make_conversation(
            f"conv-{i:05d}", split=rng.choice(["train", "dev"]), contents=contents))
    return conversations


def corpus_jsonl(conversations) -> str:
    from tarjama.corpus import conversation_to_dict
    return "".join(json.dumps(conversation_to_dict(c), ensure_ascii=False) + "\n"
                   for c in conversations)


@pytest.fixture
def rng():
    return random.Random(20240817)
