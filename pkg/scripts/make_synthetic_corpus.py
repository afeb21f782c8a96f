#!/usr/bin/env python3
"""Generate a seeded synthetic conversation corpus for pipeline experiments.

Each conversation gets a split label, an optional category label (for
stratified sampling runs), and a mix of plain and <think>-bearing
assistant replies.
"""

import argparse
import random

from tarjama.corpus import Conversation, Message, write_corpus

ARABIC = ["مرحبا", "بالعالم", "كتاب", "جميل", "ترجمة", "نص", "سؤال", "جواب",
          "فكرة", "مثال", "علم", "رياضيات"]
LATIN = ["explain", "the", "result", "compute", "value", "function", "data",
         "model", "prove", "lemma", "sort", "array"]
SPLITS = ["everyday_convs", "reasoning_think", "toolcalls_no_think"]
CATEGORIES = ["code", "science", "math"]


def words(rng, vocab, n, sentence_prob=0.25):
    out = []
    for _ in range(n):
        out.append(rng.choice(vocab))
        if rng.random() < sentence_prob:
            out[-1] += rng.choice(".!?")
    return " ".join(out)


def build(rng: random.Random, index: int, think_prob: float,
          max_words: int) -> Conversation:
    contents = []
    if rng.random() < 0.3:
        contents.append(("system", "You are a careful assistant."))
    for _ in range(rng.randint(1, 3)):
        contents.append(("user", words(rng, LATIN, rng.randint(3, max_words))))
        reply = words(rng, ARABIC, rng.randint(3, max_words))
        if rng.random() < think_prob:
            reply = f"<think>{words(rng, LATIN, rng.randint(3, max_words))}</think>{reply}"
        contents.append(("assistant", reply))
    messages = [Message(role=r, content=c, index=i)
                for i, (r, c) in enumerate(contents)]
    return Conversation(
        id=f"synth-{index:06d}",
        split=rng.choice(SPLITS),
        messages=messages,
        category=rng.choices(CATEGORIES, weights=[1, 1, 2])[0],
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--num", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--think-prob", type=float, default=0.35)
    parser.add_argument("--max-words", type=int, default=40)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    corpus = [build(rng, i, args.think_prob, args.max_words)
              for i in range(args.num)]
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} conversations to {args.out}")


if __name__ == "__main__":
    main()
