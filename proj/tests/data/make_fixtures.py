#!/usr/bin/env python3
"""Regenerates the small test fixtures in this directory."""

import csv
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20160101)

TOPICS = {
    "boot": ["grub", "boot", "kernel", "reinstall", "partition", "disk", "menu", "restart"],
    "net": ["wifi", "driver", "card", "network", "firmware", "router", "connect", "module"],
    "sound": ["sound", "audio", "alsa", "pulse", "speaker", "mute", "volume", "mixer"],
    "pkg": ["apt", "install", "package", "update", "upgrade", "repository", "sudo", "remove"],
}
FILLER = ["the", "a", "it", "is", "you", "i", "to", "and", "try", "use", "then", "now", "yes", "no", "thanks"]
SYSTEMS = ["c_tfidf", "dual_encoder", "lstm", "r_tfidf", "vhred"]


def sentence(topic, length):
    words = []
    for _ in range(length):
        pool = TOPICS[topic] if rng.random() < 0.55 else FILLER
        words.append(rng.choice(pool))
    return " ".join(words)


def perturb(text, keep):
    words = text.split()
    out = [w if rng.random() < keep else rng.choice(FILLER + sum(TOPICS.values(), [])) for w in words]
    if rng.random() < 0.3:
        out = out[: max(1, len(out) - rng.randint(1, 3))]
    return " ".join(out)


def main():
    examples = []
    topics = list(TOPICS)
    for i in range(20):
        topic = topics[i % len(topics)]
        context = [sentence(topic, rng.randint(4, 9)) + "?" for _ in range(rng.randint(1, 3))]
        truth = sentence(topic, rng.randint(3, 12))
        cands = {
            "c_tfidf": perturb(truth, 0.5),
            "dual_encoder": perturb(truth, 0.7),
            "lstm": " ".join(rng.choice(FILLER) for _ in range(rng.randint(2, 5))),
            "r_tfidf": sentence(topics[(i + 1) % len(topics)], rng.randint(3, 10)),
            "vhred": perturb(truth, 0.85) + (" !" if i % 3 == 0 else ""),
        }
        examples.append({"id": str(i + 1), "context": context, "response": truth, "candidates": cands})
    with open(HERE / "dataset20.jsonl", "w") as f:
        for ex in examples:
            f.write(json.dumps(ex, sort_keys=True) + "\n")

    # quality drives the annotators; the last annotator rates at random
    quality = {}
    for ex in examples:
        truth = set(ex["response"].split())
        for name, text in ex["candidates"].items():
            words = text.split()
            overlap = len([w for w in words if w in truth]) / max(1, len(words))
            quality[(ex["id"], name)] = 1 + 4 * overlap
    rows = []
    for a in range(8):
        ann = f"ann{a + 1}"
        for (ex_id, name), q in sorted(quality.items()):
            if a < 7:
                score = round(q + rng.gauss(0, 0.6))
            else:
                score = rng.randint(1, 5)
            rows.append([ex_id, name, ann, min(5, max(1, score))])
    with open(HERE / "ratings20.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["example_id", "candidate_id", "annotator_id", "score"])
        w.writerows(rows)

    # clustered toy embeddings: words of one topic share a centre
    dim = 8
    vocab = sorted(set(FILLER + sum(TOPICS.values(), [])))
    centres = {t: [rng.gauss(0, 1) for _ in range(dim)] for t in TOPICS}
    centres["filler"] = [rng.gauss(0, 0.3) for _ in range(dim)]
    with open(HERE / "toy_embeddings.txt", "w") as f:
        f.write(f"{len(vocab)} {dim}\n")
        for word in vocab:
            topic = next((t for t, ws in TOPICS.items() if word in ws), "filler")
            vec = [c + rng.gauss(0, 0.5) for c in centres[topic]]
            f.write(word + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")

    with open(HERE / "synonyms.txt", "w") as f:
        f.write("# head: synonym, synonym\n")
        f.write("sound: audio\naudio: sound\ninstall: setup\nrestart: reboot\nremove: uninstall\n")

    with open(HERE / "stopwords.txt", "w") as f:
        f.write("# small stoplist for the ablation fixture\n")
        for w in ["the", "a", "it", "is", "you", "i", "to", "and", "?", "!"]:
            f.write(w + "\n")


if __name__ == "__main__":
    main()
