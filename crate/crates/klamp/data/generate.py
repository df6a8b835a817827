#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpus in this directory.

Five users with overlapping interests browse a small set of news pages over
about two months. Output is deterministic for a given SEED.

    python3 generate.py
"""

import json
import random
from pathlib import Path

SEED = 20231114
T0 = 1_700_000_000
DAY = 86_400
HERE = Path(__file__).resolve().parent

GAZETTEER = [
    ("apple", "Apple Inc."),
    ("apple inc", "Apple Inc."),
    ("tim cook", "Tim Cook"),
    ("macbook", "Macbook"),
    ("macos", "macOS"),
    ("iphone", "iPhone"),
    ("apple tv", "Apple TV"),
    ("steve jobs", "Steve Jobs"),
    ("machine learning", "Machine Learning"),
    ("ml", "Machine Learning"),
    ("supervised learning", "Supervised Learning"),
    ("optimization", "Optimization"),
    ("neural network", "Neural Network"),
    ("gpt-4", "GPT-4"),
    ("openai", "OpenAI"),
    ("google bard", "Google Bard"),
    ("microsoft copilot", "Microsoft Copilot"),
    ("elon musk", "Elon Musk"),
    ("animation", "Animation"),
    ("studio ghibli", "Studio Ghibli"),
    ("ghibli", "Studio Ghibli"),
    ("pixar", "Pixar Animation Studios"),
    ("walt disney", "Walt Disney"),
    ("disney", "Walt Disney"),
    ("hayao miyazaki", "Hayao Miyazaki"),
    ("baseball", "Baseball"),
    ("mlb", "Major League Baseball"),
    ("major league baseball", "Major League Baseball"),
    ("yankees", "New York Yankees"),
    ("new york yankees", "New York Yankees"),
    ("world series", "World Series"),
    ("hdtv", "HDTV"),
    ("dvd", "DVD"),
    ("home theater", "Home Theater"),
]

ALLOWED = ["news.example.com", "techdaily.example.org", "sportswire.example.net", "screen.example.com"]
OFFSITE = "shop.example.biz"

TOPICS = {
    "apple": {
        "domain": "techdaily.example.org",
        "queries": ["tim cook", "apple", "macbook air review", "macos update", "iphone sales",
                    "tim cook leadership", "apple tv price", "steve jobs legacy"],
        "pages": [
            ("Tim Cook Leadership", "A new profile examines how Apple CEO Tim Cook shaped the company after Steve Jobs."),
            ("MacBook Air Review", "The thinnest Macbook gets a faster chip and longer battery life; macOS runs smoothly."),
            ("macOS Sonoma Arrives", "Apple ships macOS with widgets on the desktop and a new game mode for the Macbook line."),
            ("iPhone Sales Slow", "Apple reports softer iPhone demand while Tim Cook points to services growth."),
            ("Apple TV Gets Cheaper", "The Apple TV box drops in price and adds HDTV upscaling for older sets."),
            ("Remembering Steve Jobs", "Colleagues recall how Steve Jobs built Apple and hired Tim Cook."),
        ],
    },
    "ml": {
        "domain": "news.example.com",
        "queries": ["machine learning basics", "supervised learning examples", "optimization algorithms",
                    "neural network tutorial", "gpt-4 release", "openai news", "google bard vs gpt-4"],
        "pages": [
            ("Machine Learning in Plain Words", "Supervised learning fits a model to labeled examples; optimization does the rest."),
            ("Why Optimization Matters", "Gradient based optimization trains every neural network behind modern machine learning."),
            ("OpenAI Releases GPT-4", "OpenAI says GPT-4 scores higher on exams; Google Bard and Microsoft Copilot respond."),
            ("Chatbots Compared", "Google Bard, GPT-4 and Microsoft Copilot answer the same questions side by side."),
            ("Elon Musk on AI", "Elon Musk repeats warnings about OpenAI and machine learning safety."),
            ("A Neural Network From Scratch", "Build a small neural network and train it with supervised learning."),
        ],
    },
    "animation": {
        "domain": "screen.example.com",
        "queries": ["studio ghibli movies", "pixar new film", "walt disney history", "hayao miyazaki",
                    "best animation 2023", "ghibli museum"],
        "pages": [
            ("Studio Ghibli Retrospective", "From Totoro to Spirited Away, Hayao Miyazaki defined Studio Ghibli animation."),
            ("Pixar Returns to Originals", "Pixar bets on new stories after sequels; Walt Disney executives are watching."),
            ("The Walt Disney Archives", "A tour of Walt Disney sketches and the early days of feature animation."),
            ("Miyazaki's Last Film", "Hayao Miyazaki comes out of retirement again; Ghibli fans celebrate."),
            ("Animation on DVD", "Collectors still buy animation on DVD; Pixar and Disney box sets lead sales."),
        ],
    },
    "baseball": {
        "domain": "sportswire.example.net",
        "queries": ["yankees score", "mlb standings", "world series schedule", "new york yankees trade",
                    "baseball stats"],
        "pages": [
            ("Yankees Win Late", "The New York Yankees rally in the ninth; MLB standings tighten."),
            ("MLB Trade Deadline", "Major League Baseball clubs make moves; the Yankees add a reliever."),
            ("World Series Preview", "Baseball writers pick favorites for the World Series."),
            ("Stats That Matter", "A guide to modern baseball stats used across MLB front offices."),
        ],
    },
    "home": {
        "domain": "screen.example.com",
        "queries": ["hdtv deals", "best dvd player", "home theater setup", "apple tv vs roku"],
        "pages": [
            ("HDTV Buying Guide", "How to choose an HDTV for a home theater; Apple TV and DVD players compared."),
            ("DVD Is Not Dead", "Why some viewers keep a DVD shelf next to the HDTV."),
            ("Home Theater on a Budget", "Speakers, an HDTV and an Apple TV box for a small living room."),
        ],
    },
}

USERS = {
    "u01": ["apple", "ml", "animation", "home", "baseball"],
    "u02": ["apple", "ml", "apple", "ml"],
    "u03": ["animation", "home", "animation", "apple"],
    "u04": ["baseball", "home", "baseball", "ml"],
    "u05": ["ml", "animation", "baseball", "apple"],
}

SESSIONS_PER_USER = 14


def slug(title):
    return "".join(c.lower() if c.isalnum() else "-" for c in title).strip("-")


def page(topic, title, text, domain=None):
    d = domain or TOPICS[topic]["domain"]
    return {"url": f"https://{d}/{topic}/{slug(title)}", "title": title, "text": text}


def main():
    rng = random.Random(SEED)
    events = []
    for user, interests in USERS.items():
        t = T0 + rng.randrange(0, DAY)
        for s in range(SESSIONS_PER_USER):
            topic = rng.choice(interests)
            spec = TOPICS[topic]
            n = rng.randint(2, 4)
            clicky = s % 7 != 3  # a few sessions without any click
            for i in range(n):
                query = rng.choice(spec["queries"])
                if rng.random() < 0.08:
                    query = f"{query} {user} notes"  # too rare to survive k-anonymity
                ev = {"user": user, "ts": t, "query": query}
                if clicky and rng.random() < 0.8:
                    title, text = rng.choice(spec["pages"])
                    offsite = rng.random() < 0.1
                    ev["click"] = page(topic, title, text, OFFSITE if offsite else None)
                events.append(ev)
                t += rng.randint(40, 600)
            t += rng.randint(2 * DAY, 5 * DAY) + rng.randint(0, DAY // 2)
    events.sort(key=lambda e: (e["ts"], e["user"]))

    with open(HERE / "events.jsonl", "w") as f:
        for ev in events:
            f.write(json.dumps(ev, ensure_ascii=False) + "\n")
    with open(HERE / "gazetteer.tsv", "w") as f:
        f.write("# alias<TAB>canonical entity\n")
        for alias, canonical in GAZETTEER:
            f.write(f"{alias}\t{canonical}\n")
    with open(HERE / "allowlist.txt", "w") as f:
        f.write("# domains whose clicks are kept\n")
        for d in ALLOWED:
            f.write(d + "\n")
    with open(HERE / "search.jsonl", "w") as f:
        seen = set()
        for topic, spec in TOPICS.items():
            for title, text in spec["pages"]:
                if title not in seen:
                    seen.add(title)
                    f.write(json.dumps({"title": title, "snippet": text}) + "\n")


if __name__ == "__main__":
    main()
