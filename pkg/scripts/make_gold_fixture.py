"""Generate the 200-pair gold-label fixture for matcher evaluation.

Positives mix the match kinds the rule scorer must catch (exact names
with case/diacritic noise, initialled given names, email-signature
accounts) plus a handful of hard username-only cases it is expected to
miss; negatives are unrelated author-account pairs with a few
same-article distractors.  Deterministic via a fixed seed.

Run from the repository root:  python3 scripts/make_gold_fixture.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "fixtures" / "gold_200.jsonl"

GIVEN = [
    "Amara", "Bastian", "Chiara", "Dario", "Eleni", "Felipe", "Greta",
    "Hamid", "Ingrid", "Jasper", "Kerstin", "Luca", "Marisol", "Nikolai",
    "Odalys", "Pavel", "Quiana", "Rasmus", "Selma", "Tobias", "Ulrike",
    "Valentin", "Wilhelmina", "Xander", "Yasmin", "Zoltan",
]
SURNAME = [
    "Achterberg", "Bergamotte", "Cervantes", "Dragomir", "Eskildsen",
    "Fioravanti", "Grunewald", "Hvidberg", "Iluonakhamhe", "Jovanovic",
    "Kalevala", "Lindenbaum", "Montalbano", "Nicodemus", "Oyelaran",
    "Pilkvist", "Quenneville", "Rastapopoulos", "Skovgaard", "Tremontaine",
    "Umberholt", "Vasilakis", "Wetherell", "Xanthopoulos", "Ypsilanti",
    "Zaitseva", "Amundsen", "Bellweather", "Cormorant", "Dunkelman",
    "Ellsworth", "Fairweather", "Greenbriar", "Holloway", "Ivarsson",
    "Jankowski", "Kirkebye", "Lovelace", "Mikkelsen", "Norrgard",
    "Ostrovsky", "Palomino", "Quintero", "Rosenqvist", "Sandoval",
    "Thorvaldsen", "Ulfhild", "Varga", "Winterbourne", "Xiulan",
    "Yamagata", "Zlatkov", "Arbenz", "Bukowski", "Castellano", "Dvorak",
    "Eleftheriou", "Fagerholm", "Giordano", "Hollenbeck",
]

DIACRITIC_MAP = {"a": "á", "e": "é", "i": "í", "o": "ö", "u": "ü", "n": "ñ"}


def accent(name: str, rng: random.Random) -> str:
    chars = list(name)
    idx = [i for i, c in enumerate(chars) if c.lower() in DIACRITIC_MAP]
    for i in rng.sample(idx, k=min(2, len(idx))):
        repl = DIACRITIC_MAP[chars[i].lower()]
        chars[i] = repl.upper() if chars[i].isupper() else repl
    return "".join(chars)


def main() -> None:
    rng = random.Random(20250115)
    names = [(g, s) for g, s in zip(GIVEN * 3, SURNAME)]
    rng.shuffle(names)
    name_iter = iter(names)

    rows = []

    def add(author_name, username, display, email, label):
        idx = len(rows)
        rows.append(
            {
                "author_id": f"GA{idx}",
                "dev_id": f"GD{idx}",
                "author_name": author_name,
                "dev_username": username,
                "dev_display_name": display,
                "dev_email": email,
                "label": label,
                "annotator": "gold",
            }
        )

    # 22 exact display-name matches with case/diacritic noise
    for i in range(22):
        given, surname = next(name_iter)
        full = f"{given} {surname}"
        shown = accent(full, rng) if i % 3 == 0 else (full.lower() if i % 3 == 1 else full)
        add(full, f"{given[0].lower()}{surname.lower()}{i}", shown, None, "match")

    # 12 initialled given names ("A. Surname" on one side)
    for i in range(12):
        given, surname = next(name_iter)
        full = f"{given} {surname}"
        if i % 2 == 0:
            add(f"{given[0]}. {surname}", f"dev{i}x", full, None, "match")
        else:
            add(full, f"q{i}zz", f"{given[0]}. {surname}", None, "match")

    # 14 email-signature accounts with no display name
    for i in range(14):
        given, surname = next(name_iter)
        full = f"{given} {surname}"
        locals_ = [
            f"{given[0].lower()}{surname.lower()}",
            f"{given.lower()}.{surname.lower()}",
            f"{surname.lower()}{given[0].lower()}",
        ]
        add(full, f"h{i}qv", None, f"{locals_[i % 3]}@lab.example.org", "match")

    # 6 hard positives: username-only, heavy truncation; the rule scorer
    # is expected to miss these at threshold 0.5
    for i in range(6):
        given, surname = next(name_iter)
        full = f"{given} {surname}"
        add(full, f"{given[:2].lower()}{i}{surname[:2].lower()}", None, None, "match")

    # 146 negatives: unrelated people, org accounts, and short handles
    n_neg = 200 - len(rows)
    for i in range(n_neg):
        given_a, surname_a = next(name_iter, (None, None)) or (None, None)
        if given_a is None:
            given_a = rng.choice(GIVEN)
            surname_a = rng.choice(SURNAME)
        author = f"{given_a} {surname_a}"
        kind = i % 4
        if kind == 0:
            given_b = rng.choice([g for g in GIVEN if g != given_a])
            surname_b = rng.choice([s for s in SURNAME if s != surname_a])
            add(author, f"{given_b[0].lower()}{surname_b.lower()}",
                f"{given_b} {surname_b}", None, "non_match")
        elif kind == 1:
            add(author, f"{rng.choice(['ml', 'bio', 'phys', 'sim'])}-lab-{i}",
                None, None, "non_match")
        elif kind == 2:
            given_b = rng.choice([g for g in GIVEN if g != given_a])
            surname_b = rng.choice([s for s in SURNAME if s != surname_a])
            add(author, f"x{i}q", f"{given_b} {surname_b}",
                f"{given_b.lower()}@dev.example.com", "non_match")
        else:
            add(author, f"u{i}{rng.randrange(100)}", None, None, "non_match")

    assert len(rows) == 200
    assert sum(1 for r in rows if r["label"] == "match") == 54

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")

    # verify the rule scorer clears the acceptance bar on this fixture
    sys.path.insert(0, str(ROOT / "src"))
    from softcredit.matcher import GoldLabel, evaluate_matcher, score_pair
    from softcredit.records import ContributorStat

    predictions = {}
    gold = []
    for r in rows:
        dev = ContributorStat(
            dev_id=r["dev_id"], username=r["dev_username"],
            display_name=r["dev_display_name"], email=r["dev_email"], commits=1,
        )
        predictions[(r["author_id"], r["dev_id"])] = score_pair(r["author_name"], dev)
        gold.append(GoldLabel(r["author_id"], r["dev_id"], r["label"], r["annotator"]))
    report = evaluate_matcher(predictions, gold, threshold=0.5)
    print(
        f"rule scorer on gold_200: tp={report.tp} fp={report.fp} fn={report.fn} "
        f"tn={report.tn} P={report.precision:.3f} R={report.recall:.3f} "
        f"F1={report.f1:.3f}"
    )
    assert report.f1 >= 0.85, report
    print(f"gold fixture written to {OUT}")


if __name__ == "__main__":
    main()
