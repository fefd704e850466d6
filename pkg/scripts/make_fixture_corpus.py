"""Generate the bundled 25-pair fixture corpus and verify its design.

Every number the acceptance suite checks (filter audit counts, team
compositions, career-set membership) is fixed by the design tables
below; after writing the corpus the script runs the real pipeline in a
scratch directory and asserts the derived values equal the designed
ones, so the committed corpus is self-consistent by construction.

Run from the repository root:  python3 scripts/make_fixture_corpus.py
"""

from __future__ import annotations

import json
import math
import shutil
import sys
import tempfile
import urllib.parse
from datetime import date, timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "fixtures" / "corpus"

ASOF = date(2025, 1, 15)

# --- pair design -------------------------------------------------------------
# domain: H(ealth)/L(ife)/P(hysical)/S(ocial); type via source + resolver.

DOMAIN = {
    "H": "Health Sciences",
    "L": "Life Sciences",
    "P": "Physical Sciences",
    "S": "Social Sciences",
}

SURVIVORS = {
    # key: (source, doi, repo, domain, open_access, pub_date, commit_offset_days)
    "P1": ("plos", "10.1371/journal.pone.0200001", ("helix-lab", "gene-scan"), "H", True, date(2019, 6, 15), 45),
    "P2": ("plos", "10.1371/journal.pone.0200002", ("medstat", "cohort-tools"), "H", False, date(2020, 3, 30), 60),
    "P3": ("plos", "10.1371/journal.pone.0200003", ("bioforge", "protein-fold"), "L", True, date(2021, 8, 22), 30),
    "P4": ("plos", "10.1371/journal.pone.0200004", ("ecomod", "soil-sim"), "L", True, date(2018, 12, 1), 85),
    "P5": ("plos", "10.1371/journal.pone.0200005", ("socnet-lab", "survey-kit"), "S", True, date(2019, 10, 18), 10),
    "P6": ("plos", "10.1371/journal.pone.0200006", ("polisci-data", "vote-model"), "S", True, date(2022, 5, 14), 75),
    "J1": ("joss", "10.21105/joss.01001", ("openbio", "seq-align"), "L", True, date(2021, 4, 10), 50),
    "J2": ("joss", "10.21105/joss.01002", ("civics-code", "policy-sim"), "S", True, date(2020, 9, 5), 20),
    "J3": ("joss", "10.21105/joss.01003", ("urban-lab", "city-flows"), "S", False, date(2022, 1, 20), 65),
    "X1": ("softwarex", "10.1016/j.softx.2021.100601", ("quantlab", "spin-mc"), "P", True, date(2021, 11, 2), 40),
    "W1": ("pwc", "10.48550/arXiv.2007.01001", ("deepphys", "flux-net"), "P", True, date(2020, 7, 7), 15),
    "W2": ("pwc", "10.48550/arXiv.2102.01002", ("astro-ml", "nebula-cls"), "P", False, date(2021, 2, 11), 35),
    "W3": ("pwc", "10.48550/arXiv.2209.01003", ("hep-tools", "collider-ml"), "P", True, date(2022, 9, 9), 55),
    "W4": ("pwc", "10.48550/arXiv.1903.01004", ("clinlab", "trial-parse"), "H", True, date(2019, 3, 25), 70),
    "W5": ("pwc", "10.48550/arXiv.2011.01005", ("genomics-x", "var-call"), "L", False, date(2020, 11, 30), 25),
}

# pwc pairs resolved to journal versions (become research articles)
RESOLVER_MAP = {
    "10.48550/arXiv.1903.01004": "10.1093/gigascience/giz0404",
    "10.48550/arXiv.2011.01005": "10.1093/bioinformatics/btaa0505",
}

REMOVED = {
    # key: (source, doi, repo, n_authors, citations, commit_offset, languages)
    "J4": ("joss", "10.21105/joss.01004", ("tinytools", "two-author"), 2, 4, 30, {"Python": 900}),
    "X2": ("softwarex", "10.1016/j.softx.2021.100602", ("dataonly", "csv-dump"), 4, 3, 20, {"Markdown": 2000, "CSV": 50000}),
    "P8": ("plos", "10.1371/journal.pone.0200008", ("zerocite", "quiet-code"), 4, 0, 40, {"Python": 3000}),
    "P9": ("plos", "10.1371/journal.pone.0200009", ("notebooks", "nb-analysis"), 4, 2, 25, {"Jupyter Notebook": 90000, "Markdown": 1200}),
    "W6": ("pwc", "10.48550/arXiv.2001.01006", ("stale-lab", "old-model"), 4, 0, 200, {"Python": 1500}),
    "W7": ("pwc", "10.48550/arXiv.2105.01007", ("late-lab", "updated-code"), 4, 6, 120, {"Python": 2500}),
    "W8": ("pwc", "10.48550/arXiv.1907.01008", ("later-lab", "long-tail"), 5, 9, 365, {"C++": 8000}),
    "W9": ("pwc", "10.48550/arXiv.2203.01009", ("bigteam", "mega-pipeline"), 12, 11, 30, {"Python": 7000}),
}
REMOVED_DATES = {
    "J4": date(2021, 7, 1), "X2": date(2022, 3, 5), "P8": date(2020, 8, 9),
    "P9": date(2021, 1, 12), "W6": date(2020, 1, 25), "W7": date(2021, 5, 3),
    "W8": date(2019, 7, 14), "W9": date(2022, 3, 21),
}

# one PLOS article naming two repositories: both pairs fall to one-to-one
SHARED_DOI = "10.1371/journal.pone.0200007"
SHARED_REPOS = [("sharedoi", "repo-a"), ("sharedoi", "repo-b")]
SHARED_DATE = date(2021, 6, 6)

UNOFFICIAL_DOI = "10.48550/arXiv.2301.09999"

EXPECTED_FILTER_AUDIT = {
    "one_to_one": 2,
    "code_files": 2,
    "citations": 2,
    "commit_window": 2,
    "team_size": 2,
    "confidence": 3,
}

# --- career author design -------------------------------------------------------
# (category, most-common domain key, most-common type, most-common position)

CAREER = {
    "N1": ("Irene Vasquez", "none", "H", "research article", "middle"),
    "N2": ("Omar Haddad", "none", "L", "research article", "middle"),
    "N3": ("Petra Lindqvist", "none", "P", "preprint", "last"),
    "N4": ("Sana Okafor", "none", "S", "software article", "first"),
    "N5": ("Dmitri Volkov", "none", "P", "preprint", "middle"),
    "N6": ("Lucia Ferraro", "none", "S", "research article", "last"),
    "A1": ("Nadia Borowski", "any", "H", "research article", "middle"),
    "A2": ("Henrik Dalgaard", "any", "L", "research article", "first"),
    "A3": ("Yuki Tanabe", "any", "P", "preprint", "middle"),
    "A4": ("Camille Roussel", "any", "S", "software article", "last"),
    "A5": ("Mateo Ibarra", "any", "P", "preprint", "middle"),
    "A6": ("Farah Nazari", "any", "L", "software article", "first"),
    "M1": ("Tomas Krejci", "majority", "H", "research article", "last"),
    "M2": ("Alba Quintana", "majority", "L", "research article", "middle"),
    "M3": ("Ewan Galbraith", "majority", "P", "preprint", "first"),
    "M4": ("Priya Raghunathan", "majority", "S", "research article", "first"),
    "M5": ("Jonas Eriksen", "majority", "P", "software article", "middle"),
    "M6": ("Rosa Delacruz", "majority", "S", "research article", "middle"),
    "W1a": ("Viktor Malinov", "always", "H", "research article", "first"),
    "W2a": ("Leila Amrani", "always", "L", "research article", "last"),
    "W3a": ("Stefan Brandt", "always", "P", "preprint", "middle"),
    "W4a": ("Tess Adeyemi", "always", "S", "software article", "middle"),
    "W5a": ("Marco Bellini", "always", "P", "preprint", "middle"),
    "W6a": ("Anya Sorokina", "always", "L", "software article", "last"),
    # h-index outliers, trimmed by the 3rd/97th percentile rule
    "O1": ("Felix Trumbo", "none", "P", "research article", "middle"),
    "O2": ("Greta Vandermeer", "none", "S", "research article", "middle"),
}

# roster per surviving pair: first, middles (in order), last
ROSTER = {
    "P1": ["W1a", "N1", "A1", "M2", "O1", "M1"],
    "P2": ["F1", "N1", "A1", "W1a", "O2", "M1"],
    "P3": ["A2", "N2", "A1", "A6", "W2a"],
    "P4": ["A2", "N2", "M2", "O1", "W2a"],
    "P5": ["M4", "N4", "A5", "M6", "N6"],
    "P6": ["M4", "A3", "A4", "M6", "W4a", "O2", "N6"],
    "J1": ["A6", "A2", "M5", "W6a"],
    "J2": ["N4", "N6", "W4a", "A4"],
    "J3": ["N4", "M4", "M6", "W4a", "A4"],
    "X1": ["A6", "N3", "M5", "W5a", "W6a", "F2"],
    "W1": ["M3", "N5", "A3", "W3a", "W5a", "O2", "N3"],
    "W2": ["M3", "N5", "A5", "W3a", "O1", "N3"],
    "W3": ["F3", "N5", "A3", "A5", "M3", "M5", "W3a", "W5a", "F4"],
    "W4": ["W1a", "N1", "M1", "F5"],
    "W5": ["F6", "N2", "M2", "W2a", "W6a"],
}

# pairs where each career author committed code
CODED = {
    "A1": ["P1"], "A2": ["P3"], "A3": ["W1"], "A4": ["J2"], "A5": ["W3"],
    "A6": ["J1"],
    "M1": ["P1", "P2"], "M2": ["P4", "W5"], "M3": ["W1", "W3"],
    "M4": ["P5", "P6"], "M5": ["J1", "X1"], "M6": ["P5", "P6"],
    "W1a": ["P1", "P2", "W4"], "W2a": ["P3", "P4", "W5"],
    "W3a": ["W1", "W2", "W3"], "W4a": ["P6", "J2", "J3"],
    "W5a": ["X1", "W1", "W3"], "W6a": ["J1", "X1", "W5"],
}

# expected per-pair composition: (cc_a, cc_na); totals come from rosters
EXPECTED_TEAMS = {
    "P1": (3, 1), "P2": (2, 2), "P3": (2, 0), "P4": (2, 1), "P5": (2, 0),
    "P6": (3, 1), "J1": (3, 2), "J2": (2, 0), "J3": (1, 1), "X1": (3, 3),
    "W1": (4, 1), "W2": (1, 0), "W3": (4, 2), "W4": (1, 0), "W5": (3, 2),
}

# near-miss accounts: initials-pattern names score in [0.85, 0.95] and are
# dropped by the 0.97 confidence floor, leaving the account as a CC-NA
INITIALS_DEVS = {
    "P2": ("gh-near-1", "iv-code", "I. Vasquez"),
    "P6": ("gh-near-2", "yt-dev", "Y. Tanabe"),
    "W5": ("gh-near-3", "oh-sci", "O. Haddad"),
}

# unrelated committing accounts per pair (beyond the initials near-misses)
STRANGERS = {
    "P1": 1, "P2": 1, "P4": 1, "J1": 2, "J3": 1, "X1": 3, "W1": 1, "W3": 2,
    "W5": 1,
}

STRANGER_NAMES = [
    ("Beatrix Umlauf", "bx-umlauf"), ("Casper Nygaard", "cnygaard-ops"),
    ("Delia Fontaine", "delia-f"), ("Edmund Szabo", "ed-szabo"),
    ("Freya Bergstrom", "freya-b"), ("Gustav Pellegrini", "gus-pelle"),
    ("Hana Kowalczyk", "hanak-dev"), ("Ivo Marchetti", "ivo-m"),
    ("Jade Thibodeaux", "jade-tx"), ("Kofi Ansah", "kofi-a"),
    ("Lena Petrova", "lenap-ci"), ("Milan Horvat", "milan-h"),
    ("Noor Rahimi", "noor-r"),
]

FILLER_FIRSTLAST = {
    "F1": "Ruben Castellanos", "F2": "Salma Benkirane", "F3": "Teodor Iliev",
    "F4": "Ulla Magnusdottir", "F5": "Vince Okonkwo", "F6": "Wanda Zielinska",
}

SURNAME_POOL = [
    "Abernathy", "Bancroft", "Calloway", "Dunmore", "Ellington", "Fairbanks",
    "Galloway", "Hathaway", "Inglewood", "Jemison", "Kingsley", "Lockhart",
    "Merriweather", "Northcote", "Ossington", "Pemberton", "Quillfeather",
    "Ravensworth", "Silverton", "Thornbury", "Underhill", "Vanterpool",
    "Westerfield", "Yarborough", "Zephyrine", "Ashgrove", "Birchwood",
    "Cedarholm", "Dellwood", "Elmhurst", "Fernsby", "Gladstone", "Hollowell",
    "Ironside", "Juniper", "Kestrel", "Larkspur", "Mossberg", "Nettlefold",
    "Oakhurst", "Pinefield", "Quarry", "Rosewood", "Sagebrush", "Tamarind",
]
GIVEN_POOL = [
    "Adele", "Bruno", "Clara", "Davor", "Elif", "Fabian", "Gwen", "Horace",
    "Isla", "Jorik", "Katya", "Lorcan", "Maeve", "Nils", "Opal", "Pascal",
    "Quinn", "Renata", "Soren", "Talia", "Ulric", "Vera", "Wim", "Xenia",
]


def author_key(code: str) -> str:
    return f"AUTH-{code}"


def dev_key(code: str) -> str:
    return f"gh-{code.lower()}"


def username_for(name: str) -> str:
    parts = name.lower().split()
    return parts[0][0] + parts[-1]


def works_count(code: str) -> int:
    # deterministic spread over [30, 90]
    base = sum(ord(c) for c in code) % 61
    return 30 + base


def h_index_for(code: str) -> int:
    if code == "O1":
        return 2
    if code == "O2":
        return 60
    name, category, domain_key, atype, position = CAREER[code]
    eta = 1.8 + 0.012 * works_count(code)
    eta += {"none": 0.0, "any": -0.30, "majority": -0.55, "always": -0.75}[category]
    eta += {"first": 0.0, "middle": 0.28, "last": 0.55}[position]
    eta += {"H": 0.0, "L": 0.10, "P": -0.12, "S": -0.15}[domain_key]
    eta += {"preprint": 0.0, "research article": 0.15, "software article": 0.20}[atype]
    return max(1, round(math.exp(eta)))


def article_type_of(pair_key: str) -> str:
    source = SURVIVORS[pair_key][0]
    if source in ("joss", "softwarex"):
        return "software article"
    if source == "plos":
        return "research article"
    return "research article" if SURVIVORS[pair_key][1] in RESOLVER_MAP else "preprint"


def citations_for(pair_key: str) -> int:
    source, doi, repo, domain_key, oa, pub, offset = SURVIVORS[pair_key]
    cc_a, cc_na = EXPECTED_TEAMS[pair_key]
    years = (ASOF - pub).days / 365.25
    eta = (
        0.4
        + 0.05 * len(ROSTER[pair_key])
        + 0.12 * cc_a
        + 0.05 * cc_na
        + 0.30 * years
        + 0.20 * (1 if oa else 0)
        + {"H": 0.0, "L": 0.08, "P": 0.15, "S": -0.05}[domain_key]
        + {"preprint": 0.0, "research article": 0.25, "software article": -0.2}[
            article_type_of(pair_key)
        ]
    )
    return max(1, round(math.exp(eta)))


def corresponding_codes(pair_key: str) -> set[str]:
    roster = ROSTER[pair_key]
    chosen = {roster[-1]}
    if pair_key in ("P1", "J1", "W3"):
        chosen.add(roster[0])
    return chosen


def build_author_payload(pair_key: str) -> list[dict]:
    payload = []
    corresponding = corresponding_codes(pair_key)
    for code in ROSTER[pair_key]:
        if code in CAREER:
            name = CAREER[code][0]
            h = h_index_for(code)
            works = works_count(code)
        else:
            name = FILLER_FIRSTLAST[code]
            h = 4 + (sum(ord(c) for c in code) % 9)
            works = 12 + (sum(ord(c) for c in code) % 30)
        payload.append(
            {
                "author_id": author_key(code),
                "display_name": name,
                "is_corresponding": code in corresponding,
                "h_index": h,
                "works_count": works,
            }
        )
    return payload


def filler_authors(prefix: str, n: int) -> list[dict]:
    payload = []
    for i in range(n):
        given = GIVEN_POOL[(hash_stable(prefix) + i * 7) % len(GIVEN_POOL)]
        surname = SURNAME_POOL.pop()
        payload.append(
            {
                "author_id": f"AUTH-{prefix}-{i}",
                "display_name": f"{given} {surname}",
                "is_corresponding": i == n - 1,
                "h_index": 3 + (i * 5 + len(prefix)) % 14,
                "works_count": 10 + (i * 9 + len(prefix)) % 40,
            }
        )
    return payload


def hash_stable(text: str) -> int:
    return sum(ord(c) * (i + 1) for i, c in enumerate(text))


def commit_stats(seed_text: str, scale: int) -> tuple[int, int, int]:
    h = hash_stable(seed_text)
    commits = scale + h % 17
    additions = commits * (20 + h % 31)
    deletions = 10 + (commits * (3 + h % 7)) // 2
    return commits, additions, deletions


def build_repo_payload(pair_key: str) -> dict:
    source, doi, (owner, name), domain_key, oa, pub, offset = SURVIVORS[pair_key]
    last_commit = pub + timedelta(days=offset)
    if pair_key == "W2":
        created = last_commit + timedelta(days=75)  # negative duration, kept
    else:
        created = pub - timedelta(days=150 + hash_stable(pair_key) % 300)

    contributors = []
    for code, coded_pairs in CODED.items():
        if pair_key not in coded_pairs:
            continue
        author_name = CAREER[code][0]
        if code == "W4a":
            # matched through the email signature band, not display name
            contributors.append(
                {
                    "dev_id": dev_key(code),
                    "username": "zx9qraft",
                    "display_name": None,
                    "email": "tadeyemi@lab.org",
                }
            )
        else:
            contributors.append(
                {
                    "dev_id": dev_key(code),
                    "username": username_for(author_name),
                    "display_name": author_name,
                    "email": None,
                }
            )
    if pair_key in INITIALS_DEVS:
        dev_id, username, display = INITIALS_DEVS[pair_key]
        contributors.append(
            {"dev_id": dev_id, "username": username, "display_name": display, "email": None}
        )
    for i in range(STRANGERS.get(pair_key, 0)):
        display, username = STRANGER_NAMES.pop()
        contributors.append(
            {
                "dev_id": f"gh-x-{pair_key.lower()}-{i}",
                "username": username,
                "display_name": display,
                "email": None,
            }
        )
    for i, c in enumerate(contributors):
        commits, additions, deletions = commit_stats(c["dev_id"] + pair_key, 8 + 4 * i)
        c.update(commits=commits, additions=additions, deletions=deletions)

    lang_main = {"H": "R", "L": "Python", "P": "Python", "S": "R"}[domain_key]
    return {
        "owner": owner,
        "name": name,
        "created_at": created.isoformat(),
        "last_commit_at": last_commit.isoformat(),
        "language_bytes": {
            lang_main: 4000 + hash_stable(pair_key) * 13 % 90000,
            "Markdown": 800 + hash_stable(pair_key) % 900,
        },
        "contributors": contributors,
    }


def write_corpus() -> None:
    if CORPUS.exists():
        shutil.rmtree(CORPUS)
    (CORPUS / "sources").mkdir(parents=True)
    backend = CORPUS / "backend"
    (backend / "resolver").mkdir(parents=True)
    (backend / "articles").mkdir()
    (backend / "repos").mkdir()

    (backend / "resolver" / "map.json").write_text(
        json.dumps(RESOLVER_MAP, indent=2, sort_keys=True) + "\n"
    )

    def write_article(doi: str, payload: dict) -> None:
        name = urllib.parse.quote(doi, safe="") + ".json"
        (backend / "articles" / name).write_text(
            json.dumps(payload, indent=1, sort_keys=True) + "\n"
        )

    def write_repo(owner: str, name: str, payload: dict) -> None:
        fname = f"{owner.lower()}__{name.lower()}.json"
        (backend / "repos" / fname).write_text(
            json.dumps(payload, indent=1, sort_keys=True) + "\n"
        )

    rows = {"joss": [], "softwarex": [], "plos": [], "pwc": []}

    for key, (source, doi, (owner, name), domain_key, oa, pub, offset) in SURVIVORS.items():
        resolved = RESOLVER_MAP.get(doi, doi)
        backend_type = {
            "software article": "article",
            "research article": "article",
            "preprint": "preprint",
        }[article_type_of(key)]
        write_article(
            resolved,
            {
                "title": f"Study {key}: {name.replace('-', ' ')}",
                "type": backend_type,
                "domain": DOMAIN[domain_key],
                "is_open_access": oa,
                "publication_date": pub.isoformat(),
                "citation_count": citations_for(key),
                "authors": build_author_payload(key),
            },
        )
        write_repo(owner, name, build_repo_payload(key))
        url = f"https://github.com/{owner}/{name}"
        if source == "joss":
            rows["joss"].append({"doi": doi, "source": "joss", "repository_url": url})
        elif source == "softwarex":
            rows["softwarex"].append(
                {"doi": doi, "source": "softwarex", "repository_url": url}
            )
        elif source == "plos":
            rows["plos"].append(
                {
                    "doi": doi,
                    "source": "plos",
                    "availability_text": f"All code is available at {url}.",
                }
            )
        else:
            rows["pwc"].append(
                {"doi": doi, "source": "pwc", "repo_url": url, "is_official": True}
            )

    # removed-by-rule pairs
    for key, (source, doi, (owner, name), n_authors, citations, offset, languages) in REMOVED.items():
        pub = REMOVED_DATES[key]
        atype = {"joss": "article", "softwarex": "article", "plos": "article", "pwc": "preprint"}[source]
        domain_name = DOMAIN[["H", "L", "P", "S"][hash_stable(key) % 4]]
        write_article(
            doi,
            {
                "title": f"Removed study {key}",
                "type": atype,
                "domain": domain_name,
                "is_open_access": True,
                "publication_date": pub.isoformat(),
                "citation_count": citations,
                "authors": filler_authors(key, n_authors),
            },
        )
        contributors = []
        display, username = STRANGER_NAMES.pop() if STRANGER_NAMES else ("Zed Quiverton", "zq-dev")
        contributors.append(
            {"dev_id": f"gh-r-{key.lower()}", "username": username,
             "display_name": display, "email": None}
        )
        for i, c in enumerate(contributors):
            commits, additions, deletions = commit_stats(c["dev_id"], 6)
            c.update(commits=commits, additions=additions, deletions=deletions)
        write_repo(
            owner,
            name,
            {
                "owner": owner,
                "name": name,
                "created_at": (pub - timedelta(days=120)).isoformat(),
                "last_commit_at": (pub + timedelta(days=offset)).isoformat(),
                "language_bytes": languages,
                "contributors": contributors,
            },
        )
        url = f"https://github.com/{owner}/{name}"
        if source == "joss":
            rows["joss"].append({"doi": doi, "source": "joss", "repository_url": url})
        elif source == "softwarex":
            rows["softwarex"].append(
                {"doi": doi, "source": "softwarex", "repository_url": url}
            )
        elif source == "plos":
            rows["plos"].append(
                {
                    "doi": doi,
                    "source": "plos",
                    "availability_text": f"Scripts are archived at {url}.",
                }
            )
        else:
            rows["pwc"].append(
                {"doi": doi, "source": "pwc", "repo_url": url, "is_official": True}
            )

    # the shared-DOI article whose two pairs fall to the one-to-one rule
    write_article(
        SHARED_DOI,
        {
            "title": "Shared DOI study",
            "type": "article",
            "domain": DOMAIN["L"],
            "is_open_access": True,
            "publication_date": SHARED_DATE.isoformat(),
            "citation_count": 5,
            "authors": filler_authors("P7", 4),
        },
    )
    urls = []
    for owner, name in SHARED_REPOS:
        write_repo(
            owner,
            name,
            {
                "owner": owner,
                "name": name,
                "created_at": (SHARED_DATE - timedelta(days=90)).isoformat(),
                "last_commit_at": (SHARED_DATE + timedelta(days=30)).isoformat(),
                "language_bytes": {"Python": 1200},
                "contributors": [
                    {
                        "dev_id": f"gh-shared-{name}",
                        "username": f"builder-{name}",
                        "display_name": None,
                        "email": None,
                        "commits": 5,
                        "additions": 200,
                        "deletions": 20,
                    }
                ],
            },
        )
        urls.append(f"https://github.com/{owner}/{name}")
    rows["plos"].append(
        {
            "doi": SHARED_DOI,
            "source": "plos",
            "availability_text": f"Code at {urls[0]} and {urls[1]}.",
        }
    )

    rows["pwc"].append(
        {
            "doi": UNOFFICIAL_DOI,
            "source": "pwc",
            "repo_url": "https://github.com/shadow/unofficial-code",
            "is_official": False,
        }
    )

    for source, source_rows in rows.items():
        path = CORPUS / "sources" / f"{source}.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in source_rows) + "\n")

    (CORPUS / "config.yaml").write_text(
        "\n".join(
            [
                "sources:",
                "  joss: sources/joss.jsonl",
                "  softwarex: sources/softwarex.jsonl",
                "  plos: sources/plos.jsonl",
                "  pwc: sources/pwc.jsonl",
                "backend: fixture",
                "fixture_dir: backend",
                "output_dir: out",
                "seed: 7",
                "asof_date: 2025-01-15",
                "nb_dispersion: 1.0",
                "",
            ]
        )
    )


def verify() -> None:
    sys.path.insert(0, str(ROOT / "src"))
    from softcredit.pipeline import Pipeline, load_config
    from softcredit.reports import build_author_doc_rows, build_career_rows

    with tempfile.TemporaryDirectory() as tmp:
        config = load_config(CORPUS / "config.yaml")
        config.output_dir = str(Path(tmp) / "out")
        pipeline = Pipeline(config, Path(tmp) / "stage")
        results = pipeline.run_all()

        assert results["ingest"]["raw_pairs"] == 25, results["ingest"]
        assert results["filter"]["audit"] == EXPECTED_FILTER_AUDIT, results["filter"]
        assert results["filter"]["analysis_pairs"] == 15

        # team compositions
        store = pipeline.store
        doi_by_key = {k: RESOLVER_MAP.get(v[1], v[1]) for k, v in SURVIVORS.items()}
        by_id = {p.pair_id: p for p in store.iter_pairs()}
        teams = {
            r["pair_id"]: (r["total_authors"], r["cc_a"], r["cc_na"])
            for r in store.sql("SELECT * FROM team_compositions")
        }
        for key, (cc_a, cc_na) in EXPECTED_TEAMS.items():
            pair_id = next(
                pid for pid, p in by_id.items() if p.doi == doi_by_key[key]
            )
            total = len(ROSTER[key])
            assert teams[pair_id] == (total, cc_a, cc_na), (
                key, teams[pair_id], (total, cc_a, cc_na),
            )

        # career set: outliers trimmed, attributes as designed
        author_docs = build_author_doc_rows(store, config.filters)
        careers = build_career_rows(store, author_docs)
        by_author = {c.author_id: c for c in careers}
        assert author_key("O1") not in by_author
        assert author_key("O2") not in by_author
        assert len(careers) == 24, len(careers)
        for code, (name, category, domain_key, atype, position) in CAREER.items():
            if code in ("O1", "O2"):
                continue
            row = by_author[author_key(code)]
            assert row.category == category, (code, row.category, category)
            assert row.domain == DOMAIN[domain_key], (code, row.domain)
            assert row.article_type == atype, (code, row.article_type, atype)
            assert row.position == position, (code, row.position, position)
        pipeline.close()
    print("corpus verified: 25 pairs, audit", EXPECTED_FILTER_AUDIT, "; 24 career authors")


if __name__ == "__main__":
    write_corpus()
    verify()
    print(f"fixture corpus written to {CORPUS}")
