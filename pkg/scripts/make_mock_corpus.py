"""Generate the bundled demo corpus (src/egmkit/data/mock_corpus.jsonl).

The corpus is 60 records: 54 thematic ones covering every pair of three
interventions (cash transfers, school feeding, microfinance) and three
outcomes (school attendance, nutrition status, household income), plus 6
off-topic records that the standard demo query must not match.

Layout is positional and deterministic: line 6*p + t holds pair p
(pair-major over interventions x outcomes) and template t in 0..5, where
template 4 is always the systematic review. Off-topic records sit on
lines 54..59. Tests rely on this layout to build screening and coding
fixtures without parsing the prose.

Run from the repository root:  python3 scripts/make_mock_corpus.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

OUT_PATH = Path(__file__).resolve().parents[1] / "src" / "egmkit" / "data" / "mock_corpus.jsonl"

DEMO_QUERY = ('("cash transfer" OR "school feeding" OR microfinance) '
              "AND (attendance OR nutrition OR income)")

INTERVENTIONS = [
    {
        "id": "cash_transfer",
        "phrase": "cash transfer",
        "keywords": ["cash", "transfer", "stipend"],
        "sentences": [
            "We study a cash transfer scheme paying a monthly stipend to poor "
            "households, with each cash payment delivered through mobile money.",
            "The programme combined an unconditional cash transfer with a "
            "school-term stipend, and transfer amounts were indexed to local prices.",
            "Households received a bimonthly cash transfer; the stipend value "
            "averaged fifteen percent of baseline consumption per transfer round.",
        ],
    },
    {
        "id": "school_feeding",
        "phrase": "school feeding",
        "keywords": ["feeding", "meal", "lunch"],
        "sentences": [
            "The school feeding programme served one fortified meal per day, "
            "with the lunch menu rotating across locally sourced staples.",
            "We evaluate a school feeding intervention in which every enrolled "
            "child received a free midday meal and a take-home lunch ration.",
            "Feeding was organised by parent committees; each meal met a third "
            "of daily energy needs and lunch attendance was logged daily.",
        ],
    },
    {
        "id": "microfinance",
        "phrase": "microfinance",
        "keywords": ["microfinance", "loan", "credit"],
        "sentences": [
            "A microfinance institution offered group-liability credit, with "
            "first loan sizes capped and repeat credit conditional on repayment.",
            "We examine a microfinance expansion that relaxed collateral rules, "
            "increasing loan uptake and the share of households with formal credit.",
            "The microfinance product bundled a small emergency loan with "
            "savings requirements, shifting borrowers away from informal credit.",
        ],
    },
]

OUTCOMES = [
    {
        "id": "school_attendance",
        "word": "attendance",
        "sentences": [
            "Administrative registers tracked school attendance over two "
            "academic years, and attendance spells were validated by spot checks.",
            "Enumerators collected monthly attendance rolls, distinguishing "
            "absence due to illness from withdrawal.",
        ],
    },
    {
        "id": "nutrition_status",
        "word": "nutrition",
        "sentences": [
            "Anthropometric surveys measured child nutrition at baseline and "
            "endline, with height-for-age as the primary nutrition index.",
            "Nutrition outcomes combine dietary diversity scores with "
            "haemoglobin tests administered by trained nurses.",
        ],
    },
    {
        "id": "household_income",
        "word": "income",
        "sentences": [
            "Household income was reconstructed from seasonal earnings diaries "
            "covering farm, wage, and enterprise income.",
            "We measure total income per adult equivalent, deflated by a "
            "district price index, alongside income volatility.",
        ],
    },
]

# Template 4 is the systematic review; 0 and 2 read as impact evaluations,
# the rest as other primary research.
TITLE_TEMPLATES = [
    "{ip} and {ow} gains: experimental evidence from {country}",
    "Measuring how {ip} programmes shift {ow} among rural households in {country}",
    "Do {ip} pilots raise {ow}? A cluster randomized evaluation in {country}",
    "{ip} expansion and adolescent {ow}: quasi-experimental estimates from {country}",
    "A systematic review of {ip} interventions targeting {ow}: {scope}",
    "{ip}, shocks, and {ow}: longitudinal panel findings from {country}",
]

# One distinct tail per intervention x outcome pair, so review titles never
# drift within title-similarity merge range of each other.
REVIEW_SCOPES = [
    "evidence from sub-Saharan Africa",
    "two decades of programme evaluations",
    "what works for ultra-poor households",
    "lessons from South Asian rollouts",
    "a meta-analysis of cluster trials",
    "synthesising quasi-experimental designs",
    "coverage, dosage, and delivery models",
    "heterogeneity across delivery agencies",
    "long-run follow-ups and spillovers",
]

METHOD_SENTENCES = [
    "Assignment was randomized at the village level across {n} communities.",
    "We apply difference-in-differences to a panel of {n} households.",
    "The trial pre-registered {n} clusters and followed them for three years.",
    "Identification exploits a staggered rollout across {n} districts.",
    "We screen {n} studies and synthesise effect sizes with random-effects "
    "models, grading evidence quality.",
    "Four survey waves follow {n} households through repeated climate shocks.",
]

COUNTRIES = [
    "Kenya", "Ghana", "Malawi", "Uganda", "India", "Nepal",
    "Peru", "Bolivia", "Mexico", "Ethiopia", "Rwanda", "Zambia",
    "Tanzania", "Senegal", "Cambodia", "Bangladesh", "Indonesia", "Honduras",
]

SURNAMES = [
    "Okafor", "Mwangi", "Patel", "Nguyen", "Garcia", "Haile",
    "Banda", "Sharma", "Torres", "Diallo", "Castillo", "Rahman",
]

VENUES = [
    "Journal of Development Economics",
    "World Development",
    "Economic Development and Cultural Change",
    "Journal of Development Effectiveness",
    "Food Policy",
    "Development Policy Review",
]

OFF_TOPIC = [
    ("Deep representation models for protein folding trajectories",
     "We train sequence models on folding simulations and evaluate contact "
     "map recovery across twelve benchmark proteins, reporting calibration "
     "of uncertainty estimates under domain shift."),
    ("Thermal stress thresholds in reef-building corals",
     "Laboratory heating experiments identify bleaching onset temperatures "
     "for four coral taxa, linking symbiont density loss to cumulative "
     "degree heating weeks."),
    ("Spectral variability of high-redshift quasars",
     "Multi-epoch spectroscopy of forty quasars reveals continuum "
     "variability correlated with accretion rate proxies, constraining "
     "disc instability models."),
    ("Strain engineering of graphene lattice phonons",
     "Raman spectroscopy under uniaxial strain maps phonon mode splitting "
     "in suspended graphene, with implications for flexible electronics."),
    ("Glacier terminus retreat in the Cordillera Blanca",
     "Satellite altimetry from two decades quantifies terminus retreat for "
     "31 glaciers, separating thinning from frontal ablation."),
    ("Stopover ecology of trans-Saharan songbird migration",
     "Radio tracking at three oases shows fuelling rates govern departure "
     "decisions, with wind selectivity strongest in lean birds."),
]


def make_records() -> list[dict]:
    records = []
    i = 0
    for p in range(9):
        intervention = INTERVENTIONS[p // 3]
        outcome = OUTCOMES[p % 3]
        for t in range(6):
            country = COUNTRIES[(p * 6 + t) % len(COUNTRIES)]
            ip = intervention["phrase"]
            title = TITLE_TEMPLATES[t].format(
                ip=ip[0].upper() + ip[1:] if TITLE_TEMPLATES[t].startswith("{ip}") else ip,
                ow=outcome["word"], country=country, scope=REVIEW_SCOPES[p])
            if t == 4:
                year = 2022 if p % 3 == 0 else 2010 + p
            else:
                year = 2008 + ((p * 5 + t * 3) % 16)
            abstract = " ".join([
                intervention["sentences"][(p + t) % 3],
                outcome["sentences"][(p + t) % 2],
                METHOD_SENTENCES[t].format(n=40 + 7 * ((p + t) % 9)),
            ])
            records.append({
                "title": title,
                "abstract": abstract,
                "doi": f"10.5555/egm.{i:03d}",
                "year": year,
                "authors": [
                    f"{SURNAMES[(i * 3) % 12]}, A.",
                    f"{SURNAMES[(i * 3 + 7) % 12]}, B.",
                ],
                "venue": VENUES[i % 6],
            })
            i += 1
    for title, abstract in OFF_TOPIC:
        records.append({
            "title": title,
            "abstract": abstract,
            "doi": f"10.5555/egm.{i:03d}",
            "year": 2015 + (i % 9),
            "authors": [f"{SURNAMES[(i * 5) % 12]}, C."],
            "venue": "Proceedings of Assorted Sciences",
        })
        i += 1
    return records


def self_check(records: list[dict]) -> None:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from egmkit.dedupe import dedupe
    from egmkit.query import eval_query, parse_query
    from egmkit.records import build_record
    from egmkit.textprep import tokenize

    assert len(records) == 60, len(records)
    built = [build_record(r, source="mock") for r in records]
    assert len({r.id for r in built}) == 60, "record ids must be unique"
    survivors, log = dedupe(list(built))
    assert len(survivors) == 60, f"accidental duplicate titles: {log}"

    query = parse_query(DEMO_QUERY)
    matched = [r for r in built if eval_query(query, r)]
    assert len(matched) == 54, f"query must match the 54 thematic records, got {len(matched)}"
    assert all(r.doi and int(r.doi.split(".")[-1]) < 54 for r in matched)

    for p in range(9):
        keywords = set(INTERVENTIONS[p // 3]["keywords"])
        for t in range(6):
            tokens = set(tokenize(records[6 * p + t]["abstract"]))
            missing = keywords - tokens
            assert not missing, f"record {6 * p + t} lacks keywords {missing}"


def main() -> None:
    records = make_records()
    self_check(records)
    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT_PATH, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {len(records)} records to {OUT_PATH}")
    print(f"demo query: {DEMO_QUERY}")


if __name__ == "__main__":
    main()
