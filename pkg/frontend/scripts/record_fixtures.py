"""Record real service payloads as UI test fixtures.

Drives the HTTP API end to end on the bundled demo corpus and saves
selected responses under tests/fixtures/. The contract tests replay
these payloads, so rerun this after any payload shape change:

    python3 scripts/record_fixtures.py
"""

import json
import time
from pathlib import Path
from tempfile import TemporaryDirectory

from fastapi.testclient import TestClient

from egmkit.api import create_app
from egmkit.mockprovider import load_corpus

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

QUERY = ('("cash transfer" OR "school feeding" OR microfinance) '
         "AND (attendance OR nutrition OR income)")

FRAMEWORK = {
    "interventions": [
        {"id": "cash_transfer", "label": "Cash transfers"},
        {"id": "school_feeding", "label": "School feeding"},
        {"id": "microfinance", "label": "Microfinance"},
    ],
    "outcomes": [
        {"id": "school_attendance", "label": "School attendance"},
        {"id": "nutrition_status", "label": "Nutrition status"},
        {"id": "household_income", "label": "Household income"},
    ],
}

KEYWORDS = {
    "cash_transfer": ["cash", "transfer", "stipend"],
    "school_feeding": ["feeding", "meal", "lunch"],
    "microfinance": ["microfinance", "loan", "credit"],
}

# (doi index, outcome, direction, attributes) per coded study; fills one
# populated, one synthesis-gap, and one absolute-gap cell.
CODINGS = [
    (0, "school_attendance", "positive",
     {"study_type": "impact_evaluation", "geography": "KEN",
      "quality_rating": "high"}),
    (2, "school_attendance", "positive",
     {"study_type": "impact_evaluation", "geography": "UGA",
      "quality_rating": "medium"}),
    (4, "school_attendance", "negative",
     {"study_type": "systematic_review", "geography": "KEN",
      "quality_rating": "high"}),
    (18, "school_attendance", "positive",
     {"study_type": "impact_evaluation", "geography": "KEN",
      "quality_rating": "medium"}),
    (20, "school_attendance", "non_significant",
     {"study_type": "impact_evaluation", "geography": "TZA",
      "quality_rating": "low"}),
    (36, "school_attendance", "negative",
     {"study_type": "other_primary", "geography": "UGA",
      "quality_rating": "low"}),
]

INTERVENTION_BY_DOI = {0: "cash_transfer", 2: "cash_transfer", 4: "cash_transfer",
                       18: "school_feeding", 20: "school_feeding",
                       36: "microfinance"}


def save(name: str, payload) -> None:
    path = FIXTURES / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(f"wrote {path.relative_to(Path.cwd())}")


def expect(response, status: int):
    assert response.status_code == status, (response.status_code, response.text)
    return response.json()


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus()
    picked = [corpus[i] for i in
              list(range(0, 6)) + list(range(18, 24)) + list(range(36, 42))]
    content = "\n".join(json.dumps(r) for r in picked) + "\n"

    with TemporaryDirectory() as data_dir:
        client = TestClient(create_app(data_dir))
        base = "/api/v1/projects"

        pid = expect(client.post(base, json={"name": "Demo map"}), 201)["id"]
        expect(client.put(f"{base}/{pid}/framework", json=FRAMEWORK), 200)
        expect(client.put(f"{base}/{pid}/criteria",
                          json={"query": QUERY, "filters": {"year_min": 2005}}), 200)
        expect(client.put(f"{base}/{pid}/keywords", json=KEYWORDS), 200)
        expect(client.put(f"{base}/{pid}/gap-config",
                          json={"reference_year": 2025}), 200)
        expect(client.post(f"{base}/{pid}/import",
                           json={"format": "jsonl", "content": content}), 200)

        queue = expect(client.get(f"{base}/{pid}/screening/queue"), 200)
        assert len(queue["docs"]) == 18
        save("screening_queue", queue)

        by_doi = {doc["doi"]: doc["id"] for doc in queue["docs"]}
        first = queue["docs"][0]
        decision = expect(client.post(
            f"{base}/{pid}/screening/{first['id']}",
            json={"decision": "included", "reviewer": "demo"}), 200)
        save("screening_response", decision)
        for doc in queue["docs"][1:-1]:
            expect(client.post(f"{base}/{pid}/screening/{doc['id']}",
                               json={"decision": "included", "reviewer": "demo"}), 200)
        expect(client.post(f"{base}/{pid}/screening/{queue['docs'][-1]['id']}",
                           json={"decision": "excluded", "reason": "off scope",
                                 "reviewer": "demo"}), 200)

        job = expect(client.post(
            f"{base}/{pid}/jobs",
            json={"kind": "fit",
                  "params": {"sweeps": 80, "burn_in": 20, "seed": 11}}), 202)
        save("job_accepted", job)
        for _ in range(200):
            job = expect(client.get(f"{base}/{pid}/jobs/{job['id']}"), 200)
            if job["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert job["status"] == "done", job
        save("job_done", job)

        suggestions = expect(client.get(
            f"{base}/{pid}/model/suggestions",
            params={"topic": "cash_transfer", "tau": 0.2}), 200)
        assert len(suggestions["suggestions"]) >= 2, suggestions
        save("suggestions", suggestions)

        confirmed = expect(client.post(
            f"{base}/{pid}/suggestions/{suggestions['suggestions'][0]['id']}",
            json={"status": "confirmed"}), 200)
        save("suggestion_response", confirmed)

        rejected = expect(client.post(
            f"{base}/{pid}/suggestions/{suggestions['suggestions'][1]['id']}",
            json={"status": "rejected"}), 200)
        save("suggestion_rejected", rejected)

        coding_response = None
        for i, outcome, direction, attributes in CODINGS:
            body = {
                "doc": by_doi[f"10.5555/egm.{i:03d}"],
                "intervention": INTERVENTION_BY_DOI[i],
                "outcome": outcome,
                "direction": direction,
                "attributes": attributes,
                "reviewer": "demo",
            }
            coding = expect(client.post(f"{base}/{pid}/codings", json=body), 200)
            if coding_response is None:
                coding_response = coding
        save("coding_response", coding_response)

        egm = expect(client.get(f"{base}/{pid}/egm"), 200)
        classes = {(c["intervention"], c["outcome"]): c["gap_class"]
                   for c in egm["cells"]}
        assert classes[("cash_transfer", "school_attendance")] == "populated"
        assert classes[("school_feeding", "school_attendance")] == "synthesis_gap"
        assert classes[("microfinance", "school_attendance")] == "absolute_gap"
        save("egm", egm)

        egm_filtered = expect(client.get(f"{base}/{pid}/egm",
                                         params={"geography": "KEN"}), 200)
        assert egm_filtered["filters"] == {"geography": "KEN"}
        save("egm_filtered", egm_filtered)

        save("project", expect(client.get(f"{base}/{pid}"), 200))
        save("projects", expect(client.get(base), 200))


if __name__ == "__main__":
    main()
