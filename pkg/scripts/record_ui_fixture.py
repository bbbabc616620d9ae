#!/usr/bin/env python3
"""Record a real service exchange into a fixture for the frontend tests.

Drives the live HTTP app through: create session, three summary rounds with
feedback 0.9 then 0.1, a duplicated feedback attempt (conflict), and a final
state read.  The frontend replays this fixture so its contract tests assert
against genuine service responses.
"""

import argparse
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from prefer import experiments
from prefer.service import SessionStore, create_app


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures" / "service_fixture.json",
    )
    args = ap.parse_args()

    catalog = experiments.acceptance_catalog()
    with tempfile.TemporaryDirectory() as tmp:
        app = create_app(catalog, SessionStore(tmp))
        fixture = {}
        with TestClient(app) as client:
            create_body = {"products": list(experiments.PRODUCTS), "seed": 0, "mode": "gumbel"}
            created = client.post("/sessions", json=create_body)
            fixture["create"] = {"request": create_body, "response": created.json()}
            sid = created.json()["session_id"]

            rounds = []
            for f in (0.9, 0.1):
                summary = client.get(f"/sessions/{sid}/summary").json()
                feedback = client.post(
                    f"/sessions/{sid}/feedback",
                    json={"summary_id": summary["summary_id"], "f": f},
                ).json()
                rounds.append({"summary": summary, "feedback": {"f": f, "response": feedback}})
            final_summary = client.get(f"/sessions/{sid}/summary").json()
            rounds.append({"summary": final_summary})
            fixture["rounds"] = rounds

            dup = client.post(
                f"/sessions/{sid}/feedback",
                json={"summary_id": rounds[1]["summary"]["summary_id"], "f": 0.5},
            )
            fixture["duplicate_feedback"] = {"status": dup.status_code, "response": dup.json()}
            fixture["state_after"] = client.get(f"/sessions/{sid}/state").json()

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
