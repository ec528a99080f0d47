"""The professor workflow against a live grading service.

Starts the HTTP service on a local port, registers a dataset, uploads a
training CSV, polls the train job while the learning curve grows, then
scores a test CSV, downloads the scored CSV, and asks for a pivot table,
mirroring the train-first-time-then-score loop.
"""

import tempfile
import threading
import time
from pathlib import Path

import numpy as np
import requests
import uvicorn

from asag import AnswerPair, Corpus, HashProvider
from asag._rng import SplitMix64
from asag.corpus import write_pairs_csv
from asag.service import ServiceConfig, create_app

PORT = 8765
BASE = f"http://127.0.0.1:{PORT}/api/v1"
DIM = 64

# a small learnable corpus: grades follow a linear functional of pair vectors
provider = HashProvider(DIM)
w_rng = SplitMix64(321)
w = np.array([2.0 * w_rng.next_unit() - 1.0 for _ in range(DIM)])
w /= np.linalg.norm(w)
rows = []
for q in range(10):
    reference = f"reference explanation of concept {q} uses marker words alpha{q} beta{q}"
    for s in range(20):
        student = f"student answer {s} describing concept {q} with token gamma{q}x{s}"
        rows.append((f"p{len(rows):04d}", f"q{q:02d}", reference, student))
raws = np.array([provider.embed_pair(r, s) @ w for (_, _, r, s) in rows])
z = (raws - raws.mean()) / raws.std()
units = np.clip(0.5 + 0.225 * np.clip(z, -2, 2), 0, 1)
corpus = Corpus(
    pairs=tuple(
        AnswerPair(id=i, question_id=q, question_text=f"question {q}", reference_answer=r,
                   student_answer=s, gold_score=float(u) * 5.0)
        for (i, q, r, s), u in zip(rows, units)
    ),
    score_max=5.0,
)

workdir = Path(tempfile.mkdtemp(prefix="asag-service-demo-"))
config = ServiceConfig(
    data_dir=workdir / "data",
    provider_spec=f"hash:{DIM}",
    train_overrides={"lr_peak": 3e-3, "max_epochs": 8, "abort_epoch": 6, "max_restarts": 2},
    head_overrides={"hidden_dims": [64]},
)
server = uvicorn.Server(
    uvicorn.Config(create_app(config), host="127.0.0.1", port=PORT, log_level="warning")
)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

train_csv = workdir / "train.csv"
test_csv = workdir / "test.csv"
write_pairs_csv(corpus, train_csv, include_scores=True)
write_pairs_csv(corpus, test_csv, include_scores=False)

print(requests.post(f"{BASE}/datasets", json={"name": "cs101", "score_max": 5}).json())

with train_csv.open("rb") as fh:
    job = requests.post(f"{BASE}/datasets/cs101/train", files={"file": ("train.csv", fh)}).json()
print(f"train job {job['id']} queued")
while True:
    job = requests.get(f"{BASE}/jobs/{job['id']}").json()
    print(
        f"  state={job['state']} epochs={job['progress'].get('epochs_done', 0)} "
        f"curve points={len(job.get('curve', []))}"
    )
    if job["state"] in ("done", "failed"):
        break
    time.sleep(0.4)
print(f"training finished: {job['result']}")

with test_csv.open("rb") as fh:
    score_job = requests.post(f"{BASE}/datasets/cs101/score", files={"file": ("test.csv", fh)}).json()
while score_job["state"] not in ("done", "failed"):
    time.sleep(0.2)
    score_job = requests.get(f"{BASE}/jobs/{score_job['id']}").json()

rows_json = requests.get(f"{BASE}/datasets/cs101/results/{score_job['id']}").json()["rows"]
print(f"\nscored {len(rows_json)} rows; first three:")
for row in rows_json[:3]:
    print(f"  {row['id']}: {row['score']:.4f} (gold was {dict((p.id, p.gold_score) for p in corpus)[row['id']]:.4f})")

csv_bytes = requests.get(f"{BASE}/datasets/cs101/results/{score_job['id']}/csv").content
print(f"downloadable CSV: {len(csv_bytes)} bytes")

pivot = requests.get(
    f"{BASE}/datasets/cs101/pivot",
    params={"job": score_job["id"], "by": "question_id", "agg": "mean"},
).json()
print("\npivot (mean score by question):")
for group in pivot["groups"][:5]:
    print(f"  {group['key']}: mean {group['value']:.3f} over {group['count']} answers")
print(f"  totals: {pivot['totals']}")

server.should_exit = True
thread.join(timeout=5)
