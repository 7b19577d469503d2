"""Language-model sensor boundary: prompt + obstacle roster in, one danger
score per obstacle out.

Three interchangeable backends: a keyword rule table (offline tests), a
recorded-fixture replay, and a live chat-completion endpoint. Fusion and
planning only ever see the readings, never the backend identity.

Failure semantics: transport or parse trouble is retried a fixed number of
times and then raised; the caller applies no update on error, so planning
falls back to whatever the current (untouched) posteriors imply.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
from dataclasses import dataclass, field

from .bayes_fusion import DangerReading, FusionParams, reset, update
from .errors import SensorError, SensorParseError, SensorTransportError

INSTRUCTIONS_VERSION = "v1"
RETRIES = 3

SYSTEM_INSTRUCTIONS = (
    "You are a danger assessor for a ground robot navigating a construction site. "
    "Given an operator message and a roster of map obstacles (id and family), rate how "
    "dangerous it would be for the robot to pass close to each obstacle right now. "
    'Reply with ONLY a JSON object of the form {"scores": {"<obstacle id>": <number between 0 and 1>}} '
    "covering every roster id exactly once. No prose, no markdown."
)


@dataclass(frozen=True)
class SensorQuery:
    prompt: str
    obstacles: tuple[tuple[str, str], ...]  # (id, family)
    instructions_version: str = INSTRUCTIONS_VERSION
    prompt_id: str = ""

    def __post_init__(self):
        if not self.prompt:
            raise SensorError("prompt must be non-empty")
        if not self.obstacles:
            raise SensorError("sensor query needs at least one obstacle")


@dataclass(frozen=True)
class SensorResponse:
    readings: tuple[DangerReading, ...]
    raw: str
    backend: str
    clamped: tuple[str, ...] = ()  # ids whose scores were pulled back into [0, 1]


def build_request(query: SensorQuery) -> str:
    """Deterministic request text: same query, same bytes.

    The roster is sorted by id before rendering so fixture hashes do not
    depend on declaration order.
    """
    roster = sorted(query.obstacles)
    user_payload = {
        "prompt": query.prompt,
        "obstacles": [{"id": oid, "family": fam} for oid, fam in roster],
    }
    doc = {
        "instructions_version": query.instructions_version,
        "messages": [
            {"role": "system", "content": SYSTEM_INSTRUCTIONS},
            {"role": "user", "content": json.dumps(user_payload, sort_keys=True)},
        ],
    }
    return json.dumps(doc, sort_keys=True)


def request_hash(request_text: str) -> str:
    return hashlib.sha256(request_text.encode("utf-8")).hexdigest()[:16]


def parse_scores(raw: str, expected_ids: list[str]) -> dict[str, float]:
    """Pull the score object out of backend output, tolerating surrounding
    prose, and check it covers every expected id with a number."""
    start = raw.find("{")
    end = raw.rfind("}")
    if start < 0 or end <= start:
        raise SensorParseError("no JSON object in backend output", raw=raw)
    try:
        doc = json.loads(raw[start : end + 1])
    except json.JSONDecodeError as exc:
        raise SensorParseError(f"backend output is not valid JSON: {exc}", raw=raw) from exc
    if not isinstance(doc, dict):
        raise SensorParseError("backend output is not an object", raw=raw)
    scores = doc.get("scores", doc)
    if not isinstance(scores, dict):
        raise SensorParseError("'scores' is not an object", raw=raw)
    out: dict[str, float] = {}
    for oid in expected_ids:
        if oid not in scores:
            raise SensorParseError(f"missing score for '{oid}'", raw=raw)
        value = scores[oid]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SensorParseError(f"score for '{oid}' is not numeric: {value!r}", raw=raw)
        out[oid] = float(value)
    return out


def _decode_request(request_text: str) -> tuple[str, list[tuple[str, str]]]:
    # Mock backends read the same request a live model would see.
    doc = json.loads(request_text)
    user = json.loads(doc["messages"][1]["content"])
    return user["prompt"], [(o["id"], o["family"]) for o in user["obstacles"]]


# --- rule-table mock -------------------------------------------------------

# First matching keyword rule wins; lookup inside a rule is by obstacle id,
# then family, then the rule's default. Scores are chosen so that fusing
# with trust 5 over the uniform prior lands on the published posterior
# columns for the busy/empty, MEP, and cement prompt families.
DEFAULT_RULES: tuple = (
    (
        ("undergoing", "ongoing"),
        {"Workstations": 0.8, "Walls": 0.6, "_default": 0.5},
    ),
    (
        ("completed electrical", "electrical conduits", "conduits"),
        {"Workstations": 0.3, "Walls": 0.1, "_default": 0.2},
    ),
    (
        ("poured cement", "wet cement", "fresh cement"),
        {"Floor-Cement": 0.8, "Welding-Station": 0.2, "Storage": 0.1, "Walls": 0.1, "_default": 0.1},
    ),
    (
        ("work is completed", "dried cement", "dry cement"),
        {"Floor-Cement": 0.1, "Welding-Station": 0.8, "Storage": 0.1, "Walls": 0.1, "_default": 0.1},
    ),
    (
        ("busy", "crowded"),
        {"Workstations": 1.0, "Walls": 0.2, "Welding-Station": 0.9, "Floor-Cement": 0.6, "Storage": 0.4, "_default": 0.6},
    ),
    (
        ("empty", "quiet"),
        {"Workstations": 0.1, "Walls": 0.1, "Welding-Station": 0.3, "Floor-Cement": 0.3, "Storage": 0.1, "_default": 0.1},
    ),
)
NEUTRAL_SCORE = 0.5


class MockBackend:
    """Deterministic keyword-rule sensor for offline runs."""

    name = "mock"

    def __init__(self, rules=DEFAULT_RULES, neutral_score: float = NEUTRAL_SCORE):
        self.rules = rules
        self.neutral_score = neutral_score

    def _score(self, prompt: str, oid: str, family: str) -> float:
        text = prompt.lower()
        for keywords, table in self.rules:
            if any(k in text for k in keywords):
                if oid in table:
                    return table[oid]
                if family in table:
                    return table[family]
                return table.get("_default", self.neutral_score)
        return self.neutral_score

    def complete(self, request_text: str) -> str:
        prompt, roster = _decode_request(request_text)
        scores = {oid: self._score(prompt, oid, family) for oid, family in roster}
        return json.dumps({"scores": scores})


class ChoiceMockBackend:
    """Stochastic mock: each obstacle's score is drawn uniformly from a
    fixed choice list per call. Used for ablation statistics."""

    name = "mock"

    def __init__(self, choices: dict[str, list[float]], seed: int = 0, default: float = 0.5):
        self.choices = choices
        self.default = default
        self._rng = random.Random(seed)

    def complete(self, request_text: str) -> str:
        _, roster = _decode_request(request_text)
        scores = {}
        for oid, family in roster:
            options = self.choices.get(oid) or self.choices.get(family)
            scores[oid] = self._rng.choice(options) if options else self.default
        return json.dumps({"scores": scores})


class JitterBackend:
    """Adds bounded uniform noise to another backend's scores (still emits
    well-formed output; values are clamped at the source)."""

    def __init__(self, inner, width: float, seed: int = 0):
        self.inner = inner
        self.width = width
        self.name = inner.name
        self._rng = random.Random(seed)

    def complete(self, request_text: str) -> str:
        raw = self.inner.complete(request_text)
        doc = json.loads(raw)
        noisy = {
            oid: min(1.0, max(0.0, val + self._rng.uniform(-self.width, self.width)))
            for oid, val in doc["scores"].items()
        }
        return json.dumps({"scores": noisy})


class FixtureBackend:
    """Replays recorded raw responses keyed by request hash."""

    name = "fixture"
    FORMAT = "semcost-fixtures"
    VERSION = 1

    def __init__(self, records: list[dict]):
        self._by_hash: dict[str, str] = {}
        for rec in records:
            h = rec["request_hash"]
            if h in self._by_hash and self._by_hash[h] != rec["raw_response"]:
                raise SensorError(f"conflicting fixture records for hash {h}")
            self._by_hash[h] = rec["raw_response"]

    @classmethod
    def from_file(cls, path) -> "FixtureBackend":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SensorError(f"fixture file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != cls.FORMAT or doc.get("version") != cls.VERSION:
            raise SensorError(f"unrecognized fixture file format in {path}")
        return cls(doc["records"])

    @staticmethod
    def record(backend, requests: list[str]) -> list[dict]:
        """Capture another backend's responses as replayable records."""
        return [
            {"request_hash": request_hash(req), "raw_response": backend.complete(req)}
            for req in requests
        ]

    @staticmethod
    def write_file(path, records: list[dict]) -> None:
        doc = {"format": FixtureBackend.FORMAT, "version": FixtureBackend.VERSION, "records": records}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)

    def complete(self, request_text: str) -> str:
        h = request_hash(request_text)
        if h not in self._by_hash:
            raise SensorTransportError(f"no fixture recorded for request hash {h}")
        return self._by_hash[h]


class HttpBackend:
    """Live chat-completion endpoint: POST {base_url}/v1/chat/completions
    with a bearer token from SEMCOST_LLM_KEY."""

    name = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        temperature: float = 1.0,
        top_p: float = 1.0,
        timeout: float = 30.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("SEMCOST_LLM_KEY", "")
        self.temperature = temperature
        self.top_p = top_p
        self.timeout = timeout

    def complete(self, request_text: str) -> str:
        import httpx

        doc = json.loads(request_text)
        body = {
            "model": self.model,
            "messages": doc["messages"],
            "temperature": self.temperature,
            "top_p": self.top_p,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        try:
            resp = httpx.post(
                f"{self.base_url}/v1/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise SensorTransportError(f"chat completion request failed: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise SensorTransportError(f"unexpected chat completion payload: {exc}") from exc


def score_obstacles(query: SensorQuery, backend, retries: int = RETRIES) -> SensorResponse:
    """One sensor pass: returns exactly one reading per queried obstacle.

    Out-of-range numeric scores are clamped into [0, 1] and flagged;
    malformed or incomplete output is retried, then raised with no reading
    emitted at all.
    """
    request = build_request(query)
    expected = sorted(oid for oid, _ in query.obstacles)
    last_error: SensorError | None = None
    for _ in range(max(1, retries)):
        try:
            raw = backend.complete(request)
            scores = parse_scores(raw, expected)
        except (SensorTransportError, SensorParseError) as exc:
            last_error = exc
            continue
        clamped = []
        readings = []
        for oid in expected:
            value = scores[oid]
            if value < 0.0 or value > 1.0:
                clamped.append(oid)
                value = min(1.0, max(0.0, value))
            readings.append(DangerReading(obstacle_id=oid, score=value, prompt_id=query.prompt_id))
        return SensorResponse(
            readings=tuple(readings),
            raw=raw,
            backend=getattr(backend, "name", "mock"),
            clamped=tuple(clamped),
        )
    assert last_error is not None
    raise last_error


def ablation_run(query: SensorQuery, backend, runs: int, fusion: FusionParams) -> dict[str, dict[str, float]]:
    """Repeated independent sensor passes, each fused onto a fresh prior;
    reports the sample mean and standard deviation of the posterior means."""
    if runs < 2:
        raise SensorError("ablation needs at least 2 runs")
    samples: dict[str, list[float]] = {oid: [] for oid, _ in query.obstacles}
    for _ in range(runs):
        response = score_obstacles(query, backend)
        for reading in response.readings:
            state = update(reset(fusion), reading.score, fusion.trust_n)
            samples[reading.obstacle_id].append(state.mean())
    out = {}
    for oid, values in samples.items():
        n = len(values)
        mean = sum(values) / n
        if all(v == values[0] for v in values):
            std = 0.0  # deterministic backend: exactly zero, no rounding dust
        else:
            std = (sum((v - mean) ** 2 for v in values) / (n - 1)) ** 0.5
        out[oid] = {"mean": mean, "std": std}
    return out


def trust_sweep(query: SensorQuery, backend, n_values: list[float], fusion: FusionParams) -> dict[str, list[dict]]:
    """Posterior mean after one prompt as a function of the trust knob."""
    if not n_values:
        raise SensorError("trust sweep needs at least one N value")
    if any(n < 0 for n in n_values):
        raise SensorError("trust values must be >= 0")
    curves: dict[str, list[dict]] = {oid: [] for oid, _ in query.obstacles}
    for n in n_values:
        response = score_obstacles(query, backend)
        for reading in response.readings:
            state = update(reset(fusion), reading.score, n)
            curves[reading.obstacle_id].append({"n": float(n), "mean": state.mean()})
    return curves
