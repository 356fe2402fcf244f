"""Acceptance suite: the properties and scenarios the platform must hold.

Every test funnels into report(), which prints one PASS/FAIL line per
criterion so a full run reads as a checklist, then asserts. Randomness is
seeded so failures replay exactly.
"""

import json
import random
import re
import string
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timedelta, timezone

from smellhunter._util import format_number
from smellhunter.bus import EventKind
from smellhunter.dsl import (
    And,
    CmpOp,
    Compare,
    Literal,
    MetricRef,
    Not,
    Or,
    Severity,
    SmellDefinition,
    SmellScript,
    ThresholdRef,
    evaluate,
    parse_script,
    pretty_print,
)
from smellhunter.inputs import (
    AnalysisRequest,
    parse_metadata,
    parse_metric_table,
    parse_thresholds,
)
from smellhunter.platform import Platform
from smellhunter.store import (
    ContextHistoryStore,
    DetectionFilter,
    DetectionRecord,
    ExecutionRecord,
    ExecutionStatus,
)

from tests.conftest import (
    GOD_CLASS_SCRIPT,
    METADATA_JSON,
    METRICS_CSV,
    THRESHOLDS_JSON,
    multipart,
)

BASE = datetime(2026, 8, 1, tzinfo=timezone.utc)

KEYWORDS = {"smell", "severity", "when", "and", "or", "not"}


def report(capsys, name, failures, detail=""):
    verdict = "PASS" if not failures else "FAIL"
    tail = f" ({detail})" if detail else ""
    with capsys.disabled():
        print(f"acceptance: {name}: {verdict}{tail}")
    assert not failures, f"{name}: first failures: {failures[:5]}"


def wait_stage(client, correlation_id, wanted, budget=5.0):
    deadline = time.monotonic() + budget
    body = client.get(f"/analyses/{correlation_id}").json()
    while body["stage"] not in wanted and time.monotonic() < deadline:
        time.sleep(0.02)
        body = client.get(f"/analyses/{correlation_id}").json()
    return body


def valid_request(script=GOD_CLASS_SCRIPT, metrics_csv=METRICS_CSV):
    return AnalysisRequest(
        script_source=script,
        metrics=parse_metric_table(metrics_csv),
        thresholds=parse_thresholds(THRESHOLDS_JSON),
        metadata=parse_metadata(METADATA_JSON),
    )


# ---------------------------------------------------------------------------
# 1. interpreter oracle
# ---------------------------------------------------------------------------

METRIC_NAMES = ("wmc", "atfd", "tcc", "loc")

# repeats on purpose: equal operands make == and != do real work
VALUE_POOL = (0.0, 1.0, -1.0, 2.5, 7.0, 10.0, -3.25, 100.0)


def random_operand(rng):
    if rng.random() < 0.55:
        return MetricRef(rng.choice(METRIC_NAMES))
    return Literal(rng.choice(VALUE_POOL))


def random_condition(rng, depth):
    if depth <= 0 or rng.random() < 0.35:
        return Compare(random_operand(rng), rng.choice(list(CmpOp)), random_operand(rng))
    roll = rng.random()
    if roll < 0.25:
        return Not(random_condition(rng, depth - 1))
    children = tuple(
        random_condition(rng, depth - 1) for _ in range(rng.randint(2, 3))
    )
    return And(children) if roll < 0.65 else Or(children)


def python_source(expr):
    """Translate a condition into a Python expression for eval().

    This is the independent oracle: the Python interpreter computes the
    truth value, none of the evaluation code under test is involved.
    """
    if isinstance(expr, Compare):
        def side(operand):
            return operand.name if isinstance(operand, MetricRef) else repr(operand.value)

        return f"({side(expr.lhs)} {expr.op.value} {side(expr.rhs)})"
    if isinstance(expr, Not):
        return f"(not {python_source(expr.child)})"
    joiner = " and " if isinstance(expr, And) else " or "
    return "(" + joiner.join(python_source(c) for c in expr.children) + ")"


def test_interpreter_matches_independent_truth_oracle(capsys):
    rng = random.Random(20260816)
    failures = []
    started = time.perf_counter()
    total = 10_000
    for index in range(total):
        expr = random_condition(rng, rng.randint(1, 4))
        values = {name: rng.choice(VALUE_POOL) for name in METRIC_NAMES}
        source = python_source(expr)
        expected = bool(eval(source, {"__builtins__": {}}, dict(values)))
        if bool(evaluate(expr, values)) != expected:
            failures.append((index, source, values))
    elapsed = time.perf_counter() - started
    if elapsed >= 10.0:
        failures.append(f"too slow: {elapsed:.1f}s")
    report(
        capsys,
        "interpreter oracle",
        failures,
        f"{total} expressions agreed in {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 2. parser round-trip
# ---------------------------------------------------------------------------


def random_ident(rng, prefix=""):
    while True:
        name = prefix + "".join(
            rng.choice(string.ascii_lowercase) for _ in range(rng.randint(2, 9))
        )
        if rng.random() < 0.25:
            name = name.capitalize()
        if rng.random() < 0.15:
            name += str(rng.randint(0, 99))
        if name not in KEYWORDS:
            return name


def full_operand(rng):
    roll = rng.random()
    if roll < 0.45:
        return MetricRef(random_ident(rng))
    if roll < 0.75:
        return ThresholdRef(random_ident(rng).upper())
    return Literal(rng.choice((0, 1, -1, 2.5, 7, 10, -3.25, 100, 0.333)))


def full_condition(rng, depth):
    if depth <= 0 or rng.random() < 0.35:
        return Compare(full_operand(rng), rng.choice(list(CmpOp)), full_operand(rng))
    roll = rng.random()
    if roll < 0.25:
        return Not(full_condition(rng, depth - 1))
    children = tuple(full_condition(rng, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(children) if roll < 0.65 else Or(children)


def random_script(rng):
    taken = set()
    definitions = []
    for _ in range(rng.randint(1, 5)):
        name = random_ident(rng, prefix="S")
        while name in taken:
            name = random_ident(rng, prefix="S")
        taken.add(name)
        definitions.append(
            SmellDefinition(
                name=name,
                severity=rng.choice(list(Severity)),
                condition=full_condition(rng, rng.randint(1, 4)),
            )
        )
    return SmellScript(tuple(definitions))


def pad(rng, least=0):
    """Random inter-token noise: spacing, sometimes a comment line."""
    text = " " * rng.randint(least, least + 2)
    if rng.random() < 0.08:
        text += "# " + rng.choice(("todo", "tuned by hand", "see review")) + "\n"
        text += " " * rng.randint(0, 6)
    return text


_LEVEL = {Or: 1, And: 2, Not: 3, Compare: 4}


def noisy_expr(rng, expr, parent_level):
    """Render with random surface noise while preserving the tree shape."""
    level = _LEVEL[type(expr)]
    if isinstance(expr, Compare):
        def operand(op):
            if isinstance(op, MetricRef):
                return op.name
            if isinstance(op, ThresholdRef):
                return "$" + op.name
            return format_number(op.value)

        text = (
            operand(expr.lhs)
            + pad(rng)
            + expr.op.value
            + pad(rng)
            + operand(expr.rhs)
        )
    elif isinstance(expr, Not):
        text = "not" + pad(rng, least=1) + noisy_expr(rng, expr.child, level)
    else:
        word = "and" if isinstance(expr, And) else "or"
        joiner = pad(rng, least=1) + word + pad(rng, least=1)
        text = joiner.join(noisy_expr(rng, child, level) for child in expr.children)

    required = level < parent_level or (
        level == parent_level and not isinstance(expr, Not)
    )
    if required or rng.random() < 0.3:
        text = f"({pad(rng)}{text}{pad(rng)})"
    while rng.random() < 0.1:
        text = f"({text})"
    return text


def noisy_script(rng, script):
    blocks = []
    for definition in script.definitions:
        lines = [f"smell{pad(rng, 1)}{definition.name}{pad(rng)}{{"]
        if definition.severity is not Severity.MEDIUM or rng.random() < 0.5:
            lines.append(
                f"{pad(rng)}severity{pad(rng, 1)}{definition.severity.value}"
            )
        lines.append(
            f"{pad(rng)}when{pad(rng, 1)}{noisy_expr(rng, definition.condition, 0)}"
        )
        lines.append("}")
        blocks.append("\n".join(lines))
    return ("\n" * rng.randint(1, 3)).join(blocks) + "\n"


def test_parser_round_trips_generated_scripts(capsys):
    rng = random.Random(8451)
    failures = []
    total = 200
    for index in range(total):
        script = random_script(rng)
        source = noisy_script(rng, script)
        try:
            first = parse_script(source)
        except Exception as exc:
            failures.append(f"script {index} did not parse: {exc}\n{source}")
            continue
        if first != script:
            failures.append(f"script {index}: noisy rendering reshaped the tree")
            continue
        again = parse_script(pretty_print(first))
        if again != first:
            failures.append(f"script {index}: canonical text reshaped the tree")
    report(capsys, "parser round-trip", failures, f"{total} scripts")


# ---------------------------------------------------------------------------
# 3. flagship smell found end to end
# ---------------------------------------------------------------------------


def test_god_class_is_found_end_to_end_within_budget(client, platform, capsys):
    failures = []
    started = time.perf_counter()
    response = client.post("/analyses", files=multipart())
    if response.status_code != 202:
        failures.append(f"submission refused: {response.status_code}")
    else:
        correlation_id = response.json()["correlation_id"]
        body = wait_stage(client, correlation_id, {"persisted", "failed"})
        elapsed = time.perf_counter() - started
        if body["stage"] != "persisted":
            failures.append(f"run ended at stage {body['stage']}: {body}")
        if elapsed >= 5.0:
            failures.append(f"took {elapsed:.2f}s")
        records = platform.store.query_detections(DetectionFilter()).items
        if len(records) != 1:
            failures.append(f"expected exactly one record, got {len(records)}")
        else:
            record = records[0]
            if record.smell_name != "GodClass":
                failures.append(f"smell was {record.smell_name}")
            if record.severity is not Severity.HIGH:
                failures.append(f"severity was {record.severity}")
            if record.entity_id != "OrderManager":
                failures.append(f"entity was {record.entity_id}")
    report(
        capsys,
        "god-class end-to-end",
        failures,
        f"one high-severity hit in {time.perf_counter() - started:.2f}s",
    )


# ---------------------------------------------------------------------------
# 4. three-run history
# ---------------------------------------------------------------------------

QUIET_BEFORE = (
    "smell EmptyHusk {\n"
    "  severity low\n"
    "  when wmc < 1 and atfd < 1\n"
    "}\n"
)

QUIET_AFTER = "smell TangledWeb {\n  when tcc > 0.95\n}\n"


def test_three_run_history_orders_newest_first_with_one_hit(client, capsys):
    failures = []
    submitted = []
    for script in (QUIET_BEFORE, GOD_CLASS_SCRIPT, QUIET_AFTER):
        response = client.post(
            "/analyses", files=multipart(script=script.encode())
        )
        correlation_id = response.json()["correlation_id"]
        body = wait_stage(client, correlation_id, {"persisted", "failed"})
        if body["stage"] != "persisted":
            failures.append(f"run {correlation_id} ended {body['stage']}")
        submitted.append(correlation_id)

    listing = client.get("/executions").json()
    if listing["total"] != 3:
        failures.append(f"expected 3 executions, got {listing['total']}")
    items = listing["items"]
    if [item["correlation_id"] for item in items] != list(reversed(submitted)):
        failures.append("history is not newest-first by submission order")
    stamps = [item["executed_at"] for item in items]
    if stamps != sorted(stamps, reverse=True):
        failures.append(f"timestamps not descending: {stamps}")
    flags = [item["smell_detected"] for item in items]
    if flags.count(True) != 1:
        failures.append(f"expected one flagged run, flags were {flags}")
    if flags != [False, True, False]:
        failures.append(f"the flagged run is not the middle submission: {flags}")
    names = [item["script_name"] for item in items]
    if names != ["TangledWeb", "GodClass", "EmptyHusk"]:
        failures.append(f"script names off: {names}")
    report(capsys, "execution history", failures, "3 runs, 1 flagged, newest first")


# ---------------------------------------------------------------------------
# 5. concurrent trace shape
# ---------------------------------------------------------------------------

HAPPY_CHAIN = (
    EventKind.ANALYSIS_REQUESTED,
    EventKind.VALIDATION_COMPLETED,
    EventKind.INTERPRETATION_COMPLETED,
    EventKind.PERSISTENCE_COMPLETED,
)

REJECTED_CHAIN = (EventKind.ANALYSIS_REQUESTED, EventKind.VALIDATION_FAILED)


def defective_requests():
    good = valid_request()
    return (
        valid_request(script="smell Broken {"),
        valid_request(script="smell Lost {\n  when phantom_metric > 1\n}\n"),
        valid_request(script="smell Bare {\n  when wmc > $NEVER_SET\n}\n"),
        replace(good, metadata=replace(good.metadata, org_id="   ")),
        replace(good, metadata=replace(good.metadata, longitude=None)),
    )


def test_hundred_concurrent_submissions_keep_trace_shape(tmp_path, capsys):
    rng = random.Random(3604)
    defects = defective_requests()
    tagged = [
        (True, valid_request()) if rng.random() < 0.55 else (False, rng.choice(defects))
        for _ in range(100)
    ]
    failures = []
    with Platform(tmp_path / "store") as platform:
        with ThreadPoolExecutor(max_workers=12) as pool:
            ids = list(pool.map(platform.submit, (req for _, req in tagged)))
        if not platform.wait_idle(30.0):
            failures.append("bus never went idle")

        for (is_valid, _), correlation_id in zip(tagged, ids):
            trace = platform.trace(correlation_id)
            kinds = tuple(envelope.kind for envelope in trace)
            if kinds != HAPPY_CHAIN[: len(kinds)] and kinds != REJECTED_CHAIN:
                failures.append(f"{correlation_id}: illegal trace {kinds}")
            wanted = HAPPY_CHAIN if is_valid else REJECTED_CHAIN
            if kinds != wanted:
                failures.append(
                    f"{correlation_id}: expected {wanted}, got {kinds}"
                )
            sequences = [envelope.sequence for envelope in trace]
            if sequences != list(range(1, len(trace) + 1)):
                failures.append(f"{correlation_id}: sequences {sequences}")
            if platform.annotations(correlation_id):
                failures.append(f"{correlation_id}: unexpected handler faults")

        kind_counts = Counter(
            envelope.kind
            for correlation_id in ids
            for envelope in platform.trace(correlation_id)
        )
        published = sum(kind_counts.values())
        if platform.bus.published_count != published:
            failures.append(
                f"published {platform.bus.published_count} != traced {published}"
            )
        # one subscriber per kind except the final acknowledgement
        expected_deliveries = published - kind_counts[EventKind.PERSISTENCE_COMPLETED]
        if platform.bus.delivered_count != expected_deliveries:
            failures.append(
                f"delivered {platform.bus.delivered_count}, "
                f"expected {expected_deliveries}"
            )
        valid_count = sum(1 for is_valid, _ in tagged if is_valid)
        completed = platform.store.execution_history(limit=1000).items
        done = sum(1 for r in completed if r.status is ExecutionStatus.COMPLETED)
        if done != valid_count:
            failures.append(f"{valid_count} valid runs but {done} completed records")
    report(
        capsys,
        "concurrent trace shape",
        failures,
        f"100 submissions, {valid_count} valid, "
        f"{platform.bus.delivered_count} deliveries",
    )


# ---------------------------------------------------------------------------
# 6. conservation across restart
# ---------------------------------------------------------------------------


def random_metrics_csv(rng):
    lines = ["entity_id,wmc,atfd,tcc"]
    for index in range(3):
        lines.append(
            f"E{index},{rng.randint(30, 60)},{rng.randint(0, 10)},"
            f"{rng.random():.2f}"
        )
    return "\n".join(lines) + "\n"


def conservation_gap(store):
    executions = store.execution_history(limit=1000).items
    return sum(r.detection_count for r in executions) - store.detection_count()


def test_detection_counts_are_conserved_across_restart(tmp_path, capsys):
    rng = random.Random(1297)
    failures = []
    store_dir = tmp_path / "store"
    with Platform(store_dir) as platform:
        for _ in range(40):
            if rng.random() < 0.25:
                platform.submit(valid_request(script="smell Broken {"))
            else:
                platform.submit(valid_request(metrics_csv=random_metrics_csv(rng)))
        if not platform.wait_idle(30.0):
            failures.append("bus never went idle")
        if conservation_gap(platform.store) != 0:
            failures.append("counts diverged before restart")
        before = platform.store.dump()

    with ContextHistoryStore(store_dir) as reopened:
        if conservation_gap(reopened) != 0:
            failures.append("counts diverged after restart")
        after = reopened.dump()
        if after != before:
            failures.append("restart changed the stored records")
        executions = len(after["executions"])
        detections = len(after["detections"])
        if executions != 40:
            failures.append(f"expected 40 executions, found {executions}")
    report(
        capsys,
        "detection conservation",
        failures,
        f"40 runs, {detections} detections, restart survived",
    )


# ---------------------------------------------------------------------------
# 7. query oracle
# ---------------------------------------------------------------------------

SMELL_POOL = ("GodClass", "FeatureEnvy", "DataClass", "ShotgunSurgery", "LongMethod")
ORG_POOL = ("acme", "globex", "initech")
PROJECT_POOL = ("shop", "billing", "etl")
SPOT_POOL = ((48.1, 11.5), (-33.9, 18.4), (40.7, -74.0), (0.0, 0.0), (None, None))


def seed_query_store(rng, store, size, tag):
    ids = [f"{tag}{n:04d}" for n in range(size)]
    rng.shuffle(ids)
    # a small minute pool forces timestamp collisions, so ordering tiebreaks
    # actually get exercised
    minute_pool = [rng.randint(0, 4000) for _ in range(max(8, size // 6))]
    world = []
    run_no = 0
    while ids:
        cut = rng.randint(1, 20)
        batch, ids = ids[:cut], ids[cut:]
        correlation = f"{tag}run{run_no}"
        run_no += 1
        records = []
        for record_id in batch:
            latitude, longitude = rng.choice(SPOT_POOL)
            records.append(
                DetectionRecord(
                    record_id=record_id,
                    correlation_id=correlation,
                    smell_name=rng.choice(SMELL_POOL),
                    severity=rng.choice(list(Severity)),
                    entity_id=f"C{rng.randint(0, 30)}",
                    detected_at=BASE + timedelta(minutes=rng.choice(minute_pool)),
                    user_id="u",
                    org_id=rng.choice(ORG_POOL),
                    project_id=rng.choice(PROJECT_POOL),
                    file_path="src/a.py",
                    language="python",
                    latitude=latitude,
                    longitude=longitude,
                )
            )
        store.record_run(
            ExecutionRecord(
                correlation_id=correlation,
                script_name="Sweep",
                project_id=records[0].project_id,
                executed_at=BASE,
                status=ExecutionStatus.COMPLETED,
                detection_count=len(records),
            ),
            tuple(records),
        )
        world.extend(records)
    return world


def random_criteria(rng):
    params = {}
    if rng.random() < 0.4:
        params["smell"] = rng.choice(SMELL_POOL + ("NothingEver",))
    if rng.random() < 0.3:
        params["severity"] = rng.choice(list(Severity))
    if rng.random() < 0.3:
        params["org_id"] = rng.choice(ORG_POOL + ("ghost",))
    if rng.random() < 0.3:
        params["project_id"] = rng.choice(PROJECT_POOL)
    if rng.random() < 0.3:
        lats = sorted((rng.uniform(-90, 90), rng.uniform(-90, 90)))
        lons = sorted((rng.uniform(-180, 180), rng.uniform(-180, 180)))
        params["bbox"] = (lats[0], lats[1], lons[0], lons[1])
    if rng.random() < 0.3:
        start = BASE + timedelta(minutes=rng.randint(0, 4000))
        if rng.random() < 0.5:
            params["from"] = start
        params["to"] = start + timedelta(minutes=rng.randint(1, 2500))
    criteria = DetectionFilter(
        smell=params.get("smell"),
        severity=params.get("severity"),
        org_id=params.get("org_id"),
        project_id=params.get("project_id"),
        bbox=params.get("bbox"),
        detected_from=params.get("from"),
        detected_to=params.get("to"),
    )
    offset = rng.choice((0, 0, 1, 7, 40, 300))
    limit = rng.choice((1, 3, 10, 50, 1000))
    return params, criteria, offset, limit


def oracle_match(record, params):
    """Plain restatement of the documented matching rules."""
    if "smell" in params and record.smell_name != params["smell"]:
        return False
    if "severity" in params and record.severity is not params["severity"]:
        return False
    if "org_id" in params and record.org_id != params["org_id"]:
        return False
    if "project_id" in params and record.project_id != params["project_id"]:
        return False
    if "bbox" in params:
        if record.latitude is None or record.longitude is None:
            return False
        min_lat, max_lat, min_lon, max_lon = params["bbox"]
        if not (min_lat <= record.latitude <= max_lat):
            return False
        if not (min_lon <= record.longitude <= max_lon):
            return False
    if "from" in params and record.detected_at < params["from"]:
        return False
    if "to" in params and record.detected_at >= params["to"]:
        return False
    return True


def test_random_queries_match_linear_scan_oracle(tmp_path, capsys):
    rng = random.Random(555)
    failures = []
    compared = 0
    for store_index, size in enumerate((60, 240, 500)):
        with ContextHistoryStore(tmp_path / f"store{store_index}") as store:
            world = seed_query_store(rng, store, size, f"s{store_index}o")
            for _ in range(25):
                params, criteria, offset, limit = random_criteria(rng)
                matching = sorted(
                    (r for r in world if oracle_match(r, params)),
                    key=lambda r: (-r.detected_at.timestamp(), r.record_id),
                )
                page = store.query_detections(criteria, offset, limit)
                compared += 1
                if page.total != len(matching):
                    failures.append(
                        f"total {page.total} != {len(matching)} for {params}"
                    )
                    continue
                wanted = [r.record_id for r in matching[offset : offset + limit]]
                got = [r.record_id for r in page.items]
                if got != wanted:
                    failures.append(f"page mismatch for {params}: {got} {wanted}")
                counted = store.histogram(criteria)
                if counted != dict(Counter(r.smell_name for r in matching)):
                    failures.append(f"histogram mismatch for {params}")
                if sum(counted.values()) != page.total:
                    failures.append(f"histogram total drifted for {params}")
    report(
        capsys,
        "query oracle",
        failures,
        f"{compared} filters over 3 stores up to 500 records",
    )


# ---------------------------------------------------------------------------
# 8. validation fuzz
# ---------------------------------------------------------------------------

_SCRIPT_BREAKS = (
    lambda s: s.replace("when", "wen", 1),
    lambda s: s.replace("{", "", 1),
    lambda s: s.replace("}", "", 1),
    lambda s: s.replace(">=", "=", 1),
    lambda s: s.replace("and", "&&", 1),
    lambda s: s.replace("$WMC_VERY_HIGH", "$ WMC_VERY_HIGH", 1),
    lambda s: s.replace("smell", "smelt", 1),
    lambda s: s + s,  # same definition twice
    lambda s: "",
    lambda s: s.replace("high", "urgent", 1),
    lambda s: s.replace("wmc >=", "wmc >= tcc >=", 1),  # chained comparison
)


def corrupt_script(rng):
    breaker = rng.choice(_SCRIPT_BREAKS)
    return {"script": breaker(GOD_CLASS_SCRIPT).encode()}, "script corruption"


def drop_metric_column(rng):
    column = rng.choice(("wmc", "atfd", "tcc"))
    lines = METRICS_CSV.strip().split("\n")
    index = lines[0].split(",").index(column)
    rebuilt = "\n".join(
        ",".join(cell for i, cell in enumerate(line.split(",")) if i != index)
        for line in lines
    )
    return {"metrics": (rebuilt + "\n").encode()}, f"dropped column {column}"


def drop_threshold(rng):
    values = json.loads(THRESHOLDS_JSON)
    name = rng.choice(sorted(values))
    del values[name]
    return {"thresholds": json.dumps(values).encode()}, f"dropped threshold {name}"


def break_coordinates(rng):
    values = json.loads(METADATA_JSON)
    mode = rng.randrange(5)
    if mode == 0:
        values["latitude"] = rng.uniform(90.001, 400.0)
    elif mode == 1:
        values["latitude"] = -rng.uniform(90.001, 400.0)
    elif mode == 2:
        values["longitude"] = rng.uniform(180.001, 720.0)
    elif mode == 3:
        del values["longitude"]  # latitude left alone on purpose
    else:
        values["latitude"] = "north"
    return {"metadata": json.dumps(values).encode()}, "broken coordinates"


def corrupt_metric_cell(rng):
    mode = rng.randrange(3)
    if mode == 0:
        broken = METRICS_CSV.replace("50", "fifty", 1)
    elif mode == 1:
        broken = METRICS_CSV.replace("entity_id", "entity", 1)
    else:
        broken = METRICS_CSV.replace("Invoice", "OrderManager", 1)
    return {"metrics": broken.encode()}, "metric table corruption"


def corrupt_threshold_json(rng):
    mode = rng.randrange(3)
    if mode == 0:
        broken = THRESHOLDS_JSON.replace(": 47", ": true", 1)
    elif mode == 1:
        broken = THRESHOLDS_JSON.replace("}", "", 1)
    else:
        broken = THRESHOLDS_JSON.replace('"FEW"', '"FEW" "X"', 1)
    return {"thresholds": broken.encode()}, "threshold text corruption"


MUTATORS = (
    corrupt_script,
    corrupt_script,
    corrupt_script,
    drop_metric_column,
    drop_metric_column,
    drop_threshold,
    drop_threshold,
    break_coordinates,
    break_coordinates,
    corrupt_metric_cell,
    corrupt_threshold_json,
)

_POSITION_IN_MESSAGE = re.compile(r"line \d+, column \d+")


def positioned_http_error(error):
    if any(key in error for key in ("row", "column", "key")):
        return True
    return bool(_POSITION_IN_MESSAGE.search(error.get("message", "")))


def test_five_hundred_mutants_are_all_rejected_with_positions(
    client, platform, capsys
):
    rng = random.Random(99331)
    failures = []
    total = 500
    rejected_at_gateway = 0
    awaiting = []
    for index in range(total):
        overrides, label = rng.choice(MUTATORS)(rng)
        response = client.post("/analyses", files=multipart(**overrides))
        if response.status_code == 400:
            rejected_at_gateway += 1
            errors = response.json()["errors"]
            if not errors:
                failures.append(f"mutant {index} ({label}): empty error list")
            elif not any(positioned_http_error(e) for e in errors):
                failures.append(
                    f"mutant {index} ({label}): no positioned error in {errors}"
                )
        elif response.status_code == 202:
            awaiting.append((index, label, response.json()["correlation_id"]))
        else:
            failures.append(
                f"mutant {index} ({label}): status {response.status_code}"
            )

    if not platform.wait_idle(60.0):
        failures.append("bus never went idle")

    for index, label, correlation_id in awaiting:
        body = client.get(f"/analyses/{correlation_id}").json()
        if body["stage"] != "failed":
            failures.append(
                f"mutant {index} ({label}) reached stage {body['stage']}"
            )
            continue
        diagnostics = body["diagnostics"] or []
        if not diagnostics:
            failures.append(f"mutant {index} ({label}): no diagnostics")
        elif not any(d.get("position") for d in diagnostics):
            failures.append(
                f"mutant {index} ({label}): unpositioned: {diagnostics}"
            )

    if platform.store.detection_count() != 0:
        failures.append("a mutant produced detection records")
    interpreted = [
        correlation_id
        for correlation_id in platform.bus.correlation_ids()
        if any(
            envelope.kind is EventKind.INTERPRETATION_COMPLETED
            for envelope in platform.bus.trace(correlation_id)
        )
    ]
    if interpreted:
        failures.append(f"{len(interpreted)} mutants reached the interpreter")
    report(
        capsys,
        "validation fuzz",
        failures,
        f"{total} mutants: {rejected_at_gateway} stopped at the gateway, "
        f"{len(awaiting)} at validation, 0 interpreted",
    )
