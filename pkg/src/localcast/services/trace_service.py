import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Iterator, List

from src.localcast.core.config import logger
from src.localcast.models.outcome import SlotOutcome, Trace
from src.localcast.schemas.trace import SUMMARY_COLUMNS, NodeSummary
from src.localcast.services.lowerbound import BOUND_COLUMNS, BoundRow


def serialize_outcome(outcome: SlotOutcome) -> dict:
    return {
        "t": outcome.slot,
        "tx": sorted(outcome.transmitters),
        "decodes": {str(rx): tx for rx, tx in sorted(outcome.decodes.items())},
        "lp": sorted(outcome.low_power),
    }


def serialize_node(trace: Trace, node_id: int) -> dict:
    return {
        "node": node_id,
        "first_success": trace.first_success[node_id],
        "halt_slot": trace.halt_slot[node_id],
        "halt_reason": trace.halt_reason[node_id].value,
        "fallbacks": trace.fallback_counts[node_id],
        "N_x": trace.n_x[node_id],
    }


def trace_records(trace: Trace) -> Iterator[dict]:
    for outcome in trace.outcomes:
        yield serialize_outcome(outcome)
    for node_id in sorted(trace.first_success):
        yield serialize_node(trace, node_id)


def write_jsonl(records: Iterable[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def write_trace_jsonl(trace: Trace, path: Path) -> None:
    """
    Write a trace as JSONL: one record per slot, then one summary per node.

    Args:
        trace: Trace recorded with record_outcomes=True
        path: Output file
    """
    write_jsonl(trace_records(trace), path)
    logger.info(f"Trace written to {path} ({len(trace.outcomes)} slots)")


def read_jsonl(path: Path) -> List[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def read_trace_jsonl(path: Path) -> List[dict]:
    return read_jsonl(path)


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _cell(value) -> str:
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_summary_csv(rows: Iterable[NodeSummary], path: Path) -> None:
    """Write summary rows; None becomes an empty cell."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        count = 0
        for row in rows:
            writer.writerow([_cell(getattr(row, column)) for column in SUMMARY_COLUMNS])
            count += 1
    logger.info(f"Summary written to {path} ({count} rows)")


def read_summary_csv(path: Path) -> List[NodeSummary]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            NodeSummary.model_validate({k: (v if v != "" else None) for k, v in record.items()})
            for record in reader
        ]


def write_summary_jsonl(rows: Iterable[NodeSummary], path: Path) -> None:
    write_jsonl((row.model_dump(mode="json") for row in rows), path)
    logger.info(f"Summary written to {path}")


def read_summary_jsonl(path: Path) -> List[NodeSummary]:
    return [NodeSummary.model_validate(record) for record in read_jsonl(path)]


def read_summary(path: Path) -> List[NodeSummary]:
    """Summary rows from a .jsonl file or, for any other suffix, a CSV file."""
    if Path(path).suffix == ".jsonl":
        return read_summary_jsonl(path)
    return read_summary_csv(path)


def _bound_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def write_bound_csv(rows: Iterable[BoundRow], path: Path) -> None:
    """Per-slot lower-bound records; floats keep full precision."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BOUND_COLUMNS)
        for row in rows:
            writer.writerow([_bound_cell(getattr(row, column)) for column in BOUND_COLUMNS])
    logger.info(f"Bound table written to {path}")


def read_bound_csv(path: Path) -> List[BoundRow]:
    with open(path, encoding="utf-8", newline="") as f:
        return [
            BoundRow(
                t=int(record["t"]),
                p_t=float(record["p_t"]),
                range_i=int(record["range_i"]),
                exact_cond_prob=float(record["exact_cond_prob"]),
                bound=float(record["bound"]),
                holds=record["holds"] == "true",
                cumulative_exact=float(record["cumulative_exact"]),
                cumulative_bound=float(record["cumulative_bound"]),
            )
            for record in csv.DictReader(f)
        ]


def write_bound_jsonl(rows: Iterable[BoundRow], path: Path) -> None:
    write_jsonl((asdict(row) for row in rows), path)
    logger.info(f"Bound table written to {path}")


def read_bound_jsonl(path: Path) -> List[BoundRow]:
    return [BoundRow(**record) for record in read_jsonl(path)]
