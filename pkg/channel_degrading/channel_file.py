"""
________________________________________________________________________

:PROJECT: channel_degrading

*Channel File*

:details: Channel File:
    Reading and writing channel files and degrade reports (JSON)

:file:    channel_file.py

________________________________________________________________________
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import jsonschema.exceptions
import safer

from . import resource_dir
from .channel import Channel, DegradeReport, InputDistribution, apply_degrading_map
from .configuration import Configuration
from .errors import InvalidChannelError

CHANNEL_SCHEMA_FILE_NAME = "channel_schema.json"
SCHEMA: Dict
with open(Path(resource_dir).joinpath(CHANNEL_SCHEMA_FILE_NAME), "rt") as schema_file:
    SCHEMA = json.load(schema_file)

__all__ = ["SCHEMA", "ChannelFile", "channel_document", "report_document", "write_channel", "write_report"]

logger = logging.getLogger(__name__)


def _non_finite_path(value: Any, path: List[Any]) -> Optional[List[Any]]:
    """
    Returns the JSON path of the first NaN or infinite number in `value`, or None
    """
    if isinstance(value, float) and not math.isfinite(value):
        return path
    if isinstance(value, dict):
        items = value.items()
    elif isinstance(value, list):
        items = enumerate(value)
    else:
        return None
    for key, item in items:
        found = _non_finite_path(item, path + [key])
        if found is not None:
            return found
    return None


def _field_name(path: Sequence[Any]) -> str:
    """
    Formats a JSON path like ['channel', 1, 2] as 'channel[1][2]'
    """
    if not path:
        return "<document>"
    head, *rest = path
    return str(head) + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in rest)


class ChannelFile(Configuration):
    """
    A channel file: a JSON document with the input distribution `input_dist` and the transition matrix `channel`

    Parsing validates the document against the JSON schema and the entries against the probability constraints. Any
    problem is raised as `InvalidChannelError` naming the first invalid field.
    """

    __channel: Channel
    __input_dist: InputDistribution

    def __init__(self, file_path: Path) -> None:
        super().__init__(Path(file_path).stem, file_path)

    def _parse(self) -> None:
        try:
            with open(self._file_path, "r") as channel_file:
                document: dict = json.load(channel_file)
            non_finite = _non_finite_path(document, [])
            if non_finite is not None:
                raise InvalidChannelError(_field_name(non_finite), "NaN and infinite entries are not probabilities")
            jsonschema.validate(document, SCHEMA)
            self.__input_dist = InputDistribution(document["input_dist"])
            self.__channel = Channel(document["channel"])
        except InvalidChannelError:
            raise
        except jsonschema.exceptions.ValidationError as err:
            raise InvalidChannelError(_field_name(list(err.absolute_path)), err.message)
        except (OSError, ValueError) as err:
            raise InvalidChannelError("<document>", f"Channel file {self._file_path} is invalid: {err}")
        if self.__channel.num_inputs != self.__input_dist.num_inputs:
            raise InvalidChannelError(
                "channel",
                f"has {self.__channel.num_inputs} rows but input_dist has {self.__input_dist.num_inputs} entries",
            )
        logger.debug(f"Read {self.__channel!r} from {self._file_path}")

    @property
    def channel(self) -> Channel:
        return self.__channel

    @property
    def input_dist(self) -> InputDistribution:
        return self.__input_dist

    def __str__(self) -> str:
        return super().__repr__() + f", |X| = {self.__channel.num_inputs}, |Y| = {self.__channel.num_outputs}"


def channel_document(channel: Channel, input_dist: InputDistribution) -> Dict[str, Any]:
    return {"input_dist": input_dist.probs.tolist(), "channel": channel.rows.tolist()}


def report_document(
    report: DegradeReport,
    channel: Channel,
    input_dist: InputDistribution,
    bounds: Optional[Sequence[Optional[float]]] = None,
) -> Dict[str, Any]:
    """
    The JSON document of a degrade report

    Parameters
    ----------
    report: DegradeReport
        The report to serialize
    channel: Channel
        The original channel, the merged channel is obtained by applying the report's map to it
    input_dist: InputDistribution
        The input distribution of the channel
    bounds: Sequence[Optional[float]]
        (optional) The per-step bound values to add to the step records as `bound`
    """
    steps = []
    for i, step in enumerate(report.steps):
        record: Dict[str, Any] = {"a": step.a, "b": step.b, "delta": step.delta, "size_before": step.size_before}
        if bounds is not None:
            record["bound"] = bounds[i]
        steps.append(record)
    return {
        "map": report.map.assignment.tolist(),
        "total_delta_nats": report.total_delta,
        "steps": steps,
        **channel_document(apply_degrading_map(channel, report.map), input_dist),
    }


def _write(file_path: Path, document: Dict[str, Any]) -> None:
    with safer.open(file_path, "w", delete_failures=False) as out_file:
        json.dump(document, out_file, indent=4, allow_nan=False)
        out_file.write("\n")
    logger.info(f"Wrote {file_path}")


def write_channel(file_path: Path, channel: Channel, input_dist: InputDistribution) -> None:
    _write(file_path, channel_document(channel, input_dist))


def write_report(
    file_path: Path,
    report: DegradeReport,
    channel: Channel,
    input_dist: InputDistribution,
    bounds: Optional[Sequence[Optional[float]]] = None,
) -> None:
    _write(file_path, report_document(report, channel, input_dist, bounds))
