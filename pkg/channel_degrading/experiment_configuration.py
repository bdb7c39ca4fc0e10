from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import jsonschema
import jsonschema.exceptions

from . import resource_dir
from .configuration import Configuration
from .errors import InvalidChannelError

EXPERIMENT_SCHEMA_FILE_NAME = "experiment_schema.json"
SCHEMA: Dict
with open(Path(resource_dir).joinpath(EXPERIMENT_SCHEMA_FILE_NAME), "rt") as schema_file:
    SCHEMA = json.load(schema_file)

__all__ = ["SCHEMA", "ExperimentConfig"]

logger = logging.getLogger(__name__)


class ExperimentConfig(Configuration):
    """
    The configuration of a power-law sweep

    It parses (and thus represents the contents of) an optional experiment JSON file. Values not given in the file
    take the defaults from the JSON schema; CLI options overwrite them through the property setters.
    """

    __num_inputs: int
    __num_outputs: int
    __L_values: List[int]
    __num_trials: int
    __seed: int
    __output_path: Path
    __workers: int
    __log_level: str

    __SCHEMA_PROPERTIES = SCHEMA["definitions"]["ExperimentConfig"]["properties"]
    DEFAULT_NUM_INPUTS: int = int(__SCHEMA_PROPERTIES["num_inputs"]["default"])
    DEFAULT_NUM_OUTPUTS: int = int(__SCHEMA_PROPERTIES["num_outputs"]["default"])
    DEFAULT_L_VALUES: List[int] = list(__SCHEMA_PROPERTIES["L_values"]["default"])
    DEFAULT_NUM_TRIALS: int = int(__SCHEMA_PROPERTIES["num_trials"]["default"])
    DEFAULT_SEED: int = int(__SCHEMA_PROPERTIES["seed"]["default"])
    DEFAULT_OUTPUT_PATH: Path = Path(__SCHEMA_PROPERTIES["output_path"]["default"])
    DEFAULT_WORKERS: int = int(__SCHEMA_PROPERTIES["workers"]["default"])
    DEFAULT_LOG_LEVEL: str = __SCHEMA_PROPERTIES["log_level"]["default"]

    def __init__(self, name: str = "sweep", file_path: Optional[Path] = None) -> None:
        super().__init__(name, file_path)

    def _parse(self) -> None:
        config: dict = {}
        if self._file_path is not None:
            try:
                with open(self._file_path, "r") as config_file:
                    config = json.load(config_file)
                jsonschema.validate(config, SCHEMA)
            except (OSError, ValueError, jsonschema.exceptions.ValidationError) as err:
                raise InvalidChannelError(
                    ".".join(str(p) for p in getattr(err, "absolute_path", ())) or "<document>",
                    f"Experiment file {self._file_path} is invalid: {getattr(err, 'message', err)}",
                )
            logger.debug(f"JSON config {config}")
        self.__num_inputs = int(config.get("num_inputs", self.DEFAULT_NUM_INPUTS))
        self.__num_outputs = int(config.get("num_outputs", self.DEFAULT_NUM_OUTPUTS))
        self.__L_values = [int(L) for L in config.get("L_values", self.DEFAULT_L_VALUES)]
        self.__num_trials = int(config.get("num_trials", self.DEFAULT_NUM_TRIALS))
        self.__seed = int(config.get("seed", self.DEFAULT_SEED))
        self.__output_path = Path(config.get("output_path", self.DEFAULT_OUTPUT_PATH))
        self.__workers = int(config.get("workers", self.DEFAULT_WORKERS))
        self.__log_level = config.get("log_level", self.DEFAULT_LOG_LEVEL)

    def sanity_check(self) -> None:
        """
        Checks all options and raises `InvalidChannelError` naming the first invalid one
        """
        if self.__num_inputs < 2:
            raise InvalidChannelError("num_inputs", f"must be at least 2, got {self.__num_inputs}")
        if self.__num_outputs < 2:
            raise InvalidChannelError("num_outputs", f"must be at least 2, got {self.__num_outputs}")
        if not self.__L_values:
            raise InvalidChannelError("L_values", "must not be empty")
        if min(self.__L_values) < 1:
            raise InvalidChannelError("L_values", f"every L must be at least 1, got {self.__L_values}")
        if self.__num_trials < 1:
            raise InvalidChannelError("num_trials", f"must be at least 1, got {self.__num_trials}")
        if not 0 <= self.__seed < 2**64:
            raise InvalidChannelError("seed", f"must be a 64-bit unsigned integer, got {self.__seed}")
        if self.__workers < 1:
            raise InvalidChannelError("workers", f"must be at least 1, got {self.__workers}")

    def __str__(self) -> str:
        return (
            super().__repr__() + f", |X|: {self.__num_inputs}, |Y|: {self.__num_outputs}, L: {self.__L_values}, "
            f"trials: {self.__num_trials}, seed: {self.__seed}, output: {self.__output_path}, "
            f"workers: {self.__workers}"
        )

    @property
    def num_inputs(self) -> int:
        """
        The input alphabet size of the random channels
        """
        return self.__num_inputs

    @num_inputs.setter
    def num_inputs(self, num_inputs: Optional[int]) -> None:
        if num_inputs is not None and num_inputs != self.__num_inputs:
            logger.warning(f"Overwriting num_inputs with {num_inputs!r} (was {self.__num_inputs!r})")
            self.__num_inputs = num_inputs

    @property
    def num_outputs(self) -> int:
        """
        The output alphabet size of the random channels
        """
        return self.__num_outputs

    @num_outputs.setter
    def num_outputs(self, num_outputs: Optional[int]) -> None:
        if num_outputs is not None and num_outputs != self.__num_outputs:
            logger.warning(f"Overwriting num_outputs with {num_outputs!r} (was {self.__num_outputs!r})")
            self.__num_outputs = num_outputs

    @property
    def L_values(self) -> List[int]:
        """
        The target output alphabet sizes, each trial is degraded to every one of them
        """
        return list(self.__L_values)

    @L_values.setter
    def L_values(self, L_values: Optional[Sequence[int]]) -> None:
        if L_values and list(L_values) != self.__L_values:
            logger.warning(f"Overwriting L_values with {list(L_values)!r} (was {self.__L_values!r})")
            self.__L_values = list(L_values)

    @property
    def num_trials(self) -> int:
        return self.__num_trials

    @num_trials.setter
    def num_trials(self, num_trials: Optional[int]) -> None:
        if num_trials is not None and num_trials != self.__num_trials:
            logger.warning(f"Overwriting num_trials with {num_trials!r} (was {self.__num_trials!r})")
            self.__num_trials = num_trials

    @property
    def seed(self) -> int:
        """
        The root seed, trial t uses the random stream of (seed, t)
        """
        return self.__seed

    @seed.setter
    def seed(self, seed: Optional[int]) -> None:
        if seed is not None and seed != self.__seed:
            logger.warning(f"Overwriting seed with {seed!r} (was {self.__seed!r})")
            self.__seed = seed

    @property
    def output_path(self) -> Path:
        return self.__output_path

    @output_path.setter
    def output_path(self, output_path: Optional[Path]) -> None:
        if output_path is not None and Path(output_path) != self.__output_path:
            logger.warning(f"Overwriting output_path with {str(output_path)!r} (was {str(self.__output_path)!r})")
            self.__output_path = Path(output_path)

    @property
    def workers(self) -> int:
        """
        The number of worker processes running trials in parallel
        """
        return self.__workers

    @workers.setter
    def workers(self, workers: Optional[int]) -> None:
        if workers is not None and workers != self.__workers:
            logger.warning(f"Overwriting workers with {workers!r} (was {self.__workers!r})")
            self.__workers = workers

    @property
    def log_level(self) -> str:
        """
        The logging level of the application
        """
        return self.__log_level
