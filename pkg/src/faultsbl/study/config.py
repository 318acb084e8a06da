"""Study configuration files.

A study is a TOML file with ``[scenario]``, ``[sweep]``, ``[solver]``,
``[baselines]`` and ``[output]`` sections. Every problem is reported with the
dotted path of the offending key.
"""

from __future__ import annotations

import dataclasses
import tomllib
import typing as t
from dataclasses import dataclass, field
from pathlib import Path

from faultsbl.datagen import DictionarySource, KnowledgeCase, ScenarioSpec, enumerate_cases
from faultsbl.errors import ConfigError, FaultSblError
from faultsbl.solver import SolverConfig

SWEEP_PARAMETERS = ("beta", "l", "ratio", "snr_db")
NOISELESS = "noiseless"


@dataclass(frozen=True)
class Variant:
    name: str
    overrides: tuple[tuple[str, t.Any], ...] = ()

    def apply(self, base: SolverConfig) -> SolverConfig:
        return base.replace(**dict(self.overrides))

    @property
    def uses_knowledge(self) -> bool:
        return dict(self.overrides).get("use_prior_knowledge", True)


FULL = Variant("full")
BUILTIN_VARIANTS = {
    v.name: v
    for v in (
        FULL,
        # temporal correlation, no support knowledge
        Variant("tsbl", (("learn_B", True), ("use_prior_knowledge", False))),
        # neither correlation nor knowledge
        Variant("msbl-like", (("learn_B", False), ("use_prior_knowledge", False))),
        # knowledge, no correlation
        Variant("sa-only", (("learn_B", False), ("use_prior_knowledge", True))),
    )
}


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float | None, ...]

    def label(self, value: float | None) -> str:
        if self.parameter == "snr_db" and value is None:
            return NOISELESS
        return f"{value:g}"


@dataclass(frozen=True)
class StudyConfig:
    name: str
    scenario: ScenarioSpec
    sweep: Sweep
    solver: SolverConfig
    variants: tuple[Variant, ...]
    output_dir: Path
    jobs: int = 1
    # None means every partial-knowledge case for the scenario's K
    knowledge_cases: tuple[KnowledgeCase, ...] | None = None
    # raw parsed document, echoed into the run manifest
    source: dict = field(default_factory=dict, compare=False, repr=False)
    base_dir: Path = field(default_factory=Path.cwd, compare=False, repr=False)

    def scenario_for(self, value: float | None) -> ScenarioSpec:
        match self.sweep.parameter:
            case "beta":
                return self.scenario.replace(beta=float(t.cast(float, value)))
            case "l":
                return self.scenario.replace(l=int(t.cast(float, value)))
            case "ratio":
                return self.scenario.replace(n=int(round(self.scenario.m * t.cast(float, value))))
            case "snr_db":
                return self.scenario.replace(snr_db=value)
        raise ConfigError("sweep.parameter", f"unsupported parameter {self.sweep.parameter!r}")

    def cases_for(self, scenario: ScenarioSpec) -> list[KnowledgeCase]:
        if self.knowledge_cases is None:
            return enumerate_cases(scenario.k)
        return sorted(self.knowledge_cases)

    def replace(self, **changes) -> StudyConfig:
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> StudyConfig:
        source = {**self.source, "scenario": {**self.source.get("scenario", {}), "seed": seed}}
        return self.replace(scenario=self.scenario.replace(seed=seed), source=source)


def _check_keys(section: dict, allowed: t.Iterable[str], path: str):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")


def _section(doc: dict, name: str, required: bool = True) -> dict:
    section = doc.get(name)
    if section is None:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    if not isinstance(section, dict):
        raise ConfigError(name, "must be a table")
    return section


def _int(value: t.Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _float(value: t.Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _bool(value: t.Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected true/false, got {value!r}")
    return value


def _snr(value: t.Any, path: str) -> float | None:
    if value == NOISELESS:
        return None
    return _float(value, path)


SCENARIO_KEYS = {
    "m": _int,
    "n": _int,
    "k": _int,
    "l": _int,
    "beta": _float,
    "snr_db": _snr,
    "trials": _int,
    "seed": _int,
}


def parse_scenario(section: dict) -> tuple[ScenarioSpec, tuple[KnowledgeCase, ...] | None]:
    _check_keys(section, [*SCENARIO_KEYS, "dictionary_source", "dictionary_path", "knowledge_cases"], "scenario")
    values: dict[str, t.Any] = {}
    for key, convert in SCENARIO_KEYS.items():
        if key in section:
            values[key] = convert(section[key], f"scenario.{key}")
    for key in ("m", "n", "k", "l", "beta"):
        if key not in values:
            raise ConfigError(f"scenario.{key}", "missing value")

    raw_source = section.get("dictionary_source", DictionarySource.RANDOM_HYPERSPHERE.value)
    try:
        values["dictionary_source"] = DictionarySource(raw_source)
    except ValueError:
        choices = ", ".join(s.value for s in DictionarySource)
        raise ConfigError("scenario.dictionary_source", f"expected one of {choices}") from None
    if "dictionary_path" in section:
        if not isinstance(section["dictionary_path"], str):
            raise ConfigError("scenario.dictionary_path", "expected a string")
        values["dictionary_path"] = Path(section["dictionary_path"])

    cases = None
    if "knowledge_cases" in section:
        raw_cases = section["knowledge_cases"]
        if not isinstance(raw_cases, list) or not raw_cases:
            raise ConfigError("scenario.knowledge_cases", "expected a nonempty list of 'C,E' strings")
        try:
            cases = tuple(KnowledgeCase.parse(str(c)) for c in raw_cases)
        except FaultSblError as e:
            raise ConfigError("scenario.knowledge_cases", str(e)) from None

    try:
        return ScenarioSpec(**values), cases
    except FaultSblError as e:
        raise ConfigError("scenario", str(e)) from None


def parse_sweep(section: dict) -> Sweep:
    _check_keys(section, ["parameter", "values"], "sweep")
    parameter = section.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError("sweep.parameter", f"expected one of {', '.join(SWEEP_PARAMETERS)}")
    raw_values = section.get("values")
    if not isinstance(raw_values, list) or not raw_values:
        raise ConfigError("sweep.values", "expected a nonempty list")
    convert = _snr if parameter == "snr_db" else (_int if parameter == "l" else _float)
    values = tuple(convert(v, f"sweep.values[{i}]") for i, v in enumerate(raw_values))
    if len(set(values)) != len(values):
        raise ConfigError("sweep.values", "values must be distinct")
    return Sweep(parameter=parameter, values=values)


def parse_solver(section: dict, path: str = "solver", base: SolverConfig | None = None) -> SolverConfig:
    fields = {f.name: f for f in dataclasses.fields(SolverConfig)}
    _check_keys(section, fields, path)
    values: dict[str, t.Any] = {}
    for key, raw in section.items():
        default = getattr(SolverConfig, key)
        if isinstance(default, bool):
            values[key] = _bool(raw, f"{path}.{key}")
        elif isinstance(default, int):
            values[key] = _int(raw, f"{path}.{key}")
        else:
            values[key] = _float(raw, f"{path}.{key}")
    try:
        return (base or SolverConfig()).replace(**values)
    except ConfigError as e:
        raise ConfigError(e.field_path.replace("solver", path, 1), e.reason) from None


def parse_baselines(section: dict, solver: SolverConfig) -> tuple[Variant, ...]:
    _check_keys(section, ["variants", "custom"], "baselines")
    names = section.get("variants", [])
    if not isinstance(names, list):
        raise ConfigError("baselines.variants", "expected a list of names")

    custom = section.get("custom", {})
    if not isinstance(custom, dict):
        raise ConfigError("baselines.custom", "must be a table of variants")

    variants = [FULL]
    for i, name in enumerate(names):
        if name == FULL.name:
            continue
        if name in BUILTIN_VARIANTS:
            variants.append(BUILTIN_VARIANTS[name])
        elif name in custom:
            path = f"baselines.custom.{name}"
            overrides = custom[name]
            if not isinstance(overrides, dict):
                raise ConfigError(path, "must be a table")
            parse_solver(overrides, path=path, base=solver)
            variants.append(Variant(name, tuple(sorted(overrides.items()))))
        else:
            raise ConfigError(f"baselines.variants[{i}]", f"unknown variant {name!r}")

    for name in custom:
        if name not in names:
            raise ConfigError(f"baselines.custom.{name}", "declared but not listed in variants")
    if len({v.name for v in variants}) != len(variants):
        raise ConfigError("baselines.variants", "variant names must be unique")
    return tuple(variants)


def parse_study(doc: dict, name: str, base_dir: Path) -> StudyConfig:
    _check_keys(doc, ["scenario", "sweep", "solver", "baselines", "output"], "")
    scenario, cases = parse_scenario(_section(doc, "scenario"))
    sweep = parse_sweep(_section(doc, "sweep"))
    solver = parse_solver(_section(doc, "solver", required=False))
    variants = parse_baselines(_section(doc, "baselines", required=False), solver)

    output = _section(doc, "output", required=False)
    _check_keys(output, ["dir", "jobs"], "output")
    output_dir = output.get("dir", f"results/{name}")
    if not isinstance(output_dir, str):
        raise ConfigError("output.dir", "expected a string")
    jobs = _int(output.get("jobs", 1), "output.jobs")
    if jobs < 1:
        raise ConfigError("output.jobs", "must be >= 1")

    study = StudyConfig(
        name=name,
        scenario=scenario,
        sweep=sweep,
        solver=solver,
        variants=variants,
        output_dir=Path(output_dir),
        jobs=jobs,
        knowledge_cases=cases,
        source=doc,
        base_dir=base_dir,
    )
    for i, value in enumerate(sweep.values):
        try:
            swept = study.scenario_for(value)
        except FaultSblError as e:
            raise ConfigError(f"sweep.values[{i}]", str(e)) from None
        if cases is not None:
            for case in cases:
                try:
                    case.check(swept.k)
                except FaultSblError as e:
                    raise ConfigError("scenario.knowledge_cases", str(e)) from None
    return study


def load_study_config(path: Path | str) -> StudyConfig:
    path = Path(path)
    try:
        with path.open("rb") as f:
            doc = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError("", f"{path} does not exist") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("", f"{path} is not valid TOML: {e}") from None
    return parse_study(doc, name=path.stem, base_dir=path.parent)
