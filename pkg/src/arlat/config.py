"""Run configuration: one JSON document describes one reproducible run.

Example::

    {
      "schema_version": 1,
      "model": "chain",
      "params": {"n": 6, "tau": 1.0, "beta": 1.0, "kappa": 2.6457513110645907},
      "feedback": {"factor": 1.0},
      "integrator": {"samples_per_segment": 200}
    }

Complex numbers are written as a number or ``[re, im]``. Profiles are a
complex number (constant) or one of ``{"constant": c}``,
``{"cosine": {"base", "amplitude", "frequency", "phase"}}`` and
``{"piecewise_linear": [[z, value], ...]}``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .errors import InvalidInputError, InvalidModelError
from .model import ChipSpec, FeedbackMap, SourceVector, build_chain, build_qubit, build_single_guide, build_two_time
from .profiles import Constant, Cosine, PiecewiseLinear

__all__ = ["RunConfig", "MODELS", "parse_complex", "parse_profile", "profile_to_json", "build_model", "load"]

SCHEMA_VERSION = 1
MODELS = ("chain", "chain_modulated", "qubit", "qubit_crossed", "two_time", "custom")
FORMATS = ("csv", "json")
CHECKS = ("fixed_point", "symmetry", "periodicity", "oracle_gap", "residual")


def parse_complex(value, what="value") -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        value = complex(float(re), float(im))
    if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
        raise InvalidInputError(f"{what}: expected a number or [re, im], got {value!r}")
    return complex(value)


def complex_to_json(c: complex):
    c = complex(c)
    return c.real if c.imag == 0 else [c.real, c.imag]


def parse_profile(spec, what="profile"):
    if isinstance(spec, dict):
        if len(spec) != 1:
            raise InvalidInputError(f"{what}: profile object needs exactly one kind key, got {sorted(spec)}")
        (kind, body), = spec.items()
        try:
            if kind == "constant":
                return Constant(parse_complex(body, what))
            if kind == "cosine":
                unknown = set(body) - {"base", "amplitude", "frequency", "phase"}
                if unknown:
                    raise InvalidInputError(f"{what}: unknown cosine fields {sorted(unknown)}")
                return Cosine(
                    parse_complex(body.get("base", 0.0), what),
                    parse_complex(body.get("amplitude", 0.0), what),
                    float(body.get("frequency", 0.0)),
                    float(body.get("phase", 0.0)),
                )
            if kind == "piecewise_linear":
                return PiecewiseLinear(tuple((float(z), parse_complex(v, what)) for z, v in body))
        except InvalidModelError as exc:
            raise InvalidInputError(f"{what}: {exc}") from exc
        except (TypeError, ValueError, AttributeError) as exc:
            raise InvalidInputError(f"{what}: malformed {kind} profile ({exc})") from exc
        raise InvalidInputError(f"{what}: unknown profile kind {kind!r}")
    return Constant(parse_complex(spec, what))


def profile_to_json(p):
    if isinstance(p, Constant):
        return complex_to_json(p.value)
    if isinstance(p, Cosine):
        return {"cosine": {"base": complex_to_json(p.base), "amplitude": complex_to_json(p.amplitude),
                           "frequency": p.frequency, "phase": p.phase}}
    if isinstance(p, PiecewiseLinear):
        return {"piecewise_linear": [[z, complex_to_json(v)] for z, v in p.samples]}
    raise InvalidInputError(f"profile {p!r} has no JSON form")


@dataclass
class IntegratorSection:
    step: Optional[float] = None
    samples_per_segment: int = 200
    scheme: str = "rk4"


@dataclass
class SolverSection:
    rcond_min: float = 1e-12


@dataclass
class TransientSection:
    k_max: int = 1000
    tol: float = 1e-14
    # "alpha" starts from the source; a number s starts from s * a_inf
    starts: list = field(default_factory=lambda: ["alpha"])


@dataclass
class VerifySection:
    oracle_step: Optional[float] = None
    tolerances: dict = field(default_factory=dict)


@dataclass
class SweepSection:
    parameter: Optional[str] = None
    start: float = 0.0
    stop: float = 1.0
    count: int = 2


@dataclass
class OutputSection:
    format: str = "csv"


_SECTIONS = {
    "integrator": IntegratorSection,
    "solver": SolverSection,
    "transient": TransientSection,
    "verify": VerifySection,
    "sweep": SweepSection,
    "output": OutputSection,
}


@dataclass
class RunConfig:
    model: str
    params: dict
    feedback: dict = field(default_factory=lambda: {"factor": 1.0})
    source: Optional[list] = None
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    solver: SolverSection = field(default_factory=SolverSection)
    transient: TransientSection = field(default_factory=TransientSection)
    verify: VerifySection = field(default_factory=VerifySection)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise InvalidInputError("config must be a JSON object")
        data = copy.deepcopy(data)
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise InvalidInputError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        if data.get("model") not in MODELS:
            raise InvalidInputError(f"model must be one of {MODELS}, got {data.get('model')!r}")
        if not isinstance(data.get("params"), dict):
            raise InvalidInputError("params must be an object")
        kwargs = {"model": data["model"], "params": data["params"]}
        if "feedback" in data:
            fb = data["feedback"]
            if not isinstance(fb, dict) or set(fb) - {"factor", "entries"}:
                raise InvalidInputError("feedback accepts only 'factor' and 'entries'")
            kwargs["feedback"] = fb
        if "source" in data:
            kwargs["source"] = data["source"]
        for name, section in _SECTIONS.items():
            if name not in data:
                continue
            body = data[name]
            allowed = {f.name for f in fields(section)}
            if not isinstance(body, dict) or set(body) - allowed:
                raise InvalidInputError(f"{name}: allowed keys are {sorted(allowed)}")
            kwargs[name] = section(**body)
        cfg = cls(**kwargs)
        try:
            cfg.validate()
        except InvalidInputError:
            raise
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed config value: {exc}") from exc
        return cfg

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version}
        out.update({k: v for k, v in asdict(self).items() if k != "schema_version"})
        return out

    def validate(self) -> None:
        integ = self.integrator
        if integ.scheme not in ("rk4", "expm"):
            raise InvalidInputError(f"integrator.scheme must be rk4 or expm, got {integ.scheme!r}")
        if not isinstance(integ.samples_per_segment, int) or integ.samples_per_segment < 2:
            raise InvalidInputError("integrator.samples_per_segment must be an integer >= 2")
        if integ.step is not None and not float(integ.step) > 0:
            raise InvalidInputError("integrator.step must be positive")
        if not float(self.solver.rcond_min) >= 0:
            raise InvalidInputError("solver.rcond_min must be >= 0")
        if not isinstance(self.transient.k_max, int) or self.transient.k_max < 1:
            raise InvalidInputError("transient.k_max must be a positive integer")
        if not float(self.transient.tol) > 0:
            raise InvalidInputError("transient.tol must be positive")
        for s in self.transient.starts:
            if s != "alpha" and (isinstance(s, bool) or not isinstance(s, (int, float))):
                raise InvalidInputError(f"transient.starts entries are 'alpha' or numbers, got {s!r}")
        tols = self.verify.tolerances
        if not isinstance(tols, dict) or set(tols) - set(CHECKS):
            raise InvalidInputError(f"verify.tolerances keys must be among {CHECKS}")
        for name, tol in tols.items():
            if tol is not None and (isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0):
                raise InvalidInputError(f"verify.tolerances.{name} must be positive or null")
        if self.verify.oracle_step is not None and not float(self.verify.oracle_step) > 0:
            raise InvalidInputError("verify.oracle_step must be positive")
        if self.output.format not in FORMATS:
            raise InvalidInputError(f"output.format must be one of {FORMATS}")
        if self.sweep.parameter is not None:
            if not isinstance(self.sweep.count, int) or self.sweep.count < 2:
                raise InvalidInputError("sweep.count must be an integer >= 2")
        build_model(self)

    def with_value(self, path: str, value) -> "RunConfig":
        """Copy with the dotted ``path`` (e.g. ``params.omega``) set to ``value``."""
        data = self.to_dict()
        keys = path.split(".")
        node = data
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise InvalidInputError(f"parameter path {path!r} does not exist")
            node = node[key]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise InvalidInputError(f"parameter path {path!r} does not exist")
        node[keys[-1]] = value
        return RunConfig.from_dict(data)


def _take(params: dict, names, optional=()):
    missing = [n for n in names if n not in params]
    if missing:
        raise InvalidInputError(f"missing model parameters {missing}")
    unknown = set(params) - set(names) - set(optional)
    if unknown:
        raise InvalidInputError(f"unknown model parameters {sorted(unknown)}")
    return [params[n] for n in names]


def _int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInputError(f"{what} must be an integer, got {value!r}")
    return value


def _custom(params: dict):
    n, tau, rails, diagonal, couplings, concat_map, links = _take(
        params, ["n_modes", "tau", "rails", "diagonal", "couplings", "concat_map", "links"]
    )
    pairs = {}
    for j, k, p in couplings:
        prof = parse_profile(p, f"coupling ({j}, {k})")
        pairs[(int(j), int(k))] = prof
        pairs.setdefault((int(k), int(j)), prof)
    chip = ChipSpec(
        n_modes=_int(n, "n_modes"),
        tau=float(tau),
        diagonal=tuple(parse_profile(p, "diagonal") for p in diagonal),
        couplings=tuple((j, k, p) for (j, k), p in pairs.items()),
        rails=_int(rails, "rails"),
        concat_map=tuple(tuple(e) for e in concat_map),
    )
    fb = FeedbackMap(
        tuple((int(e[0]), int(e[1]), parse_complex(e[2]) if len(e) > 2 else 1.0) for e in links), float(tau)
    )
    return chip, fb, SourceVector.unit(chip.n_modes)


def build_model(cfg: RunConfig):
    """``(chip, feedback, source)`` for a config, with factors and source applied."""
    p = cfg.params
    prof = parse_profile
    try:
        if cfg.model == "chain":
            n, tau, beta, kappa = _take(p, ["n", "tau", "beta", "kappa"])
            if _int(n, "n") == 1:
                # a lone guide has no bonds; kappa is accepted and unused
                prof(kappa, "kappa")
                chip, fb, src = build_single_guide(float(tau), prof(beta, "beta"))
            else:
                chip, fb, src = build_chain(_int(n, "n"), float(tau), prof(beta, "beta"), prof(kappa, "kappa"))
        elif cfg.model == "chain_modulated":
            n, tau, b0, eps, omega, kappa = _take(p, ["n", "tau", "beta0", "epsilon", "omega", "kappa"], ["phase"])
            beta = Cosine(parse_complex(b0, "beta0"), parse_complex(eps, "epsilon"), float(omega), float(p.get("phase", 0.0)))
            chip, fb, src = build_chain(_int(n, "n"), float(tau), beta, prof(kappa, "kappa"))
        elif cfg.model in ("qubit", "qubit_crossed"):
            names = ["n_segments", "tau", "beta_x", "beta_y", "kappa_x", "kappa_y", "q", "d"]
            n, tau, *rest = _take(p, names)
            chip, fb, src = build_qubit(
                _int(n, "n_segments"), float(tau), *(prof(v, k) for v, k in zip(rest, names[2:])),
                crossed=cfg.model == "qubit_crossed",
            )
        elif cfg.model == "two_time":
            n, tau, beta, k1, k2 = _take(p, ["n", "tau", "beta", "kappa1", "kappa2"])
            chip, fb, src = build_two_time(_int(n, "n"), float(tau), prof(beta, "beta"), prof(k1, "kappa1"), prof(k2, "kappa2"))
        else:
            chip, fb, src = _custom(p)
    except InvalidModelError as exc:
        raise InvalidInputError(str(exc)) from exc
    except InvalidInputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed model parameters: {exc}") from exc

    feedback = cfg.feedback or {}
    try:
        if "entries" in feedback:
            fb = FeedbackMap(
                tuple((int(e[0]), int(e[1]), parse_complex(e[2]) if len(e) > 2 else 1.0) for e in feedback["entries"]),
                fb.connection_time,
            )
        if "factor" in feedback:
            fb = fb.scaled(parse_complex(feedback["factor"], "feedback.factor"))
        if cfg.source is not None:
            src = SourceVector(tuple(parse_complex(a, "source") for a in cfg.source))
    except InvalidModelError as exc:
        raise InvalidInputError(str(exc)) from exc
    if len(src) != chip.n_modes:
        raise InvalidInputError(f"source has {len(src)} entries, chip has {chip.n_modes} modes")
    for r, c, _ in fb.entries:
        if r > chip.n_modes or c > chip.n_modes:
            raise InvalidInputError(f"feedback entry ({r}, {c}) exceeds {chip.n_modes} modes")
    return chip, fb, src


def load(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def dumps(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"

