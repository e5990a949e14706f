"""Run manifests: enough resolved state to reproduce any output bit-exactly."""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .model import DownOutStepSpec, HejdModel

__all__ = ["RunManifest", "build_manifest"]


@dataclass(frozen=True)
class RunManifest:
    command: str
    engine_version: str
    gs_order: int
    model: dict[str, Any]
    contract: dict[str, Any]
    parameters: dict[str, Any]
    created_utc: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _model_dict(model: HejdModel) -> dict[str, Any]:
    return {
        "r": model.r,
        "delta": model.delta,
        "sigma": model.sigma,
        "lambda": model.lam,
        "p": list(model.up_weights),
        "xi": list(model.up_rates),
        "q": list(model.down_weights),
        "eta": list(model.down_rates),
    }


def _spec_dict(spec: DownOutStepSpec) -> dict[str, Any]:
    return {
        "K": spec.strike,
        "L": spec.barrier,
        "rho_L": spec.knock_rate,
        "gamma_L": spec.seasoning,
    }


def build_manifest(
    command: str,
    version: str,
    gs_order: int,
    model: HejdModel | None,
    spec: DownOutStepSpec | None,
    **parameters: Any,
) -> RunManifest:
    return RunManifest(
        command=command,
        engine_version=version,
        gs_order=gs_order,
        model=_model_dict(model) if model is not None else {},
        contract=_spec_dict(spec) if spec is not None else {},
        parameters=parameters,
    )
