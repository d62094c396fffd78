"""HTTP front end for the simulator.

A thin FastAPI layer over the core package: each endpoint deserializes a
request model, calls the corresponding library function, and returns JSON.
All computation is stateless and seeded from the request, so identical
requests produce identical responses.
"""

from __future__ import annotations

import dataclasses
from typing import Dict, List, Optional, Union

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .channel import ChannelParams, PRESETS
from .engine import CalibrationTable, OutcomeCounts
from .estimation import estimate_phase, estimate_phase_corrected
from .experiments import (
    ExperimentConfig,
    FIGURES,
    calibrate_experiment,
    qber_experiment,
    reproduce_figure,
    simulate_experiment,
)


class ChannelModel(BaseModel):
    fiber_length: float = 0.0
    attenuation: float = 0.2
    detector_efficiency: float = 1.0
    dark_count_prob: float = 0.0
    misalignment_prob: float = 0.0
    path1_split: float = 0.5
    mean_photon_number: float = 16.0
    phase_flip_coeffs: List[float] = Field(default=[0.0, 0.0, 0.0, 0.0])

    def to_params(self) -> ChannelParams:
        data = self.model_dump()
        data["phase_flip_coeffs"] = tuple(data["phase_flip_coeffs"])
        return ChannelParams(**data)

    @classmethod
    def from_params(cls, params: ChannelParams) -> "ChannelModel":
        data = dataclasses.asdict(params)
        data["phase_flip_coeffs"] = list(params.phase_flip_coeffs)
        return cls(**data)


class ConfigModel(BaseModel):
    channel: Union[str, ChannelModel] = "paper-noise"
    phases: Optional[List[float]] = None
    pulses_per_phase: int = 42000
    calibration_pulses: int = 10500
    seed: int = 20240901
    output_dir: str = "out"

    def to_config(self) -> ExperimentConfig:
        data = self.model_dump()
        if data["phases"] is None:
            data.pop("phases")
        channel = self.channel
        if isinstance(channel, ChannelModel):
            data["channel"] = dataclasses.asdict(channel.to_params())
        return ExperimentConfig.from_dict(data)


class SimulateRequest(BaseModel):
    config: ConfigModel = Field(default_factory=ConfigModel)
    attack: bool = False


class FilesResponse(BaseModel):
    files: Dict[str, str]


class CalibrationModel(BaseModel):
    p_bg: List[float]
    phases: List[float]

    @classmethod
    def from_table(cls, table: CalibrationTable) -> "CalibrationModel":
        return cls(p_bg=list(table.p_bg), phases=list(table.phases))

    def to_table(self) -> CalibrationTable:
        return CalibrationTable(p_bg=tuple(self.p_bg))


class EstimateRequest(BaseModel):
    counts: List[int] = Field(min_length=8, max_length=8)
    calibration: Optional[CalibrationModel] = None
    include_curve: bool = False


class EstimateResponse(BaseModel):
    phi_hat: float
    num_maxima: int
    curve_csv: Optional[str] = None


class QberRequest(BaseModel):
    config: ConfigModel = Field(default_factory=ConfigModel)


class ReproduceRequest(BaseModel):
    figure: str
    config: ConfigModel = Field(default_factory=ConfigModel)


app = FastAPI(
    title="sqrs",
    description="Secure quantum remote sensing simulator and estimator",
)


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc: ValueError):
    return JSONResponse(status_code=422, content={"error": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/presets")
def presets() -> Dict[str, ChannelModel]:
    return {name: ChannelModel.from_params(make()) for name, make in PRESETS.items()}


@app.get("/figures")
def figures() -> dict:
    return {"figures": list(FIGURES)}


@app.post("/simulate", response_model=FilesResponse)
def simulate(request: SimulateRequest) -> FilesResponse:
    from .engine import InterceptResend

    attack = InterceptResend() if request.attack else None
    files = simulate_experiment(request.config.to_config(), attack=attack)
    return FilesResponse(files=files)


@app.post("/calibrate", response_model=CalibrationModel)
def calibrate(request: QberRequest) -> CalibrationModel:
    table = calibrate_experiment(request.config.to_config())
    return CalibrationModel.from_table(table)


@app.post("/qber")
def qber(request: QberRequest) -> dict:
    return qber_experiment(request.config.to_config())


@app.post("/estimate", response_model=EstimateResponse)
def estimate(request: EstimateRequest) -> EstimateResponse:
    counts = OutcomeCounts(tuple(request.counts))
    if request.calibration is not None:
        result = estimate_phase_corrected(counts, request.calibration.to_table())
    else:
        result = estimate_phase(counts)
    return EstimateResponse(
        phi_hat=result.phi_hat,
        num_maxima=result.num_maxima,
        curve_csv=result.curve.to_csv() if request.include_curve else None,
    )


@app.post("/reproduce", response_model=FilesResponse)
def reproduce(request: ReproduceRequest) -> FilesResponse:
    files = reproduce_figure(request.figure, request.config.to_config())
    return FilesResponse(files=files)
