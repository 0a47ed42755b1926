"""Writing simulation results to disk: CSV tables, charts and the run manifest.

Layout of an output directory::

    manifest.json
    bank.csv                 final bank, exposure rate in column r
    exposure.csv             item_index,a,b,c,d,q,r
    validity.csv             metric,value
    examinees.csv            one row per examinee
    trajectories/examinee_0000.csv
                             step,item_index,response,theta_hat,see,var,info
    charts/                  exposure.svg, progress_0000.svg (+ .csv sidecars)
"""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, plot
from .bank import save_csv
from .simulation import ExamineeState, SimulationResult

MANIFEST_VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def versions() -> dict[str, str]:
    return {"catforge": __version__, "python": platform.python_version(), "numpy": np.__version__}


@dataclass
class RunManifest:
    """What was run and where its outputs went.

    ``config`` is the fully resolved configuration, so feeding the manifest
    back to ``catforge simulate`` repeats the run exactly.
    """

    command: str
    seed: int
    config: dict
    outputs: dict[str, str]
    summary: dict[str, float] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=versions)
    manifest_version: int = MANIFEST_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


TRAJECTORY_HEADER = ("step", "item_index", "response", "theta_hat", "see", "var", "info")
EXAMINEE_HEADER = ("examinee", "true_theta", "initial_theta", "final_theta", "n_items", "exhausted")


def trajectory_rows(state: ExamineeState):
    for t, item in enumerate(state.administered):
        yield (
            t + 1,
            item,
            state.responses[t],
            state.estimates[t + 1],
            state.see_trace[t],
            state.var_trace[t],
            state.info_trace[t],
        )


def progress_chart(state: ExamineeState, index: int, traces=plot.PROGRESS_TRACES, true_theta=True) -> plot.Chart:
    return plot.test_progress(
        state.estimates,
        info=state.info_trace,
        var=state.var_trace,
        see=state.see_trace,
        true_theta=state.true_theta if true_theta else None,
        traces=traces,
        title=f"Test progress, examinee {index}",
    )


def write_result(result: SimulationResult, config: dict, out_dir, charts: bool = True) -> Path:
    """Write every output of a simulation and return the manifest path."""
    out = Path(out_dir)
    (out / "trajectories").mkdir(parents=True, exist_ok=True)
    outputs: dict[str, str] = {}

    save_csv(result.bank, out / "bank.csv")
    outputs["bank"] = "bank.csv"

    bank = result.bank
    _write_csv(
        out / "exposure.csv",
        ("item_index", "a", "b", "c", "d", "q", "r"),
        ((i, *bank.params[i], bank.exposure_counts[i], bank.exposure_rates[i]) for i in range(len(bank))),
    )
    outputs["exposure"] = "exposure.csv"

    v = result.validity
    lengths = [s.test_length for s in result.states]
    _write_csv(
        out / "validity.csv",
        ("metric", "value"),
        [
            ("bias", v.bias),
            ("mse", v.mse),
            ("rmse", v.rmse),
            ("overlap", v.overlap),
            ("n_examinees", len(result.states)),
            ("mean_test_length", float(np.mean(lengths))),
            ("n_exhausted", sum(s.exhausted for s in result.states)),
        ],
    )
    outputs["validity"] = "validity.csv"

    _write_csv(
        out / "examinees.csv",
        EXAMINEE_HEADER,
        (
            (j, s.true_theta, s.estimates[0], s.final_estimate, s.test_length, s.exhausted)
            for j, s in enumerate(result.states)
        ),
    )
    outputs["examinees"] = "examinees.csv"

    for j, state in enumerate(result.states):
        _write_csv(out / "trajectories" / f"examinee_{j:04d}.csv", TRAJECTORY_HEADER, trajectory_rows(state))
    outputs["trajectories"] = "trajectories"

    if charts:
        (out / "charts").mkdir(exist_ok=True)
        plot.item_exposure(bank.params, bank.exposure_rates, par="b").write(out / "charts" / "exposure.svg")
        progress_chart(result.states[0], 0).write(out / "charts" / "progress_0000.svg")
        outputs["charts"] = "charts"

    manifest = RunManifest(
        command="simulate",
        seed=int(config.get("seed", 0)),
        config=config,
        outputs=outputs,
        summary={"bias": v.bias, "mse": v.mse, "rmse": v.rmse, "overlap": v.overlap},
    )
    return manifest.write(out / "manifest.json")


def read_trajectory(path) -> dict[str, list]:
    """Columns of a trajectory CSV, parsed back to numbers."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "item_index": [int(r["item_index"]) for r in rows],
        "response": [r["response"] == "1" for r in rows],
        "theta_hat": [float(r["theta_hat"]) for r in rows],
        "see": [float(r["see"]) for r in rows],
        "var": [float(r["var"]) for r in rows],
        "info": [float(r["info"]) for r in rows],
    }


def read_examinees(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {
                "true_theta": float(r["true_theta"]),
                "initial_theta": float(r["initial_theta"]),
                "final_theta": float(r["final_theta"]),
                "n_items": int(r["n_items"]),
                "exhausted": r["exhausted"] == "1",
            }
            for r in csv.DictReader(fh)
        ]
