"""Stochastic per-molecule emission and detection events.

Two competing generation models feed the same analysis pipeline:

- ``sequential``: the first emission waits Exponential(gamma_f), the second
  waits a further Exponential(gamma_s) (the ordered two-stage cascade);
- ``independent``: two i.i.d. Exponential(gamma) lifetimes per molecule,
  ordered afterwards (a pair of atoms in product states).

At the compatibility point gamma_f = 2 gamma, gamma_s = gamma the two
models produce identically distributed (t_f, t_s) pairs; telling them
apart from any detection statistic is impossible, which is exactly the
disentanglement signature the analysis module tests for.

Every random draw is a counter-based function of (seed, molecule_id), so
results are byte-identical for any worker count or chunking (see
`twoatom._kernels`).  Detection uses two detectors hit with probability
1/2 each per photon, an efficiency thinning, and by default a single-hit
rule: when both photons land on one detector only the earlier is recorded.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .errors import InvalidParameterError
from .inference import Histogram
from .kinetics import RateTriple

MODES = ("sequential", "independent")
DETECTOR_MODELS = ("single-hit", "multi-hit")

EMISSION_DTYPE = np.dtype(
    [("molecule_id", np.uint64), ("t_f", np.float64), ("t_s", np.float64)]
)
#: NaN in t1/t2 means no photon was recorded at that detector
DETECTION_DTYPE = np.dtype(
    [("molecule_id", np.uint64), ("t1", np.float64), ("t2", np.float64)]
)


@dataclass(frozen=True)
class SimConfig:
    """Ensemble generation parameters.

    `detector_model` only affects the per-detector stream extraction
    (`detector_streams`); detection records always follow the single-hit
    rule, which is what the record layout can represent.
    """

    n0: int
    mode: str
    rates: RateTriple
    seed: int
    detector_efficiency: float = 1.0
    detector_model: str = "single-hit"
    workers: int = 1

    def __post_init__(self):
        problems = []
        if self.n0 < 1:
            problems.append("n0 must be at least 1")
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            problems.append("detector_efficiency must be in (0, 1]")
        if self.detector_model not in DETECTOR_MODELS:
            problems.append(f"detector_model must be one of {DETECTOR_MODELS}")
        if self.workers < 1:
            problems.append("workers must be at least 1")
        if problems:
            raise InvalidParameterError("; ".join(problems))


def _chunk_ranges(n0: int, workers: int):
    size = -(-n0 // workers)  # ceil division
    return [(s, min(size, n0 - s)) for s in range(0, n0, size)]


def _gather_raw(cfg: SimConfig) -> np.ndarray:
    """Raw 64-bit draws for all molecules; chunked over workers.

    The hash is a pure function of (seed, molecule_id), so the assembled
    array is identical for every worker count; only the integer stage runs
    in the pool, all float transforms happen once afterwards.
    """
    ranges = _chunk_ranges(cfg.n0, cfg.workers)
    if len(ranges) == 1:
        return kern.raw_draws(cfg.seed, 0, cfg.n0)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(lambda r: kern.raw_draws(cfg.seed, r[0], r[1]), ranges))
    return np.vstack(parts)


def simulate_ensemble(cfg: SimConfig) -> np.ndarray:
    """Per-molecule emission times as a structured array.

    Returns records (molecule_id, t_f, t_s) with t_f <= t_s, in seconds
    (or whatever inverse unit the rates carry).
    """
    raw = _gather_raw(cfg)
    u_a = kern.to_open_uniform(raw[:, kern.SLOT_LIFETIME_A])
    u_b = kern.to_open_uniform(raw[:, kern.SLOT_LIFETIME_B])
    if cfg.mode == "sequential":
        t_f = -np.log(u_a) / cfg.rates.gamma_f
        t_s = t_f + -np.log(u_b) / cfg.rates.gamma_s
    else:
        life_a = -np.log(u_a) / cfg.rates.gamma
        life_b = -np.log(u_b) / cfg.rates.gamma
        t_f = np.minimum(life_a, life_b)
        t_s = np.maximum(life_a, life_b)
    records = np.empty(cfg.n0, dtype=EMISSION_DTYPE)
    records["molecule_id"] = np.arange(cfg.n0, dtype=np.uint64)
    records["t_f"] = t_f
    records["t_s"] = t_s
    return records


def _photon_fates(cfg: SimConfig, molecule_ids: np.ndarray):
    """(detector index, kept flag) for the first and second photon of each id."""
    det_f = kern.to_bit(kern.raw_for_slot(cfg.seed, molecule_ids, kern.SLOT_DETECTOR_FIRST))
    det_s = kern.to_bit(kern.raw_for_slot(cfg.seed, molecule_ids, kern.SLOT_DETECTOR_SECOND))
    eff = cfg.detector_efficiency
    keep_f = kern.to_open_uniform(
        kern.raw_for_slot(cfg.seed, molecule_ids, kern.SLOT_EFFICIENCY_FIRST)
    ) < eff
    keep_s = kern.to_open_uniform(
        kern.raw_for_slot(cfg.seed, molecule_ids, kern.SLOT_EFFICIENCY_SECOND)
    ) < eff
    return det_f, det_s, keep_f, keep_s


def assign_detections(records: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Detector records (molecule_id, t1, t2) under the single-hit rule.

    Each photon independently lands on detector 1 or 2 with probability
    1/2 and survives with probability detector_efficiency; when both kept
    photons land on the same detector only the earlier (the first photon)
    is recorded there.  Missing entries are NaN.
    """
    ids = records["molecule_id"]
    det_f, det_s, keep_f, keep_s = _photon_fates(cfg, ids)
    out = np.empty(len(records), dtype=DETECTION_DTYPE)
    out["molecule_id"] = ids
    for detector, col in ((0, "t1"), (1, "t2")):
        first_here = keep_f & (det_f == detector)
        second_here = keep_s & (det_s == detector)
        times = np.where(
            first_here,
            records["t_f"],
            np.where(second_here, records["t_s"], np.nan),
        )
        out[col] = times
    return out


def detector_streams(records: np.ndarray, cfg: SimConfig):
    """All registered photon times per detector, sorted ascending.

    Honors cfg.detector_model: the single-hit rule drops the later photon
    of a same-detector pair, the multi-hit model registers both (the count
    pattern the per-detector cumulative fit assumes).
    """
    ids = records["molecule_id"]
    det_f, det_s, keep_f, keep_s = _photon_fates(cfg, ids)
    streams = []
    for detector in (0, 1):
        first_here = keep_f & (det_f == detector)
        second_here = keep_s & (det_s == detector)
        if cfg.detector_model == "single-hit":
            second_here = second_here & ~first_here
        times = np.concatenate(
            [records["t_f"][first_here], records["t_s"][second_here]]
        )
        streams.append(np.sort(times))
    return streams[0], streams[1]


def coincidence_differences(detections: np.ndarray) -> np.ndarray:
    """t1 - t2 for all molecules with a photon recorded at both detectors."""
    both = ~np.isnan(detections["t1"]) & ~np.isnan(detections["t2"])
    return detections["t1"][both] - detections["t2"][both]


def build_histogram(samples, bin_width: float, t_range: tuple[float, float]) -> Histogram:
    """Fixed-width histogram with half-open bins [lo, hi).

    Bin membership is floor((x - lo) / bin_width); samples outside
    [lo, hi) are dropped.
    """
    if not bin_width > 0:
        raise InvalidParameterError("bin_width must be positive")
    lo, hi = float(t_range[0]), float(t_range[1])
    if not hi > lo:
        raise InvalidParameterError("empty time range")
    x = np.asarray(samples, dtype=float).ravel()
    n_bins = int(np.ceil((hi - lo) / bin_width - 1e-9))
    edges = lo + bin_width * np.arange(n_bins + 1)
    in_range = (x >= lo) & (x < hi)
    idx = np.floor((x[in_range] - lo) / bin_width).astype(np.intp)
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins)
    return Histogram(edges=edges, counts=counts)
