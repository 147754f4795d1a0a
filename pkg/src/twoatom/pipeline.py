"""Experiment orchestration: config, full runs, figure tables, rate reports.

Wires simulation, detection, histogramming, fitting and the amplitude
engine into reproducible runs.  All file I/O uses SI seconds; the figure
table additionally carries the dimensionless columns (time in units of the
single-atom lifetime, densities in units of the rate).  Every output is a
pure function of (config, seed) except the single ``generated_at``
timestamp in report.json.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._kernels import backend_name
from .amplitudes import (
    EvolutionChoice,
    IDENTITY,
    first_emission_rate_ratio,
    property_case_rate,
    receding_pair,
    second_emission_rate_ratio,
)
from .errors import ConfigValidationError
from .eventsim import (
    SimConfig,
    assign_detections,
    build_histogram,
    coincidence_differences,
    detector_streams,
    simulate_ensemble,
)
from .grids import SpatialGrid
from .inference import FitResult, fit_cumulative_curve, fit_exponential_mle
from .kinetics import RateTriple, detection_densities
from .packets import make_packet
from .pairstate import make_two_atom_gaussian

_HBAR_SI = 1.054571817e-34  # J s


@dataclass
class AmplitudeParams:
    """Inputs of the rate-derivation stage (natural units: hbar = mass = 1).

    The packet width after the first emission and the photon recoil are
    not fixed by the physics reproduced here and default to arbitrary
    documented values (sigma = 1 length unit, zero recoil).
    """

    width_sum: float = 2.0
    width_diff: float = 1.0
    sigma: float = 1.0
    recoil_k: float = 0.0
    dt: float = 10.0
    grid_points: int = 512
    grid_span_factor: float = 8.0
    separations: tuple = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


@dataclass
class ExperimentConfig:
    """Full experiment description; JSON-serializable and diffable."""

    gamma_inverse: float = 1.6e-9  # single-atom lifetime in seconds
    n0: int = 1_000_000
    mode: str = "sequential"
    seed: int = 20260810
    bins: int = 80
    t_max_lifetimes: float = 8.0
    output_dir: str = "runs"
    detector_efficiency: float = 1.0
    detector_model: str = "single-hit"
    workers: int = 1
    gamma_f_factor: float = 2.0
    gamma_s_factor: float = 1.0
    atom_mass_kg: float = 1.6735575e-27
    length_unit_m: float = 1e-6
    amplitude: AmplitudeParams = field(default_factory=AmplitudeParams)

    def validate(self) -> None:
        bad = []
        if self.gamma_inverse <= 0:
            bad.append("gamma_inverse")
        if self.n0 < 1:
            bad.append("n0")
        if self.mode not in ("sequential", "independent"):
            bad.append("mode")
        if self.bins < 1:
            bad.append("bins")
        if self.t_max_lifetimes <= 0:
            bad.append("t_max_lifetimes")
        if not 0.0 < self.detector_efficiency <= 1.0:
            bad.append("detector_efficiency")
        if self.detector_model not in ("single-hit", "multi-hit"):
            bad.append("detector_model")
        if self.workers < 1:
            bad.append("workers")
        if self.gamma_f_factor <= 0:
            bad.append("gamma_f_factor")
        if self.gamma_s_factor <= 0:
            bad.append("gamma_s_factor")
        if self.atom_mass_kg <= 0:
            bad.append("atom_mass_kg")
        if self.length_unit_m <= 0:
            bad.append("length_unit_m")
        a = self.amplitude
        if a.width_sum <= 0 or a.width_diff <= 0:
            bad.append("amplitude.width_sum/width_diff")
        if a.sigma <= 0:
            bad.append("amplitude.sigma")
        if a.dt < 0:
            bad.append("amplitude.dt")
        if a.grid_points < 64:
            bad.append("amplitude.grid_points")
        if a.grid_span_factor < 3:
            bad.append("amplitude.grid_span_factor")
        if any(s < 0 for s in a.separations):
            bad.append("amplitude.separations")
        if bad:
            raise ConfigValidationError(bad)

    @property
    def rates(self) -> RateTriple:
        g = 1.0 / self.gamma_inverse
        return RateTriple(
            gamma=g, gamma_f=self.gamma_f_factor * g, gamma_s=self.gamma_s_factor * g
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            n0=self.n0,
            mode=self.mode,
            rates=self.rates,
            seed=self.seed,
            detector_efficiency=self.detector_efficiency,
            detector_model=self.detector_model,
            workers=self.workers,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["amplitude"]["separations"] = list(self.amplitude.separations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        amp = d.pop("amplitude", {})
        if isinstance(amp, dict):
            amp = dict(amp)
            if "separations" in amp:
                amp["separations"] = tuple(amp["separations"])
            amp = AmplitudeParams(**amp)
        cfg = cls(**d, amplitude=amp)
        return cfg

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def si_conversion(self) -> dict:
        """SI equivalents of the natural units used by the amplitude stage."""
        tau = self.atom_mass_kg * self.length_unit_m**2 / _HBAR_SI
        return {
            "atom_mass_kg": self.atom_mass_kg,
            "length_unit_m": self.length_unit_m,
            "hbar_J_s": _HBAR_SI,
            "natural_time_unit_s": tau,
            "amplitude_dt_s": self.amplitude.dt * tau,
        }


@dataclass
class ReportBundle:
    fits: dict
    rate_ratios: list
    curve_tables: dict
    config_echo: dict
    version: str


def _ensure_outdir(cfg: ExperimentConfig) -> str:
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigValidationError(["output_dir"], f"output_dir not writable: {out}")
    return out


def _sci(values: np.ndarray) -> np.ndarray:
    """Scientific notation with 17 significant digits (round-trip exact)."""
    return np.char.mod("%.16e", values)


def write_events_csv(path: str, records: np.ndarray, detections: np.ndarray) -> None:
    """molecule_id,t_f,t_s,t1,t2 in seconds; empty field = undetected."""
    id_s = np.char.mod("%d", records["molecule_id"])
    tf_s = _sci(records["t_f"])
    ts_s = _sci(records["t_s"])

    def detection_strings(arr):
        # t1/t2 are copies of t_f or t_s, so reuse their formatted strings;
        # anything else (foreign inputs) is formatted individually
        text = np.where(arr == records["t_f"], tf_s, "")
        hit_s = arr == records["t_s"]
        if hit_s.any():
            text = np.where(hit_s, ts_s, text)
        other = ~np.isnan(arr) & (text == "")
        if other.any():
            text = text.astype("U23")
            text[other] = _sci(arr[other])
        return text

    cols = [id_s, tf_s, ts_s, detection_strings(detections["t1"]), detection_strings(detections["t2"])]
    with open(path, "w", newline="") as fh:
        fh.write("molecule_id,t_f,t_s,t1,t2\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(zip(*(c.tolist() for c in cols)))


def write_histogram_csv(path: str, hist) -> None:
    with open(path, "w") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            fh.write(f"{lo:.16e},{hi:.16e},{int(c)}\n")


def _fit_block(cfg: ExperimentConfig, records, detections) -> dict[str, FitResult]:
    gaps = records["t_s"] - records["t_f"]
    fits = {
        "first": fit_exponential_mle(records["t_f"]),
        "second_interval": fit_exponential_mle(gaps),
    }
    # the count-pattern fit assumes every photon is registered, so the
    # per-detector streams are extracted with the multi-hit rule here
    # regardless of the record-level detector model
    stream_cfg = dataclasses.replace(cfg.sim_config(), detector_model="multi-hit")
    d1, d2 = detector_streams(records, stream_cfg)
    fits["detector_1"] = fit_cumulative_curve(d1)
    fits["detector_2"] = fit_cumulative_curve(d2)
    tau = coincidence_differences(detections)
    if tau.size >= 2:
        fits["coincidence"] = fit_exponential_mle(np.abs(tau))
    return fits


def run_experiment(cfg: ExperimentConfig, write_events: bool = True) -> ReportBundle:
    """simulate -> detect -> histogram -> fit, writing all artifacts.

    Produces events.csv, hist_{first,second,det1,det2,coincidence}.csv and
    report.json in cfg.output_dir.
    """
    cfg.validate()
    out = _ensure_outdir(cfg)
    sim = cfg.sim_config()
    records = simulate_ensemble(sim)
    detections = assign_detections(records, sim)

    paths = {}
    if write_events:
        paths["events"] = os.path.join(out, "events.csv")
        write_events_csv(paths["events"], records, detections)

    g = cfg.rates.gamma
    t_hi = cfg.t_max_lifetimes / g
    width = t_hi / cfg.bins
    tau = coincidence_differences(detections)
    hists = {
        "first": build_histogram(records["t_f"], width, (0.0, t_hi)),
        "second": build_histogram(records["t_s"], width, (0.0, t_hi)),
        "det1": build_histogram(detections["t1"][~np.isnan(detections["t1"])], width, (0.0, t_hi)),
        "det2": build_histogram(detections["t2"][~np.isnan(detections["t2"])], width, (0.0, t_hi)),
        "coincidence": build_histogram(tau, width, (-t_hi, t_hi)),
    }
    for name, hist in hists.items():
        p = os.path.join(out, f"hist_{name}.csv")
        write_histogram_csv(p, hist)
        paths[f"hist_{name}"] = p

    fits = _fit_block(cfg, records, detections)
    bundle = ReportBundle(
        fits={k: f.to_dict() for k, f in fits.items()},
        rate_ratios=[],
        curve_tables=paths,
        config_echo=_echo(cfg),
        version=__version__,
    )
    write_report(os.path.join(out, "report.json"), bundle)
    return bundle


def _echo(cfg: ExperimentConfig) -> dict:
    echo = cfg.to_dict()
    echo["si_conversion"] = cfg.si_conversion()
    echo["kernel_backend"] = backend_name()
    return echo


def write_report(path: str, bundle: ReportBundle) -> None:
    doc = {
        "fits": bundle.fits,
        "rate_ratios": bundle.rate_ratios,
        "curve_tables": bundle.curve_tables,
        "config_echo": bundle.config_echo,
        "version": bundle.version,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def reproduce_figure1(cfg: ExperimentConfig, overlay: bool = False, n_points: int = 401) -> str:
    """Tabulate the three analytic detection densities (plus SI columns).

    Columns t,n_f,n_s,n_i are in units of the single-atom lifetime and
    rate; the *_si columns repeat them in seconds and per-second.  With
    ``overlay=True`` the simulated normalized histograms are written next
    to the analytic curves (fig1_overlay_*.csv) together with the per-bin
    Poisson four-sigma band.
    """
    cfg.validate()
    out = _ensure_outdir(cfg)
    rates = cfg.rates
    g = rates.gamma
    t = np.linspace(0.0, cfg.t_max_lifetimes / g, n_points)
    n_f, n_s, n_i = detection_densities(t, rates)
    path = os.path.join(out, "fig1.csv")
    with open(path, "w") as fh:
        fh.write("t,n_f,n_s,n_i,t_si,n_f_si,n_s_si,n_i_si\n")
        for row in zip(t * g, n_f / g, n_s / g, n_i / g, t, n_f, n_s, n_i):
            fh.write(",".join(f"{v:.16e}" for v in row) + "\n")
    if overlay:
        _write_overlays(cfg, out)
    return path


def _write_overlays(cfg: ExperimentConfig, out: str) -> None:
    sim = cfg.sim_config()
    records = simulate_ensemble(sim)
    stream_cfg = dataclasses.replace(sim, detector_model="multi-hit")
    d1, _ = detector_streams(records, stream_cfg)
    rates = cfg.rates
    g = rates.gamma
    t_hi = cfg.t_max_lifetimes / g
    width = t_hi / cfg.bins

    def density_curve(kind, t):
        n_f, n_s, n_i = detection_densities(t, rates)
        return {"first": n_f, "second": n_s, "detector": n_i}[kind]

    series = {
        "first": (records["t_f"], cfg.n0),
        "second": (records["t_s"], cfg.n0),
        # per-detector stream holds on average one photon per molecule
        "detector": (d1, cfg.n0),
    }
    for kind, (samples, norm) in series.items():
        hist = build_histogram(samples, width, (0.0, t_hi))
        centers = hist.centers
        curve = density_curve(kind, centers)
        expected = norm * curve * width  # expected counts per bin
        with open(os.path.join(out, f"fig1_overlay_{kind}.csv"), "w") as fh:
            fh.write("t,density,curve,band\n")
            for tc, c, cv, mu in zip(centers, hist.counts, curve, expected):
                dens = c / (norm * width) / g
                band = 4.0 * np.sqrt(mu) / (norm * width) / g
                fh.write(f"{tc * g:.16e},{dens:.16e},{cv / g:.16e},{band:.16e}\n")


def run_rate_derivation(cfg: ExperimentConfig) -> list:
    """Amplitude-engine reports: main case, separation sweep, case studies.

    Returns the list of entries written to rates.json; each entry wraps
    one RateRatioReport (fields exactly as typed) plus case parameters.
    """
    cfg.validate()
    out = _ensure_outdir(cfg)
    a = cfg.amplitude
    g = cfg.rates.gamma
    half = a.grid_span_factor * max(a.width_sum, a.width_diff)
    grid = SpatialGrid.centered(half, a.grid_points)
    state = make_two_atom_gaussian(a.width_sum, a.width_diff, grid)
    free = EvolutionChoice("free-propagation", a.dt)
    entries = []

    def add(params: dict, report, interference=None):
        entry = {
            "case": report.case_label,
            "params": params,
            "report": report.to_dict(),
            "absolute_rate_per_s": report.ratio * g,
        }
        if interference is not None:
            entry["interference_magnitude"] = interference
        entries.append(entry)

    add({"evolution": "identity"}, first_emission_rate_ratio(state, IDENTITY))
    add({"evolution": "free-propagation", "dt": a.dt}, first_emission_rate_ratio(state, free))

    for sep in a.separations:
        pair = receding_pair(sep, a.dt, a.sigma)
        report = second_emission_rate_ratio(pair, a.dt, a.recoil_k)
        add({"separation": sep, "dt": a.dt, "recoil_k": a.recoil_k, "sigma": a.sigma}, report)

    entries.extend(property_case_entries(cfg, grid, state))

    with open(os.path.join(out, "rates.json"), "w") as fh:
        json.dump(entries, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return entries


def property_case_entries(cfg: ExperimentConfig, grid: SpatialGrid, state) -> list:
    """The four comparison case studies as rates.json entries."""
    a = cfg.amplitude
    g = cfg.rates.gamma
    entries = []

    def add(case, params, result):
        entries.append(
            {
                "case": case,
                "params": params,
                "report": result.report.to_dict(),
                "interference_magnitude": result.interference_magnitude,
                "absolute_rate_per_s": result.report.ratio * g,
            }
        )

    # non-entangled initial state: symmetrized pair of well-separated
    # (hence orthogonal) packets, reported under both final-state
    # conventions, plus the identical-packet variant
    sep = 12.0 * a.sigma
    chi = make_packet(-0.5 * sep, 0.0, a.sigma)
    xi = make_packet(+0.5 * sep, 0.0, a.sigma)
    res = property_case_rate("prop1-nonentangled", (chi, xi), IDENTITY, grid=grid)
    add("prop1-nonentangled", {"variant": "orthogonal", "separation": sep}, res)

    lopsided = [make_packet(c * a.sigma - 0.5 * sep, 0.0, a.sigma) for c in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    res = property_case_rate(
        "prop1-nonentangled", (chi, xi), IDENTITY, convention="restricted-subset",
        grid=grid, family=lopsided,
    )
    add(
        "prop1-nonentangled",
        {"variant": "orthogonal", "separation": sep, "family": "5 packets around one atom"},
        res,
    )

    spanning = [make_packet(c, 0.0, a.sigma) for c in np.arange(-0.75 * sep, 0.75 * sep + 0.1, 0.25 * sep)]
    res = property_case_rate(
        "prop1-nonentangled", (chi, xi), IDENTITY, convention="restricted-subset",
        grid=grid, family=spanning,
    )
    add(
        "prop1-nonentangled",
        {"variant": "orthogonal", "separation": sep, "family": "7 packets spanning both atoms"},
        res,
    )

    res = property_case_rate("prop1-nonentangled", (chi, chi), IDENTITY, grid=grid)
    add("prop1-nonentangled", {"variant": "identical"}, res)

    res = property_case_rate("prop2-nonsymmetrized", state, IDENTITY)
    add("prop2-nonsymmetrized", {}, res)
    res = property_case_rate("prop3-entangled-final", state, IDENTITY)
    add("prop3-entangled-final", {}, res)
    res = property_case_rate("prop4-entangled-second", state, IDENTITY)
    add("prop4-entangled-second", {"variant": "both-symmetric"}, res)
    return entries


def run_full(cfg: ExperimentConfig, overlay: bool = True) -> ReportBundle:
    """Everything: simulation+fits, figure table, rate derivation."""
    bundle = run_experiment(cfg)
    fig = reproduce_figure1(cfg, overlay=overlay)
    bundle.curve_tables["fig1"] = fig
    bundle.rate_ratios = run_rate_derivation(cfg)
    bundle.curve_tables["rates"] = os.path.join(cfg.output_dir, "rates.json")
    write_report(os.path.join(cfg.output_dir, "report.json"), bundle)
    return bundle


def check_report(cfg: ExperimentConfig, bundle: ReportBundle) -> list[str]:
    """Quick self-checks mirroring the headline relations; returns failures."""
    g = cfg.rates.gamma
    failures = []

    def expect(name, value, target, tol):
        if abs(value - target) > tol:
            failures.append(f"{name}: {value:.6g} not within {tol:g} of {target}")

    fits = bundle.fits
    expect("first-rate/gamma", fits["first"]["rate_hat"] / g, 2.0, 0.02)
    expect("second-rate/gamma", fits["second_interval"]["rate_hat"] / g, 1.0, 0.01)
    expect("detector1-rate/gamma", fits["detector_1"]["rate_hat"] / g, 1.0, 0.01)
    expect("detector2-rate/gamma", fits["detector_2"]["rate_hat"] / g, 1.0, 0.01)
    if "coincidence" in fits:
        expect("coincidence-rate/gamma", fits["coincidence"]["rate_hat"] / g, 1.0, 0.02)

    by_case = {}
    for entry in bundle.rate_ratios:
        by_case.setdefault(entry["case"], []).append(entry)
    if by_case:
        for e in by_case.get("entangled-main", []):
            expect("first-emission ratio", e["report"]["ratio"], 2.0, 1e-4)
        sweeps = by_case.get("second-emission", [])
        if sweeps:
            far = max(sweeps, key=lambda e: e["params"]["separation"])
            expect("second-emission far ratio", far["report"]["ratio"], 1.0, 1e-4)
        for e in by_case.get("prop2-nonsymmetrized", []):
            expect("prop2 ratio", e["report"]["ratio"], 1.0, 1e-6)
        for e in by_case.get("prop3-entangled-final", []):
            expect("prop3 ratio", e["report"]["ratio"], 2.0, 1e-4)
        for e in by_case.get("prop4-entangled-second", []):
            expect("prop4 ratio", e["report"]["ratio"], 2.0, 1e-4)
    return failures
