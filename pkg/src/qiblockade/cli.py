"""Command-line surface: single-point evaluation, closed-form optima, parameter
sweeps to CSV, delayed correlations, and an invariant self-check.

Config files are flat ``key = value`` text with ``#`` comments.  Rates are
given either in units of kappa (plain keys, e.g. ``eta = 0.1`` or
``eta = 0.1kappa``) or in absolute GHz via ``*_ghz`` keys, in which case
``kappa_ghz`` must be present and sets the scale; mixing the two styles for
one quantity is an error.  Sweeps are described by ``axis1``/``axis2`` keys of
the form ``name : start : stop : count`` over the parameters delta_c, theta,
omega_rabi, g, gamma_d or eta (values in units of kappa; theta in radians).

Subcommands: point, optimal, sweep, g2tau, check.  Exit codes: 0 success,
1 validation/config error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analytic import solve_amplitudes, stationarity_residuals
from .errors import ConfigError, SolverError, ValidationError
from .hilbert import space_ops
from .lindblad import build_liouvillian, steady_state, zero_mode_count
from .model import (
    RateConvention,
    SystemParams,
    build_hamiltonian,
    jc_eigenvalues,
    optimal_conditions,
)
from .observables import ObservableRecord, g2_tau, record_from_state

AXIS_PARAMS = ("delta_c", "theta", "omega_rabi", "g", "gamma_d", "eta")

_RATE_KEYS = ("kappa", "gamma", "gamma_d", "g", "eta", "omega_rabi", "delta_c")
_PARAM_KEYS = set(_RATE_KEYS) | {"theta", "theta_pi", "n_max", "convention"}
_GHZ_KEYS = {k + "_ghz" for k in _RATE_KEYS}
_FREQ_KEYS = {"omega_c_ghz", "omega_a_ghz", "omega_p_ghz", "omega_l_ghz"}
_SWEEP_KEYS = {
    "mode",
    "axis1",
    "axis2",
    "outputs",
    "optimal",
    "track_detuning",
    "min_over_delta_c",
}
_KNOWN_KEYS = _PARAM_KEYS | _GHZ_KEYS | _FREQ_KEYS | _SWEEP_KEYS

OUTPUT_CHOICES = ("n_c", "g2_0", "p_n")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_PARAMS:
            raise ConfigError(
                f"axis parameter {self.name!r} not in {AXIS_PARAMS}"
            )
        if self.count < 2:
            raise ConfigError(f"axis {self.name}: count must be >= 2, got {self.count}")
        if self.start == self.stop:
            raise ConfigError(f"axis {self.name}: start must differ from stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: axes, baseline parameters, outputs, and mode switches.

    mode 'jc' forces omega_rabi = 0 at every point.  ``optimal`` recomputes
    (theta, omega_rabi) from the closed-form conditions at each point for the
    chosen detuning branch; ``track_detuning`` pins delta_c to +g or -g per
    point.  ``min_over_delta_c`` = (lo, hi, count) in units of g replaces each
    point by the g2-minimizing detuning on that grid (recorded in an extra
    column).
    """

    axis1: Axis
    base: SystemParams
    axis2: Axis | None = None
    outputs: tuple = ("n_c", "g2_0")
    mode: str = "qi"
    optimal: str | None = None
    track_detuning: str | None = None
    min_over_delta_c: tuple | None = None

    def __post_init__(self):
        if self.mode not in ("jc", "qi"):
            raise ConfigError(f"mode must be 'jc' or 'qi', got {self.mode!r}")
        if not self.outputs:
            raise ConfigError("outputs must name at least one observable")
        for name in self.outputs:
            if name not in OUTPUT_CHOICES:
                raise ConfigError(f"unknown output {name!r}; choose from {OUTPUT_CHOICES}")
        for field_name in ("optimal", "track_detuning"):
            value = getattr(self, field_name)
            if value is not None and value not in ("red", "blue"):
                raise ConfigError(f"{field_name} must be 'red', 'blue' or 'none'")
        axis_names = {self.axis1.name} | ({self.axis2.name} if self.axis2 else set())
        if self.min_over_delta_c is not None:
            lo, hi, count = self.min_over_delta_c
            if count < 2 or not lo < hi:
                raise ConfigError("min_over_delta_c needs lo < hi and count >= 2")
            if "delta_c" in axis_names or self.track_detuning:
                raise ConfigError(
                    "min_over_delta_c conflicts with a delta_c axis or track_detuning"
                )
        if self.track_detuning and "delta_c" in axis_names:
            raise ConfigError("track_detuning conflicts with a delta_c axis")
        if self.mode == "jc" and self.optimal:
            raise ConfigError("optimal drive settings are meaningless with mode = jc")


def _parse_value(raw: str, key: str, line_no: int) -> float:
    text = raw.strip().lower()
    if text.endswith("kappa"):
        text = text[: -len("kappa")].strip()
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"line {line_no}: cannot parse number {raw!r} for {key}") from None


def _parse_axis(raw: str, line_no: int) -> Axis:
    parts = [p.strip() for p in raw.split(":")]
    if len(parts) != 4:
        raise ConfigError(
            f"line {line_no}: axis must be 'name : start : stop : count', got {raw!r}"
        )
    name, start, stop, count = parts
    try:
        return Axis(name, float(start), float(stop), int(count))
    except ValueError:
        raise ConfigError(f"line {line_no}: bad axis numbers in {raw!r}") from None


def _read_pairs(path: str) -> list[tuple[int, str, str]]:
    pairs = []
    seen = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {body!r}")
        key, _, value = body.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {line_no}: empty key or value")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = line_no
        pairs.append((line_no, key, value))
    return pairs


def load_config(path: str) -> tuple[SystemParams, SweepSpec | None, dict]:
    """Parse and validate a config file.

    Returns the baseline parameters, a SweepSpec when axis1 is present, and an
    extras dict carrying the absolute scale (kappa_ghz) when one was given.
    """
    pairs = _read_pairs(path)
    raw = {key: (line_no, value) for line_no, key, value in pairs}

    ghz_present = [k for k in raw if k in _GHZ_KEYS or k in _FREQ_KEYS]
    kappa_ghz = None
    if ghz_present:
        if "kappa_ghz" not in raw:
            raise ConfigError(
                "missing kappa_ghz: absolute-GHz keys "
                f"{sorted(ghz_present)} need the kappa scale"
            )
        line_no, value = raw["kappa_ghz"]
        kappa_ghz = _parse_value(value, "kappa_ghz", line_no)
        if kappa_ghz <= 0:
            raise ConfigError(f"line {line_no}: kappa_ghz must be > 0")

    # equal-frequency assumption: reject configs that try to split the
    # drive/pump or cavity/emitter frequencies instead of silently generalizing
    freq = {}
    for key in _FREQ_KEYS:
        if key in raw:
            line_no, value = raw[key]
            freq[key] = _parse_value(value, key, line_no)
    if ("omega_c_ghz" in freq) != ("omega_a_ghz" in freq):
        raise ConfigError("omega_c_ghz and omega_a_ghz must be given together")
    if ("omega_p_ghz" in freq) != ("omega_l_ghz" in freq):
        raise ConfigError("omega_p_ghz and omega_l_ghz must be given together")
    if "omega_c_ghz" in freq and freq["omega_c_ghz"] != freq["omega_a_ghz"]:
        raise ConfigError(
            "omega_c_ghz != omega_a_ghz: the cavity and emitter must be mutually "
            "resonant in this model"
        )
    if "omega_p_ghz" in freq and freq["omega_p_ghz"] != freq["omega_l_ghz"]:
        raise ConfigError(
            "omega_p_ghz != omega_l_ghz: the drive and pump must share one frequency"
        )
    derived_delta_c = None
    if "omega_c_ghz" in freq and "omega_p_ghz" in freq:
        derived_delta_c = (freq["omega_c_ghz"] - freq["omega_p_ghz"]) / kappa_ghz
    elif freq:
        raise ConfigError("frequency keys need both the cavity and drive pairs")

    kwargs = {}
    for name in _RATE_KEYS:
        plain = name in raw
        ghz = (name + "_ghz") in raw
        if plain and ghz:
            raise ConfigError(f"give {name} either in kappa units or in GHz, not both")
        if plain:
            line_no, value = raw[name]
            kwargs[name] = _parse_value(value, name, line_no)
        elif ghz:
            line_no, value = raw[name + "_ghz"]
            kwargs[name] = _parse_value(value, name, line_no) / kappa_ghz
    if "kappa_ghz" in raw and "kappa" not in kwargs:
        kwargs["kappa"] = 1.0
    if derived_delta_c is not None:
        if "delta_c" in kwargs:
            raise ConfigError("delta_c given both directly and via frequency keys")
        kwargs["delta_c"] = derived_delta_c

    if "theta" in raw and "theta_pi" in raw:
        raise ConfigError("give theta either in radians or as theta_pi, not both")
    if "theta" in raw:
        line_no, value = raw["theta"]
        kwargs["theta"] = _parse_value(value, "theta", line_no)
    elif "theta_pi" in raw:
        line_no, value = raw["theta_pi"]
        kwargs["theta"] = math.pi * _parse_value(value, "theta_pi", line_no)

    if "n_max" in raw:
        line_no, value = raw["n_max"]
        try:
            kwargs["n_max"] = int(value)
        except ValueError:
            raise ConfigError(f"line {line_no}: n_max must be an integer") from None
    if "convention" in raw:
        line_no, value = raw["convention"]
        try:
            kwargs["convention"] = RateConvention(value.lower())
        except ValueError:
            raise ConfigError(f"line {line_no}: convention must be 'half' or 'full'") from None

    try:
        params = SystemParams(**kwargs)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc

    spec = None
    if "axis1" in raw or "axis2" in raw:
        if "axis1" not in raw:
            raise ConfigError("axis2 given without axis1")
        line_no, value = raw["axis1"]
        axis1 = _parse_axis(value, line_no)
        axis2 = None
        if "axis2" in raw:
            line_no, value = raw["axis2"]
            axis2 = _parse_axis(value, line_no)
            if axis2.name == axis1.name:
                raise ConfigError("axis1 and axis2 must sweep different parameters")
        outputs = ("n_c", "g2_0")
        if "outputs" in raw:
            _, value = raw["outputs"]
            outputs = tuple(p.strip() for p in value.split(",") if p.strip())
        mode = raw["mode"][1].lower() if "mode" in raw else "qi"

        def _branch(key):
            if key not in raw:
                return None
            value = raw[key][1].lower()
            return None if value == "none" else value

        min_over = None
        if "min_over_delta_c" in raw:
            line_no, value = raw["min_over_delta_c"]
            parts = [p.strip() for p in value.split(":")]
            if len(parts) != 3:
                raise ConfigError(
                    f"line {line_no}: min_over_delta_c must be 'lo : hi : count'"
                )
            try:
                min_over = (float(parts[0]), float(parts[1]), int(parts[2]))
            except ValueError:
                raise ConfigError(f"line {line_no}: bad min_over_delta_c numbers") from None
        spec = SweepSpec(
            axis1=axis1,
            axis2=axis2,
            base=params,
            outputs=outputs,
            mode=mode,
            optimal=_branch("optimal"),
            track_detuning=_branch("track_detuning"),
            min_over_delta_c=min_over,
        )
    elif raw.keys() & (_SWEEP_KEYS - {"axis1", "axis2"}):
        extra = sorted(raw.keys() & (_SWEEP_KEYS - {"axis1", "axis2"}))
        raise ConfigError(f"sweep keys {extra} given without axis1")

    return params, spec, {"kappa_ghz": kappa_ghz}


# --- sweep engine -----------------------------------------------------------


def _point_params(spec: SweepSpec, values: tuple) -> SystemParams:
    """Baseline parameters with axis values and mode switches applied."""
    updates = {spec.axis1.name: values[0]}
    if spec.axis2 is not None:
        updates[spec.axis2.name] = values[1]
    p = replace(spec.base, **updates)
    if spec.mode == "jc":
        p = replace(p, omega_rabi=0.0)
    if spec.optimal:
        opt = optimal_conditions(p)
        theta = opt.theta_opt_red if spec.optimal == "red" else opt.theta_opt_blue
        p = replace(p, theta=theta, omega_rabi=opt.omega_opt)
    if spec.track_detuning:
        sign = 1.0 if spec.track_detuning == "red" else -1.0
        p = replace(p, delta_c=sign * p.g)
    return p


def _solve_record(p: SystemParams) -> tuple[ObservableRecord, float]:
    ss = steady_state(build_liouvillian(p))
    return record_from_state(ss.rho, p), ss.residual


def _sweep_worker(task) -> tuple:
    """Evaluate one sweep point; never raises (failures are flagged in-row)."""
    index, p, min_over = task
    try:
        if min_over is None:
            rec, residual = _solve_record(p)
            return index, (math.nan, rec, residual, True)
        lo, hi, count = min_over
        best = None
        for dc in np.linspace(lo * p.g, hi * p.g, count):
            rec, residual = _solve_record(replace(p, delta_c=float(dc)))
            key = rec.g2_0 if rec.g2_defined else math.inf
            if best is None or key < best[0]:
                best = (key, float(dc), rec, residual)
        _, dc_min, rec, residual = best
        return index, (dc_min, rec, residual, True)
    except (SolverError, ValidationError):
        return index, (math.nan, None, math.nan, False)


def run_sweep(spec: SweepSpec, out_path: str, threads: int = 1, reoptimize: bool = False):
    """Execute a sweep and write the CSV; returns the number of converged rows."""
    values1 = spec.axis1.values()
    values2 = spec.axis2.values() if spec.axis2 is not None else [None]
    tasks = []
    index = 0
    for v1 in values1:
        for v2 in values2:
            point = (float(v1),) if v2 is None else (float(v1), float(v2))
            tasks.append((index, _point_params(spec, point), spec.min_over_delta_c))
            index += 1

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(tasks) // (4 * threads))
            results = list(pool.map(_sweep_worker, tasks, chunksize=chunk))
    else:
        results = [_sweep_worker(task) for task in tasks]
    results.sort(key=lambda item: item[0])

    refined = {}
    if reoptimize:
        if not spec.optimal:
            raise ConfigError("--reoptimize needs an optimal = red|blue sweep")
        for (index, _), task in zip(results, tasks):
            refined[index] = _local_refinement(task[1])

    header = [spec.axis1.name]
    if spec.axis2 is not None:
        header.append(spec.axis2.name)
    if spec.min_over_delta_c is not None:
        header.append("delta_c_at_min")
    for name in spec.outputs:
        if name == "p_n":
            header.extend(f"p_{n}" for n in range(spec.base.n_max + 1))
        else:
            header.append(name)
    if reoptimize:
        header.extend(["g2_0_refined", "theta_refined", "omega_refined"])
    header.extend(["residual", "converged"])

    n_ok = 0
    lines = [",".join(header)]
    for index, (dc_min, rec, residual, ok) in results:
        row_values = []
        if spec.axis2 is not None:
            i1, i2 = divmod(index, len(values2))
            row_values.append(values1[i1])
            row_values.append(values2[i2])
        else:
            row_values.append(values1[index])
        if spec.min_over_delta_c is not None:
            row_values.append(dc_min)
        for name in spec.outputs:
            if rec is None:
                row_values.extend(
                    [math.nan] * (spec.base.n_max + 1 if name == "p_n" else 1)
                )
            elif name == "n_c":
                row_values.append(rec.n_c)
            elif name == "g2_0":
                row_values.append(rec.g2_0)
            else:
                row_values.extend(rec.p_n)
        if reoptimize:
            row_values.extend(refined[index])
        row_values.append(residual)
        row = [_fmt(v) for v in row_values]
        row.append("1" if ok else "0")
        if ok:
            n_ok += 1
        lines.append(",".join(row))

    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
    return n_ok, len(tasks)


def _local_refinement(p: SystemParams, n_grid: int = 21) -> tuple:
    """Grid refinement around the point's drive settings: +/-10% in omega_rabi,
    +/-0.05 pi in theta; returns (min g2, theta, omega) over the grid."""
    best = (math.inf, p.theta, p.omega_rabi)
    for theta in np.linspace(p.theta - 0.05 * math.pi, p.theta + 0.05 * math.pi, n_grid):
        for omega in np.linspace(0.9 * p.omega_rabi, 1.1 * p.omega_rabi, n_grid):
            try:
                rec, _ = _solve_record(replace(p, theta=float(theta), omega_rabi=float(omega)))
            except (SolverError, ValidationError):
                continue
            if rec.g2_defined and rec.g2_0 < best[0]:
                best = (rec.g2_0, float(theta), float(omega))
    return best


def _fmt(value) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format(float(value), ".17g")


# --- subcommands ------------------------------------------------------------


def _apply_overrides(params: SystemParams, args) -> SystemParams:
    updates = {}
    if getattr(args, "nmax", None) is not None:
        updates["n_max"] = args.nmax
    if getattr(args, "convention", None) is not None:
        updates["convention"] = RateConvention(args.convention)
    return replace(params, **updates) if updates else params


def cmd_point(args) -> int:
    params, _, _ = load_config(args.config)
    params = _apply_overrides(params, args)
    rec, residual = _solve_record(params)
    print(f"n_c = {_fmt(rec.n_c)}")
    print(f"g2_0 = {_fmt(rec.g2_0)}" + ("" if rec.g2_defined else "  # undefined: n_c below threshold"))
    print("p_n = " + " ".join(_fmt(v) for v in rec.p_n))
    print(f"residual = {_fmt(residual)}")
    return 0


def cmd_optimal(args) -> int:
    if args.config:
        params, _, _ = load_config(args.config)
    else:
        params = SystemParams()
    updates = {}
    for name in ("g", "kappa", "gamma", "eta"):
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    if updates:
        params = replace(params, **updates)
    opt = optimal_conditions(params)
    theta = opt.theta_opt_red if args.branch == "red" else opt.theta_opt_blue
    print(f"branch = {args.branch}")
    print(f"theta_opt_rad = {_fmt(theta)}")
    print(f"theta_opt_over_pi = {_fmt(theta / math.pi)}")
    print(f"omega_opt = {_fmt(opt.omega_opt)}")
    print(f"omega_opt_over_g = {_fmt(opt.omega_opt / params.g)}")
    print(f"r_value = {_fmt(opt.r_value)}")
    return 0


def cmd_sweep(args) -> int:
    params, spec, _ = load_config(args.config)
    if spec is None:
        raise ConfigError(f"config {args.config} has no axis1: nothing to sweep")
    base = _apply_overrides(spec.base, args)
    if base is not spec.base:
        spec = replace(spec, base=base)
    n_ok, n_total = run_sweep(
        spec, args.out, threads=args.threads, reoptimize=args.reoptimize
    )
    print(f"wrote {args.out}: {n_ok}/{n_total} points converged")
    if n_ok == 0:
        raise SolverError("no sweep point converged")
    return 0


def cmd_g2tau(args) -> int:
    params, _, extras = load_config(args.config)
    params = _apply_overrides(params, args)
    if args.tau_max < 0 or (args.tau_max == 0 and args.points != 1):
        raise ValidationError("tau-max must be > 0 (or 0 with exactly one point)")
    if args.points < 1:
        raise ValidationError("points must be >= 1")
    taus = np.linspace(0.0, args.tau_max, args.points)

    kappa_ghz = extras.get("kappa_ghz")
    if args.time_unit != "none" and kappa_ghz is None:
        raise ConfigError("--time-unit needs kappa_ghz in the config to fix the scale")

    liouv = build_liouvillian(params)
    rho = steady_state(liouv).rho
    series = g2_tau(liouv, rho, taus / params.kappa)

    header = ["tau_kappa", "g2"]
    if args.time_unit == "ghz":
        header.append("tau_ns")  # rates read as plain 1/ns frequencies
        to_ns = 1.0 / kappa_ghz
    elif args.time_unit == "ghz-2pi":
        header.append("tau_ns")  # rates read as angular frequencies, 2 pi * GHz
        to_ns = 1.0 / (2.0 * math.pi * kappa_ghz)
    lines = [",".join(header)]
    for tau, value in zip(taus, series):
        row = [_fmt(tau), _fmt(value)]
        if args.time_unit != "none":
            row.append(_fmt(tau * to_ns))
        lines.append(",".join(row))
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {len(taus)} delays")
    return 0


def cmd_check(args) -> int:
    n_max = args.nmax if args.nmax is not None else 10
    convention = RateConvention(args.convention) if args.convention else RateConvention.HALF
    base = SystemParams(n_max=n_max, convention=convention, g=2.0, gamma=0.05, eta=0.1)
    opt = optimal_conditions(base)
    qi = replace(base, delta_c=base.g, theta=opt.theta_opt_red, omega_rabi=opt.omega_opt)
    ops = space_ops(n_max)

    failures = 0

    def check(name, fn):
        nonlocal failures
        try:
            fn()
        except Exception as exc:  # report and continue
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")

    def _ladder():
        comm = ops.a @ ops.ad - ops.ad @ ops.a
        expected = np.array(ops.eye)
        top_g = ops.dims.index(0, n_max)
        top_e = ops.dims.index(1, n_max)
        expected[top_g, top_g] = -n_max
        expected[top_e, top_e] = -n_max
        assert np.allclose(comm, expected, atol=1e-12), "commutator defect wrong"

    def _qubit():
        assert np.array_equal(ops.sge @ ops.seg + ops.seg @ ops.sge, ops.eye)

    def _hermitian():
        for theta in np.linspace(-math.pi, math.pi, 7):
            h = build_hamiltonian(replace(qi, theta=float(theta))).data
            assert np.max(np.abs(h - h.conj().T)) < 1e-12

    def _dressed():
        p0 = replace(base, eta=0.0, omega_rabi=0.0, delta_c=0.7)
        h = build_hamiltonian(p0).data
        for n in range(1, n_max):
            idx = [p0.dims.index(0, n), p0.dims.index(1, n - 1)]
            block = h[np.ix_(idx, idx)]
            evals = np.sort(np.linalg.eigvalsh(block))
            lo, hi = jc_eigenvalues(n, p0)
            assert abs(evals[0] - lo) < 1e-10 * max(1, abs(lo))
            assert abs(evals[1] - hi) < 1e-10 * max(1, abs(hi))

    def _trace_null():
        liouv = build_liouvillian(qi)
        row = np.zeros(ops.dims.total_dim**2, dtype=complex)
        d = ops.dims.total_dim
        row[np.arange(d) * d + np.arange(d)] = 1.0
        assert np.linalg.norm(row @ liouv.data) < 1e-10

    def _steady():
        liouv = build_liouvillian(qi)
        ss = steady_state(liouv)
        ss.rho.validate()
        assert ss.residual < 1e-9
        assert zero_mode_count(build_liouvillian(replace(qi, n_max=4))) == 1

    def _regression():
        liouv = build_liouvillian(qi)
        rho = steady_state(liouv).rho
        from .observables import g2_zero

        series = g2_tau(liouv, rho, np.array([0.0]))
        assert abs(series[0] - g2_zero(rho)) < 1e-6

    def _cancellation():
        amps = solve_amplitudes(qi)
        assert abs(amps.c_2g) < 1e-12, f"|c_2g| = {abs(amps.c_2g):.3e}"
        res = stationarity_residuals(amps, qi)
        for name in ("c_0g", "c_1g", "c_1e", "c_2g"):
            assert res[name] < 1e-12, f"row {name} residual {res[name]:.3e}"

    check("ladder commutator boundary defect", _ladder)
    check("emitter projector algebra", _qubit)
    check("hamiltonian hermiticity", _hermitian)
    check("dressed-state energies", _dressed)
    check("liouvillian trace preservation", _trace_null)
    check("steady-state invariants", _steady)
    check("regression tau=0 consistency", _regression)
    check("two-photon cancellation at closed-form optimum", _cancellation)

    if failures:
        raise SolverError(f"{failures} invariant check(s) failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qiblockade",
        description="Steady-state photon-blockade simulator for a driven "
        "emitter-cavity system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--nmax", type=int, default=None, help="Fock truncation override")
        sp.add_argument(
            "--convention", choices=("half", "full"), default=None,
            help="rate convention override",
        )

    sp = sub.add_parser("point", help="observables at one parameter point")
    sp.add_argument("--config", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_point)

    sp = sub.add_parser("optimal", help="closed-form interference optimum")
    sp.add_argument("--config", default=None)
    sp.add_argument("--g", type=float, default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--branch", choices=("red", "blue"), default="red")
    sp.set_defaults(func=cmd_optimal)

    sp = sub.add_parser("sweep", help="parameter sweep to CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument(
        "--reoptimize", action="store_true",
        help="add a local (theta, omega) grid refinement around the closed form",
    )
    add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("g2tau", help="delayed pair correlation to CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--tau-max", type=float, required=True, help="max delay in 1/kappa")
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument(
        "--time-unit", choices=("none", "ghz", "ghz-2pi"), default="none",
        help="add an absolute-time column, reading kappa_ghz as a plain or angular rate",
    )
    add_common(sp)
    sp.set_defaults(func=cmd_g2tau)

    sp = sub.add_parser("check", help="run the invariant self-check suite")
    add_common(sp)
    sp.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
