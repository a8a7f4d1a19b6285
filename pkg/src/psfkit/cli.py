"""Command-line front-end: thin subcommands, JSON configs, and the pipeline.

Every subcommand wraps exactly one library operation; ``run`` chains them
into the reproducible end-to-end experiment and ``selfcheck`` replays the
small-instance oracle suite. Exit codes: 0 success, 2 config error, 3 IO
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import coherence as coh
from . import metrics as met
from . import presets, psfk, render, restore, simulate
from .types import (
    AberrationProfile,
    ArrayGeometry,
    CoherenceMap,
    ComplexImage,
    EnvelopeImage,
    FilterKernel,
    GridSpec,
    Psf,
    Pulse,
    RegionMask,
    ScattererMap,
    center_psf,
)

__all__ = ["main", "run_pipeline", "selfcheck", "ConfigError", "default_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    """Invalid configuration document or argument."""


def default_config() -> dict:
    """Fully resolved default experiment configuration."""
    return {
        "geometry": {
            "n_elements": presets.N_ELEMENTS,
            "pitch_m": presets.PITCH,
            "f0_hz": presets.F0,
            "c0_mps": presets.C0,
            "fs_hz": presets.FS,
            "tx_focus_m": [presets.TX_FOCUS[0], presets.TX_FOCUS[1]],
        },
        "pulse": {
            "fractional_bandwidth": presets.BANDWIDTH,
            "duration_s": None,
        },
        "grid": {
            "n_x": 256,
            "n_z": 256,
            "dx_m": presets.DX,
            "dz_m": presets.DZ,
            "x0_m": None,
            "z0_m": None,
        },
        "aberrator": {
            "preset": None,
            "rms_ns": 50.0,
            "corr_len": 5.0,
            "seed": presets.DEFAULT_SEED,
        },
        "phantom": {
            "extent_m": None,
            "cyst_center_m": [0.0, presets.TX_FOCUS[1]],
            "cyst_radius_m": 3e-3,
            "cyst_amp": 0.0,
            "point_targets": [[0.0, 20e-3, 30.0]],
            "density_per_mm2": 40.0,
            "seed": None,
        },
        "filter": {
            "eps": presets.EPS,
            "kernel": "21x41",
            "taper": 2,
        },
        "coherence": {
            "m0": presets.M0,
            "p": presets.P_EXPONENT,
            "axes": presets.AXES,
        },
        "render": {
            "dr_db": presets.DYNAMIC_RANGE_DB,
        },
        "psf_source": "oracle",
        "psf_path": None,
        "out_dir": "out",
    }


def _merge(defaults: dict, given: dict, path: str) -> dict:
    out = {}
    for key, dval in defaults.items():
        if isinstance(dval, dict):
            sub = given.get(key, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"config section '{path}{key}' must be an object")
            out[key] = _merge(dval, sub, f"{path}{key}.")
        else:
            out[key] = given.get(key, dval)
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config key(s) {sorted(unknown)} under '{path or 'top level'}'")
    return out


def resolve_config(cfg: dict) -> dict:
    """Merge a user config over the defaults, rejecting unknown keys."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    out = _merge(default_config(), cfg, "")
    ab = out["aberrator"]
    if ab["preset"] is not None:
        if ab["preset"] not in presets.ABERRATOR_PRESETS:
            raise ConfigError(f"unknown aberrator preset {ab['preset']!r}")
        rms_s, corr = presets.ABERRATOR_PRESETS[ab["preset"]]
        ab["rms_ns"] = rms_s * 1e9
        ab["corr_len"] = corr
    if out["psf_source"] not in ("oracle", "external"):
        raise ConfigError("psf_source must be 'oracle' or 'external'")
    if out["psf_source"] == "external" and not out["psf_path"]:
        raise ConfigError("psf_source 'external' requires psf_path")
    if out["coherence"]["axes"] not in ("both", "lateral"):
        raise ConfigError("coherence.axes must be 'both' or 'lateral'")
    if out["phantom"]["seed"] is None:
        out["phantom"]["seed"] = ab["seed"]
    return out


def _parse_kernel(text) -> tuple[int, int]:
    # "21x41" = lateral x axial -> array shape (axial, lateral)
    try:
        lat, ax = (int(v) for v in str(text).lower().split("x"))
    except Exception as exc:
        raise ConfigError(f"kernel must look like '21x41', got {text!r}") from exc
    if lat < 1 or ax < 1 or lat % 2 == 0 or ax % 2 == 0:
        raise ConfigError("kernel dims must be odd and positive")
    return (ax, lat)


def _build_geometry(g: dict) -> ArrayGeometry:
    return ArrayGeometry.linear(
        n_elements=int(g["n_elements"]), pitch=g["pitch_m"], f0=g["f0_hz"],
        c0=g["c0_mps"], fs=g["fs_hz"], tx_focus=tuple(g["tx_focus_m"]))


def _build_pulse(p: dict, f0: float) -> Pulse:
    if p["duration_s"] is not None:
        return Pulse(f0, p["fractional_bandwidth"], p["duration_s"])
    return presets.default_pulse(f0, p["fractional_bandwidth"])


def _build_grid(g: dict, geom: ArrayGeometry) -> GridSpec:
    n_x, n_z = int(g["n_x"]), int(g["n_z"])
    dx, dz = g["dx_m"], g["dz_m"]
    x0 = g["x0_m"]
    z0 = g["z0_m"]
    if x0 is None:
        x0 = -((n_x - 1) // 2) * dx
    if z0 is None:
        z0 = geom.tx_focus[1] - ((n_z - 1) // 2) * dz
    return GridSpec(n_z, n_x, dx, dz, (x0, z0))


def run_pipeline(config, out_dir=None) -> dict:
    """Run the full experiment described by a config (dict or JSON path).

    Writes PSF/kernel/image PSFK files, four PGM renders, metrics.json, and a
    resolved config.json under the output directory, then returns
    {"out_dir", "metrics", "elapsed_s"}.
    """
    if not isinstance(config, dict):
        with open(config, "r", encoding="utf-8") as fh:
            try:
                config = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
    cfg = resolve_config(config)
    if out_dir is not None:
        cfg["out_dir"] = str(out_dir)

    started = time.perf_counter()
    geom = _build_geometry(cfg["geometry"])
    pulse = _build_pulse(cfg["pulse"], geom.f0)
    grid = _build_grid(cfg["grid"], geom)
    ab = cfg["aberrator"]
    profile = simulate.make_aberration_profile(
        geom.n_elements, ab["rms_ns"] * 1e-9, ab["corr_len"], int(ab["seed"]))

    psf_ideal = simulate.simulate_psf(geom, pulse, AberrationProfile.zero(geom.n_elements))
    if cfg["psf_source"] == "oracle":
        psf_aberrated = simulate.simulate_psf(geom, pulse, profile)
    else:
        path = Path(cfg["psf_path"])
        if not path.exists():
            raise FileNotFoundError(
                f"external PSF file {path} not found; point psf_path at a PSFK array")
        psf_aberrated = center_psf(psfk.read_array(path))

    ph = cfg["phantom"]
    extent = ph["extent_m"]
    if extent is None:
        extent = [grid.n_x * grid.dx, grid.n_z * grid.dz]
    spec = simulate.PhantomSpec(
        extent=tuple(extent),
        cyst_center=tuple(ph["cyst_center_m"]),
        cyst_radius=ph["cyst_radius_m"],
        cyst_amp=ph["cyst_amp"],
        point_targets=tuple(tuple(t) for t in ph["point_targets"]),
        scatterer_density=ph["density_per_mm2"],
    )
    smap, cyst, bg = simulate.make_phantom(spec, grid, int(ph["seed"]))

    img_ideal = simulate.synth_speckle(smap, psf_ideal)
    img_aberrated = simulate.synth_speckle(smap, psf_aberrated)

    fl = cfg["filter"]
    kernel_shape = _parse_kernel(fl["kernel"])
    kernel = restore.design_filter(psf_aberrated, psf_ideal, fl["eps"], kernel_shape,
                                   taper=int(fl["taper"]))
    img_restored = restore.apply_filter(img_aberrated, kernel)

    # the index lives on the filtering products themselves: kernel x aberrated
    # data patches, whose sum is the restored pixel
    co = cfg["coherence"]
    wmap = coh.coherence_map(img_aberrated, kernel, int(co["m0"]), axes=co["axes"])
    img_weighted = coh.apply_weighting(img_restored, wmap, co["p"])

    images = {
        "ideal": img_ideal,
        "aberrated": img_aberrated,
        "restored": img_restored,
        "weighted": img_weighted,
    }
    rows = {}
    for name, image in images.items():
        env = render.envelope(image)
        rows[name] = {
            "cr_db": met.contrast_ratio(env, cyst, bg),
            "cnr_db": met.cnr(env, cyst, bg),
            "cnr_linear": met.cnr_linear(env, cyst, bg),
            "gcnr": met.gcnr(env, cyst, bg),
        }

    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    psfk.write_array(out / "psf_ideal.psfk", psf_ideal)
    psfk.write_array(out / "psf_aberrated.psfk", psf_aberrated)
    psfk.write_array(out / "kernel.psfk", kernel)
    for name, image in images.items():
        psfk.write_array(out / f"img_{name}.psfk", image)
        bytes_img = render.log_compress(render.envelope(image), cfg["render"]["dr_db"])
        render.write_image(bytes_img, out / f"img_{name}.pgm", "pgm")
    psfk.write_array(out / "w.psfk", wmap)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {"out_dir": str(out), "metrics": rows,
            "elapsed_s": time.perf_counter() - started}


# selfcheck oracles: deliberately re-derived with explicit matrices and loops
# rather than the library's FFT shortcuts

def _dft_matrix(n: int) -> np.ndarray:
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n)


def _dense_filter_oracle(pa: np.ndarray, pi_: np.ndarray, eps: float,
                         kernel_shape: tuple[int, int], taper: int) -> np.ndarray:
    kz, kx = kernel_shape
    nz, nx = pa.shape[0] + kz - 1, pa.shape[1] + kx - 1
    pad_a = np.zeros((nz, nx), complex)
    pad_a[: pa.shape[0], : pa.shape[1]] = pa
    pad_i = np.zeros((nz, nx), complex)
    pad_i[: pi_.shape[0], : pi_.shape[1]] = pi_

    cols = [np.roll(pad_a, (sz, sx), axis=(0, 1)).ravel()
            for sz in range(nz) for sx in range(nx)]
    C = np.stack(cols, axis=1)
    spec2 = np.abs(_dft_matrix(nz) @ pad_a @ _dft_matrix(nx).T) ** 2
    lam = eps * spec2.max()
    rhs = C.conj().T @ pad_i.ravel()
    kappa = np.linalg.solve(C.conj().T @ C + lam * np.eye(nz * nx), rhs).reshape(nz, nx)

    cz, cx = (nz - 1) // 2, (nx - 1) // 2
    kappa = np.roll(kappa, (cz, cx), axis=(0, 1))
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    taps = kappa[cz - az: cz + az + 1, cx - ax: cx + ax + 1]
    return taps * restore.taper_window(kernel_shape, taper)


def _coherence_oracle(data: np.ndarray, taps: np.ndarray, m0: int) -> np.ndarray:
    kz, kx = taps.shape
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    padded = np.zeros((data.shape[0] + 2 * az, data.shape[1] + 2 * ax), complex)
    padded[az: az + data.shape[0], ax: ax + data.shape[1]] = data
    ez, ex = _dft_matrix(kz), _dft_matrix(kx)
    low_u = [u % kz for u in range(-m0, m0 + 1)]
    low_v = [v % kx for v in range(-m0, m0 + 1)]
    w = np.zeros(data.shape)
    for z in range(data.shape[0]):
        for x in range(data.shape[1]):
            P = np.empty((kz, kx), complex)
            for a in range(kz):
                for b in range(kx):
                    P[a, b] = taps[a, b] * padded[z + 2 * az - a, x + 2 * ax - b]
            Q = ez @ P @ ex.T
            total = np.sum(np.abs(Q) ** 2)
            if total > 0:
                w[z, x] = sum(np.abs(Q[u, v]) ** 2 for u in low_u for v in low_v) / total
    return w


def _check_filter_oracle(perturb: float) -> tuple[bool, str]:
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(5):
        pa = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        pi_ = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        k = restore.design_filter(pa, pi_, 1e-2, (7, 7), taper=2).taps.copy()
        k[0, 0] += perturb
        ref = _dense_filter_oracle(pa, pi_, 1e-2, (7, 7), taper=2)
        worst = max(worst, np.linalg.norm(k - ref) / np.linalg.norm(ref))
    return worst <= 1e-6, f"max relative error {worst:.2e} (tol 1e-6)"


def _check_convolution_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(102)
    amps = rng.standard_normal((16, 16))
    taps = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    smap = ScattererMap(amps, 1.0, 1.0)
    psf = Psf(ComplexImage(_unit_peak(taps), 1.0, 1.0), (2, 2))
    got = simulate.synth_speckle(smap, psf).data
    ref = np.zeros((16, 16), complex)
    for z in range(16):
        for x in range(16):
            for a in range(5):
                for b in range(5):
                    zz, xx = z + 2 - a, x + 2 - b
                    if 0 <= zz < 16 and 0 <= xx < 16:
                        ref[z, x] += psf.data[a, b] * amps[zz, xx]
    err = np.linalg.norm(got - ref) / np.linalg.norm(ref)
    return err <= 1e-10, f"relative error {err:.2e} (tol 1e-10)"


def _unit_peak(taps: np.ndarray) -> np.ndarray:
    flat = np.abs(taps)
    peak = np.unravel_index(int(np.argmax(flat)), flat.shape)
    out = taps / flat[peak]
    center = ((taps.shape[0] - 1) // 2, (taps.shape[1] - 1) // 2)
    if peak != center:
        out = np.roll(out, (center[0] - peak[0], center[1] - peak[1]), axis=(0, 1))
    return out


def _check_coherence_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(103)
    data = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    taps = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k = FilterKernel.from_taps(taps)
    got = coh.coherence_map(data, k, m0=1, axes="both").w
    ref = _coherence_oracle(data, taps, m0=1)
    err = np.max(np.abs(got - ref))
    return err <= 1e-10, f"max abs error {err:.2e} (tol 1e-10)"


def _check_gcnr_cases() -> tuple[bool, str]:
    rng = np.random.default_rng(104)
    base = rng.uniform(0.1, 1.0, size=(40, 50))
    env = EnvelopeImage(base, 1.0, 1.0)
    half = np.zeros((40, 50), dtype=bool)
    half[:, :25] = True
    mirrored = RegionMask(np.roll(half, 25, axis=1), "right")
    left = RegionMask(half, "left")
    same = base.copy()
    same[:, 25:] = base[:, :25]
    identical = met.gcnr(EnvelopeImage(same, 1.0, 1.0), left, mirrored)

    disjoint = same.copy()
    disjoint[:, 25:] = base[:, :25] + 2.0
    separated = met.gcnr(EnvelopeImage(disjoint, 1.0, 1.0), left, mirrored)

    n = 1_000_000
    a = rng.uniform(0.0, 1.0, n)
    b = rng.uniform(0.5, 1.5, n)
    field = np.concatenate([a, b]).reshape(2, n)
    env2 = EnvelopeImage(field, 1.0, 1.0)
    bits_a = np.zeros((2, n), dtype=bool)
    bits_a[0] = True
    bits_b = np.zeros((2, n), dtype=bool)
    bits_b[1] = True
    overlap = met.gcnr(env2, RegionMask(bits_a, "a"), RegionMask(bits_b, "b"))

    ok = identical == 0.0 and separated == 1.0 and abs(overlap - 0.5) <= 0.01
    return ok, f"identical={identical:.3g} disjoint={separated:.3g} uniform-overlap={overlap:.4f}"


def selfcheck(stream=None) -> int:
    """Run the small-instance oracle suite; returns a process exit code."""
    stream = stream or sys.stdout
    perturb = float(os.environ.get("PSFKIT_SELFCHECK_PERTURB", "0") or 0)
    checks = [
        ("filter-design dense oracle", lambda: _check_filter_oracle(perturb)),
        ("speckle convolution oracle", _check_convolution_oracle),
        ("coherence DFT oracle", _check_coherence_oracle),
        ("gCNR analytic cases", _check_gcnr_cases),
    ]
    failures = 0
    for name, fn in checks:
        ok, detail = fn()
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=stream)
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def _read_complex_image(path, dx=presets.DX, dz=presets.DZ) -> ComplexImage:
    return ComplexImage(psfk.read_array(path), dx, dz)


def _cmd_simulate_psf(args) -> int:
    geom = presets.default_geometry()
    pulse = presets.default_pulse()
    if args.preset:
        rms, corr = presets.ABERRATOR_PRESETS[args.preset]
    else:
        rms, corr = args.rms_ns * 1e-9, args.corr_len
    profile = simulate.make_aberration_profile(geom.n_elements, rms, corr, args.seed)
    psf = simulate.simulate_psf(geom, pulse, profile)
    psfk.write_array(args.output, psf)
    return EXIT_OK


def _cmd_make_phantom(args) -> int:
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = {}
    cfg = resolve_config(raw)
    geom = _build_geometry(cfg["geometry"])
    grid = _build_grid(cfg["grid"], geom)
    ph = cfg["phantom"]
    extent = ph["extent_m"] or [grid.n_x * grid.dx, grid.n_z * grid.dz]
    spec = simulate.PhantomSpec(
        extent=tuple(extent), cyst_center=tuple(ph["cyst_center_m"]),
        cyst_radius=ph["cyst_radius_m"], cyst_amp=ph["cyst_amp"],
        point_targets=tuple(tuple(t) for t in ph["point_targets"]),
        scatterer_density=ph["density_per_mm2"])
    seed = args.seed if args.seed is not None else int(ph["seed"])
    smap, cyst, bg = simulate.make_phantom(spec, grid, seed)
    prefix = Path(args.output_prefix)
    psfk.write_array(prefix.with_name(prefix.name + "_amps.psfk"), smap)
    psfk.write_array(prefix.with_name(prefix.name + "_cyst.psfk"), cyst)
    psfk.write_array(prefix.with_name(prefix.name + "_bg.psfk"), bg)
    return EXIT_OK


def _cmd_synth(args) -> int:
    amps = psfk.read_array(args.map)
    psf = center_psf(psfk.read_array(args.psf))
    smap = ScattererMap(amps.real.astype(np.float64), presets.DX, presets.DZ)
    img = simulate.synth_speckle(smap, psf)
    psfk.write_array(args.output, img)
    return EXIT_OK


def _cmd_design_filter(args) -> int:
    pa = psfk.read_array(args.psf_aberrated)
    pi_ = psfk.read_array(args.psf_ideal)
    kernel = restore.design_filter(pa, pi_, args.eps, _parse_kernel(args.kernel),
                                   taper=args.taper)
    psfk.write_array(args.output, kernel)
    return EXIT_OK


def _cmd_apply(args) -> int:
    img = psfk.read_array(args.input)
    kernel = FilterKernel.from_taps(psfk.read_array(args.kernel))
    psfk.write_array(args.output, restore.apply_filter(img, kernel))
    return EXIT_OK


def _cmd_coherence(args) -> int:
    img = psfk.read_array(args.input)
    kernel = FilterKernel.from_taps(psfk.read_array(args.kernel))
    wmap = coh.coherence_map(img, kernel, args.m0, axes=args.axes)
    psfk.write_array(args.output, wmap)
    return EXIT_OK


def _cmd_weight(args) -> int:
    data = psfk.read_array(args.input)
    wmap = CoherenceMap(psfk.read_array(args.w).real)
    if args.envelope:
        out = np.abs(data) * wmap.w ** args.p
    else:
        out = data * wmap.w ** args.p
    psfk.write_array(args.output, out)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    env_arr = psfk.read_array(args.env)
    env = EnvelopeImage(np.abs(env_arr), presets.DX, presets.DZ)
    inside = RegionMask(psfk.read_array(args.inside).astype(bool), "inside")
    outside = RegionMask(psfk.read_array(args.outside).astype(bool), "outside")
    payload = {
        "cr_db": met.contrast_ratio(env, inside, outside),
        "cnr_db": met.cnr(env, inside, outside),
        "cnr_linear": met.cnr_linear(env, inside, outside),
        "gcnr": met.gcnr(env, inside, outside),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_render(args) -> int:
    arr = psfk.read_array(args.input)
    env = EnvelopeImage(np.abs(arr), presets.DX, presets.DZ)
    fmt = "png" if str(args.output).lower().endswith(".png") else "pgm"
    render.write_image(render.log_compress(env, args.dr), args.output, fmt)
    return EXIT_OK


def _cmd_profile(args) -> int:
    arr = psfk.read_array(args.input)
    n_z, n_x = arr.shape
    z0 = args.z0_mm * 1e-3 if args.z0_mm is not None else \
        presets.TX_FOCUS[1] - ((n_z - 1) // 2) * presets.DZ
    grid = GridSpec(n_z, n_x, presets.DX, presets.DZ,
                    (-((n_x - 1) // 2) * presets.DX, z0))
    pairs = render.lateral_profile(np.abs(arr), args.z_mm * 1e-3, linear=args.linear,
                                   grid=grid)
    print(json.dumps([[x, v] for x, v in pairs]))
    return EXIT_OK


def _cmd_run(args) -> int:
    result = run_pipeline(args.config, out_dir=args.out_dir)
    print(json.dumps({"out_dir": result["out_dir"], "metrics": result["metrics"]},
                     indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psfkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-psf", help="simulate an (aberrated) PSF patch")
    p.add_argument("--preset", choices=sorted(presets.ABERRATOR_PRESETS))
    p.add_argument("--rms-ns", type=float, default=0.0)
    p.add_argument("--corr-len", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=presets.DEFAULT_SEED)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_simulate_psf)

    p = sub.add_parser("make-phantom", help="draw a scatterer map and masks")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output-prefix", required=True)
    p.set_defaults(fn=_cmd_make_phantom)

    p = sub.add_parser("synth", help="convolve a scatterer map with a PSF")
    p.add_argument("--map", required=True)
    p.add_argument("--psf", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("design-filter", help="design the restoration kernel")
    p.add_argument("--psf-aberrated", required=True)
    p.add_argument("--psf-ideal", required=True)
    p.add_argument("--eps", type=float, default=presets.EPS)
    p.add_argument("--kernel", default="21x41")
    p.add_argument("--taper", type=int, default=2)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_design_filter)

    p = sub.add_parser("apply", help="apply a kernel to an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_apply)

    p = sub.add_parser("coherence", help="compute the coherence map")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--m0", type=int, default=presets.M0)
    p.add_argument("--axes", choices=["both", "lateral"], default=presets.AXES)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_coherence)

    p = sub.add_parser("weight", help="apply coherence weighting")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--p", type=float, default=presets.P_EXPONENT)
    p.add_argument("--envelope", action="store_true",
                   help="weight the detected envelope instead of complex data")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_weight)

    p = sub.add_parser("metrics", help="CR/CNR/gCNR over two masks")
    p.add_argument("--env", required=True)
    p.add_argument("--inside", required=True)
    p.add_argument("--outside", required=True)
    p.add_argument("--json", action="store_true", help="emit JSON (always on)")
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("render", help="log-compress to PGM/PNG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dr", type=float, default=presets.DYNAMIC_RANGE_DB)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("profile", help="lateral line profile at a depth")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--z-mm", type=float, required=True)
    p.add_argument("--z0-mm", type=float, default=None,
                   help="grid start depth; defaults to a focus-centered grid")
    p.add_argument("--linear", action="store_true")
    p.add_argument("--json", action="store_true", help="emit JSON (always on)")
    p.set_defaults(fn=_cmd_profile)

    p = sub.add_parser("run", help="full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--out-dir", default=None)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("selfcheck", help="run the built-in oracle suite")
    p.set_defaults(fn=lambda args: selfcheck())

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (psfk.PsfkError, FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
