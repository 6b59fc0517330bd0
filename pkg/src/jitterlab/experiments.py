"""Deterministic experiment drivers emitting CSV artifacts.

Each command resolves a flat key=value config (file values overridden by
CLI flags), derives every random stream from one master seed, and writes
CSV atomically (temp file + rename).  The first line of every CSV is a
comment recording the SHA-256 hash of the canonical config string together
with the full configuration, so artifacts are self-describing and re-runs
are byte-identical.

Risk columns in figure-style CSVs are per-coordinate (total risk divided
by n); the sweep matrix keeps raw totals since only argmin locations
matter there.  Where a perturbation radius appears, both raw eps and
eps^2/sigma_c^2 are emitted.
"""

from __future__ import annotations

import hashlib
import os
import tempfile

import numpy as np

from .errors import ConfigError
from .estimators import (
    mmse_estimator,
    conjectured_robust_estimator,
    jitter_level_for_eps,
    optimal_jittering_estimator,
    optimal_robust_alpha,
)
from .model import (
    ForwardOperator,
    NoiseModel,
    SubspaceModel,
    make_diagonal_operator,
    make_subspace,
)
from .risk import (
    dual_values_batch,
    robust_risk_mode_form,
    standard_risk_closed_form,
    _mean_ci,
    residuals,
)
from .scalar import ScalarProblem, minimize_convex
from .training import TrainConfig, SweepResult, sweep_jitter_levels, train

COMMANDS = ("alpha-curve", "equivalence", "gap", "large-eps", "sweep")


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text


def _parse_float_list(text: str) -> tuple[float, ...]:
    if text.strip() == "":
        return ()
    return tuple(float(tok) for tok in text.split(","))


# key -> (parser, help)
KEY_SPECS: dict[str, tuple] = {
    "n": (_parse_int, "ambient signal dimension"),
    "d": (_parse_int, "subspace dimension"),
    "m": (_parse_int, "measurement dimension"),
    "sigma_c": (_parse_float, "signal scale, sqrt of expected signal energy"),
    "sigma_z": (_parse_float, "noise scale, sqrt of expected noise energy"),
    "operator": (_parse_str, "forward operator: identity | linear-decay | geometric"),
    "ratio": (_parse_float, "geometric spectrum ratio in (0, 1]"),
    "seed": (_parse_int, "master seed; every stream derives from it"),
    "eval_samples": (_parse_int, "Monte-Carlo sample count per risk estimate"),
    "eps_grid": (_parse_float_list, "comma-separated perturbation radii"),
    "eps_sq_rel_grid": (_parse_float_list, "comma-separated eps^2/sigma_c^2 values"),
    "sigma_w_grid": (_parse_float_list, "comma-separated jitter levels (empty = auto)"),
    "noise_levels": (_parse_float_list, "comma-separated noise levels (per-command units)"),
    "lr": (_parse_float, "training learning rate"),
    "batch_size": (_parse_int, "training minibatch size"),
    "n_iterations": (_parse_int, "training iteration count"),
    "optimizer": (_parse_str, "training optimizer: adaptive | sgd"),
    "attack_steps": (_parse_int, "PGD steps during adversarial training"),
    "out": (_parse_str, "output CSV path"),
}

_COMMON_DEFAULTS = {
    "n": 100,
    "d": 50,
    "m": 100,
    "sigma_c": 1.0,
    "operator": "identity",
    "ratio": 0.7,
    "seed": 0,
    "eval_samples": 10000,
    "lr": 1e-3,
    "batch_size": 50,
    "n_iterations": 20000,
    "optimizer": "adaptive",
    "attack_steps": 3,
    "out": "",
}

# sigma_z such that sigma_z * sqrt(d/n) = 0.4 at d=50, n=100.
_SIGMA_Z_EQUIV = 0.4 * np.sqrt(2.0)

COMMAND_DEFAULTS: dict[str, dict] = {
    "alpha-curve": {
        **_COMMON_DEFAULTS,
        "sigma_z": 0.0,
        "noise_levels": (0.0, 0.4, 1.2),
        "eps_grid": tuple(np.linspace(0.0, 1.2, 16)),
    },
    "equivalence": {
        **_COMMON_DEFAULTS,
        "sigma_z": float(_SIGMA_Z_EQUIV),
        "eps_grid": tuple(np.linspace(0.0, 0.7, 8)),
    },
    "gap": {
        **_COMMON_DEFAULTS,
        "operator": "linear-decay",
        "sigma_z": 0.2,
        "eps_grid": tuple(np.linspace(0.0, 0.5, 16)),
    },
    "large-eps": {
        **_COMMON_DEFAULTS,
        "sigma_c": float(np.sqrt(50.0)),
        "sigma_z": 0.0,  # superseded per noise level
        "noise_levels": (0.0, 0.5, 1.5),
        "eps_sq_rel_grid": (0.0, 0.25, 0.5, 0.75, 1.0, 1.2, 1.5),
    },
    "sweep": {
        **_COMMON_DEFAULTS,
        "sigma_z": float(_SIGMA_Z_EQUIV),
        "eps_grid": (0.2, 0.35, 0.5, 0.65),
        "sigma_w_grid": (),
    },
}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment, blank lines ignored."""
    raw: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
                key, _, value = stripped.partition("=")
                raw[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return raw


def resolve_config(command: str, raw_items: dict[str, str]) -> dict:
    """Defaults overlaid with raw string items, typed-parsed per key."""
    if command not in COMMAND_DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    cfg = dict(COMMAND_DEFAULTS[command])
    for key, text in raw_items.items():
        if key not in KEY_SPECS:
            raise ConfigError(f"unknown config key {key!r}")
        if key not in cfg and key != "out":
            raise ConfigError(f"key {key!r} is not used by command {command!r}")
        parser = KEY_SPECS[key][0]
        try:
            cfg[key] = parser(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from exc
    if "n" in raw_items and "m" not in raw_items:
        cfg["m"] = cfg["n"]  # measurement count tracks n unless set explicitly
    return cfg


def canonical_config(command: str, cfg: dict) -> str:
    parts = [f"command={command}"]
    for key in sorted(cfg):
        if key == "out":
            continue  # output location does not affect content
        value = cfg[key]
        if isinstance(value, tuple):
            text = ",".join(repr(float(x)) for x in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        parts.append(f"{key}={text}")
    return " ".join(parts)


def config_hash(canonical: str) -> str:
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def write_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _header(command: str, cfg: dict, columns: str) -> str:
    canonical = canonical_config(command, cfg)
    return f"# config sha256={config_hash(canonical)} {canonical}\n{columns}\n"


def _g(x: float) -> str:
    return f"{x:.12g}"


def _build_setup(cfg: dict) -> tuple[SubspaceModel, ForwardOperator, NoiseModel]:
    if cfg["operator"] not in ("identity", "linear-decay", "geometric"):
        raise ConfigError(f"unknown operator {cfg['operator']!r}")
    model = make_subspace(cfg["n"], cfg["d"], cfg["sigma_c"], cfg["seed"])
    op = make_diagonal_operator(cfg["n"], cfg["operator"], cfg.get("ratio"))
    noise = NoiseModel(m=cfg["m"], sigma_z=cfg["sigma_z"])
    return model, op, noise


def _sub_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=path).generate_state(1)[0])


def cmd_alpha_curve(cfg: dict) -> str:
    """Optimal-denoiser shrinkage alpha versus eps, per noise level.

    noise_levels are combined scales sigma_z*sqrt(d/n); only sigma_c and
    those levels enter the alpha formula.
    """
    sigma_c = cfg["sigma_c"]
    rows = []
    for level in cfg["noise_levels"]:
        for eps in cfg["eps_grid"]:
            alpha = optimal_robust_alpha(sigma_c, level, 1, 1, eps)
            rows.append(
                f"{_g(level)},{_g(eps)},{_g(eps**2 / sigma_c**2)},{_g(alpha)}\n"
            )
    text = _header("alpha-curve", cfg, "noise_level,eps,eps_sq_rel,alpha") + "".join(rows)
    if cfg["out"]:
        write_atomic(cfg["out"], text)
    return text


def _train_config(cfg: dict, objective: str, seed: int, **kwargs) -> TrainConfig:
    return TrainConfig(
        objective=objective,
        optimizer=cfg["optimizer"],
        lr=cfg["lr"],
        batch_size=cfg["batch_size"],
        n_iterations=cfg["n_iterations"],
        attack_steps=cfg["attack_steps"],
        seed=seed,
        **kwargs,
    )


def cmd_equivalence(cfg: dict) -> str:
    """Robust risks of standard / adversarial / jittering trained denoisers.

    One standard model serves every eps; adversarial and jittering models
    are trained per eps (the jitter level is the closed-form sigma_w(eps)).
    All evaluations share one sample draw, and the closed-form optimal risk
    is emitted as a fourth method.  Risk columns are per-coordinate.
    """
    if cfg["operator"] != "identity":
        raise ConfigError("equivalence runs the denoising setup: operator=identity")
    model, op, noise = _build_setup(cfg)
    n = model.n
    sigma_c, sigma_z, d = model.sigma_c, noise.sigma_z, model.d
    eval_seed = _sub_seed(cfg["seed"], 0)
    eval_n = cfg["eval_samples"]

    std_trace = train(model, op, noise, _train_config(cfg, "standard", _sub_seed(cfg["seed"], 1)))
    rows = []
    for j, eps in enumerate(cfg["eps_grid"]):
        eps = float(eps)
        adv_trace = train(
            model, op, noise,
            _train_config(cfg, "adversarial", _sub_seed(cfg["seed"], 2 + 2 * j), eps=eps),
        )
        sw = jitter_level_for_eps(sigma_c, sigma_z, d, model.n, eps)
        jit_trace = train(
            model, op, noise,
            _train_config(cfg, "jittering", _sub_seed(cfg["seed"], 3 + 2 * j), sigma_w=sw),
        )
        for method, est in (
            ("standard", std_trace.estimator),
            ("adversarial", adv_trace.estimator),
            ("jittering", jit_trace.estimator),
        ):
            v = residuals(est, model, op, noise, eval_n, eval_seed)
            mean, lo, hi = _mean_ci(dual_values_batch(est, v, eps))
            rows.append(
                f"{method},{_g(eps)},{_g(eps**2 / sigma_c**2)},"
                f"{_g(mean / n)},{_g(lo / n)},{_g(hi / n)}\n"
            )
        alpha_star = optimal_robust_alpha(sigma_c, sigma_z, d, model.n, eps)
        opt = (eps * alpha_star + np.sqrt(
            standard_risk_closed_form(alpha_star, sigma_c, sigma_z, d, model.n)
        )) ** 2
        rows.append(
            f"optimal,{_g(eps)},{_g(eps**2 / sigma_c**2)},"
            f"{_g(opt / n)},{_g(opt / n)},{_g(opt / n)}\n"
        )
    text = _header(
        "equivalence", cfg, "method,eps,eps_sq_rel,risk,ci_low,ci_high"
    ) + "".join(rows)
    if cfg["out"]:
        write_atomic(cfg["out"], text)
    return text


def best_jitter_level_analytic(
    model: SubspaceModel, op: ForwardOperator, noise: NoiseModel, eps: float
) -> tuple[float, float]:
    """Jitter level minimizing the analytic robust risk of H_J(sigma_w).

    Scans sigma_w >= 0 with the scalar minimizer; each evaluation solves
    the one-dimensional mode-form dual.  Returns (sigma_w_star, risk).
    """
    w_, lam, v_ = op.au_svd(model)
    sc2 = model.sigma_c**2

    def risk_of(sigma_w: float) -> float:
        denom = sc2 * lam**2 + noise.sigma_z**2 * model.d / noise.m + sigma_w**2 * model.d
        sigma = sc2 * lam / denom
        value, _ = robust_risk_mode_form(
            sigma, lam, model.sigma_c, noise.sigma_z, model.d, noise.m, eps
        )
        return value

    sw, value = minimize_convex(
        ScalarProblem(risk_of, lower=0.0, tolerance=1e-9, lower_inclusive=True)
    )
    return sw, value


def cmd_gap(cfg: dict) -> str:
    """Standard vs best-jittering vs conjectured estimators, general operator.

    The jitter level is optimized per eps by scalar minimization of the
    analytic mode-form risk; all three estimators are then Monte-Carlo
    evaluated on one shared draw.  Risk columns are per-coordinate.
    """
    if cfg["operator"] not in ("linear-decay", "geometric"):
        raise ConfigError("gap needs operator=linear-decay or geometric")
    model, op, noise = _build_setup(cfg)
    n = model.n
    eval_seed = _sub_seed(cfg["seed"], 0)
    eval_n = cfg["eval_samples"]
    standard = mmse_estimator(model, op, noise)
    rows = []
    for eps in cfg["eps_grid"]:
        eps = float(eps)
        if eps == 0.0:
            jit = standard
            conj = standard
        else:
            sw_star, _ = best_jitter_level_analytic(model, op, noise, eps)
            jit = optimal_jittering_estimator(model, op, noise, sw_star)
            conj, _ = conjectured_robust_estimator(model, op, noise, eps)
        for method, est in (
            ("standard", standard),
            ("jittering-best", jit),
            ("conjectured", conj),
        ):
            v = residuals(est, model, op, noise, eval_n, eval_seed)
            mean, lo, hi = _mean_ci(dual_values_batch(est, v, eps))
            rows.append(
                f"{method},{_g(eps)},{_g(eps**2 / model.sigma_c**2)},"
                f"{_g(mean / n)},{_g(lo / n)},{_g(hi / n)}\n"
            )
    text = _header("gap", cfg, "method,eps,eps_sq_rel,risk,ci_low,ci_high") + "".join(rows)
    if cfg["out"]:
        write_atomic(cfg["out"], text)
    return text


def cmd_large_eps(cfg: dict) -> str:
    """Adversarially trained denoisers across the eps^2 ~ sigma_c^2 transition.

    noise_levels are sigma_z/sqrt(n) values.  Emits per-coordinate risk and
    the trained Frobenius norm; past the transition the estimator collapses
    toward zero and the risk plateaus at sigma_c^2/n per coordinate.
    """
    if cfg["operator"] != "identity":
        raise ConfigError("large-eps runs the denoising setup: operator=identity")
    rows = []
    sigma_c = cfg["sigma_c"]
    for li, level in enumerate(cfg["noise_levels"]):
        level_cfg = dict(cfg)
        level_cfg["sigma_z"] = float(level * np.sqrt(cfg["n"]))
        model, op, noise = _build_setup(level_cfg)
        eval_seed = _sub_seed(cfg["seed"], 100 + li)
        for j, rel in enumerate(cfg["eps_sq_rel_grid"]):
            eps = float(np.sqrt(rel) * sigma_c)
            trace = train(
                model, op, noise,
                _train_config(cfg, "adversarial", _sub_seed(cfg["seed"], 200 + 10 * li + j), eps=eps),
            )
            est = trace.estimator
            v = residuals(est, model, op, noise, cfg["eval_samples"], eval_seed)
            mean, lo, hi = _mean_ci(dual_values_batch(est, v, eps))
            n = model.n
            rows.append(
                f"{_g(level)},{_g(eps)},{_g(rel)},{_g(mean / n)},{_g(lo / n)},"
                f"{_g(hi / n)},{_g(est.frobenius_norm())}\n"
            )
    text = _header(
        "large-eps", cfg, "noise_level,eps,eps_sq_rel,risk,ci_low,ci_high,h_frob"
    ) + "".join(rows)
    if cfg["out"]:
        write_atomic(cfg["out"], text)
    return text


def _auto_sigma_w_grid(cfg: dict) -> tuple[float, ...]:
    # Cover the closed-form levels for the requested eps grid with headroom.
    levels = [
        jitter_level_for_eps(cfg["sigma_c"], cfg["sigma_z"], cfg["d"], cfg["n"], float(e))
        for e in cfg["eps_grid"]
    ]
    top = 1.4 * max(levels) if max(levels) > 0 else 0.1
    return tuple(np.linspace(0.0, top, 8))


def cmd_sweep(cfg: dict) -> str:
    """Jitter-level sweep: risk matrix plus argmin-vs-theory companion CSV.

    Writes the (sigma_w, eps) matrix to `out` and the per-eps argmin
    together with the closed-form sigma_w(eps) to `<out stem>_argmin.csv`.
    """
    if cfg["operator"] != "identity":
        raise ConfigError("sweep runs the denoising setup: operator=identity")
    model, op, noise = _build_setup(cfg)
    sigma_w_grid = cfg["sigma_w_grid"] or _auto_sigma_w_grid(cfg)
    base = _train_config(cfg, "jittering", 0)
    result = sweep_jitter_levels(
        model, op, noise,
        np.asarray(cfg["eps_grid"]), np.asarray(sigma_w_grid),
        cfg["eval_samples"], cfg["seed"], base_config=base,
    )
    rows = []
    for i, sw in enumerate(result.sigma_w_grid):
        for j, eps in enumerate(result.eps_grid):
            rows.append(
                f"{_g(sw)},{_g(eps)},{_g(result.risks[i, j])},"
                f"{_g(result.ci_low[i, j])},{_g(result.ci_high[i, j])}\n"
            )
    text = _header("sweep", cfg, "sigma_w,eps,risk,ci_low,ci_high") + "".join(rows)

    argmin_rows = []
    for j, eps in enumerate(result.eps_grid):
        theory = jitter_level_for_eps(
            model.sigma_c, noise.sigma_z, model.d, model.n, float(eps)
        )
        argmin_rows.append(
            f"{_g(eps)},{_g(result.argmin_sigma_w[j])},{_g(theory)}\n"
        )
    argmin_text = _header(
        "sweep", cfg, "eps,sigma_w_star,sigma_w_theory"
    ) + "".join(argmin_rows)

    if cfg["out"]:
        write_atomic(cfg["out"], text)
        stem, ext = os.path.splitext(cfg["out"])
        write_atomic(f"{stem}_argmin{ext or '.csv'}", argmin_text)
    return text


COMMAND_FUNCS = {
    "alpha-curve": cmd_alpha_curve,
    "equivalence": cmd_equivalence,
    "gap": cmd_gap,
    "large-eps": cmd_large_eps,
    "sweep": cmd_sweep,
}
