"""End-to-end experiment pipelines.

Every ``run_*`` function takes a resolved config (see ``config.resolve``)
and returns ``(report, tables)``: a JSON-ready report with per-run records,
aggregates and named boolean checks, plus CSV-ready tables keyed by file stem.
Reports carry no timestamps, so identical config and seed give identical bytes.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import __version__, minima, model, optimize, probes, spectral, splitting
from ..errors import ConfigError
from .config import config_hash
from .export import histogram, load_params

LOWER_BOUND_N_EQ_K = 0.25 - 1.0 / (2.0 * np.pi)
GLOBAL_F_TOL = 1e-10


def derive_seed(master: int, *keys: int) -> int:
    """Independent 63-bit seed for a (master, keys...) tuple."""
    state = np.random.SeedSequence([int(master), *map(int, keys)]).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def _report(name: str, cfg: dict, records, aggregates: dict, checks: dict) -> dict:
    return {
        "experiment": name,
        "config": cfg,
        "records": records,
        "aggregates": aggregates,
        "checks": {k: bool(v) for k, v in checks.items()},
        "passed": bool(all(checks.values())),
        "provenance": {"config_hash": config_hash(cfg), "seed": cfg["seed"],
                       "tool_version": __version__},
    }


# ---------------------------------------------------------------- minima hunt

def _hunt_run(args: tuple) -> dict:
    k, seed, large, step, stop, max_iters = args
    V = model.standard_teacher(k)
    W0 = (optimize.large_norm_init if large else optimize.xavier_init)(k, k, k, seed)
    rec = optimize.gradient_descent(W0, V, optimize.GDConfig(step, max_iters, stop, seed,
                                                             log_stride=max_iters + 1))
    return {"seed": seed, "large_norm_init": large, "termination": rec.termination,
            "iterations": rec.iterations, "F": rec.final_F, "grad_norm": rec.final_grad_norm,
            "norm_sum": minima.norm_sum(rec.params), "params": rec.params}


def _map(fn, jobs: list, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def hunt_minima(k: int, runs: int, seed: int, large_norm_runs: int = 0, step_scale: float = 5.0,
                grad_norm_stop: float = 1e-12, max_iters: int = 200_000,
                dedup_tol: float = 5e-9, workers: int = 1):
    """GD fleet for n = k; returns (per-run dicts, catalog). Each dict has its class index."""
    jobs = [(k, derive_seed(seed, k, r), False, step_scale / k, grad_norm_stop, max_iters)
            for r in range(runs)]
    jobs += [(k, derive_seed(seed, k, runs + r, 1), True, step_scale / k, grad_norm_stop,
              max_iters) for r in range(large_norm_runs)]
    results = _map(_hunt_run, jobs, workers)
    catalog = minima.MinimaCatalog(dedup_tol, n_coords=k)
    for res in results:
        res["class"] = catalog.insert(res["params"]) if res["termination"] == "converged" else -1
    return results, catalog


def describe_minimum(W: np.ndarray, V: np.ndarray) -> dict:
    F = model.objective(W, V)
    rep = spectral.eig_symmetric(model.hessian(W, V))
    hp = [spectral.min_eigenvalue(model.h_prime_block(W, V, i)) for i in range(W.shape[0])]
    return {"F": F, "is_global": F <= GLOBAL_F_TOL, "min_hessian_eig": rep.min_eigenvalue,
            "hessian_psd": rep.psd, "norm_sum": minima.norm_sum(W), "h_prime_min_eigs": hp,
            "all_h_prime_nonpsd": bool(np.all(np.asarray(hp) < -splitting.NEGATIVE_TOL)),
            "mean_curvatures": model.mean_curvatures(W, V)}


def run_minima_hunt(cfg: dict):
    records, aggregates, tables = [], {}, {}
    checks = {"all_converged": True, "hessian_psd": True, "norm_sum_bound": True,
              "h_prime_nonpsd_for_nonglobal": True, "norm_sum_mass_near_k": True}
    for k in cfg["k_values"]:
        V = model.standard_teacher(k)
        runs, catalog = hunt_minima(k, cfg["runs"], cfg["seed"], cfg["large_norm_runs"],
                                    cfg["step_scale"], cfg["grad_norm_stop"], cfg["max_iters"],
                                    cfg["dedup_tol"], cfg["workers"])
        reps = []
        for idx, (W, mult) in enumerate(zip(catalog.representatives, catalog.multiplicities)):
            info = describe_minimum(W, V)
            info.update({"class": idx, "multiplicity": mult, "n": k, "k": k, "d": k,
                         "params": W})
            reps.append(info)
        conv = [r for r in runs if r["termination"] == "converged"]
        ns = np.array([r["norm_sum"] for r in conv])
        in_band = float(np.mean((ns >= k - 1) & (ns <= k + 1e-6))) if ns.size else 0.0
        nonglobal = [r for r in reps if not r["is_global"]]
        frac = (float(np.mean([r["all_h_prime_nonpsd"] for r in nonglobal]))
                if nonglobal else float("nan"))
        aggregates[f"k{k}"] = {
            "runs": len(runs), "converged": len(conv), "classes": len(reps),
            "global_classes": len(reps) - len(nonglobal), "nonglobal_classes": len(nonglobal),
            "max_norm_sum": float(ns.max()) if ns.size else float("nan"),
            "norm_sum_mass_in_[k-1,k]": in_band,
            "fraction_nonglobal_all_h_prime_nonpsd": frac,
            "hist_norm_sum": histogram(np.clip(ns, 0, k), 0.0, k, cfg["bins"]),
        }
        checks["all_converged"] &= len(conv) == len(runs)
        checks["hessian_psd"] &= all(r["hessian_psd"] for r in reps)
        checks["norm_sum_bound"] &= bool(np.all(ns <= k + 1e-6))
        checks["h_prime_nonpsd_for_nonglobal"] &= all(r["all_h_prime_nonpsd"] for r in nonglobal)
        checks["norm_sum_mass_near_k"] &= in_band >= 0.9
        records.append({"k": k, "runs": [{key: v for key, v in r.items() if key != "params"}
                                         for r in runs], "minima": reps})
        tables[f"runs_k{k}"] = [{key: r[key] for key in ("seed", "large_norm_init", "termination",
                                                         "iterations", "F", "grad_norm",
                                                         "norm_sum", "class")} for r in runs]
        tables[f"minima_k{k}"] = [{"n": r["n"], "k": k, "d": r["d"], "F": r["F"],
                                   "norm_sum": r["norm_sum"],
                                   "min_hessian_eig": r["min_hessian_eig"],
                                   "multiplicity": r["multiplicity"]} for r in reps]
        tables[f"hist_norm_sum_k{k}"] = aggregates[f"k{k}"]["hist_norm_sum"]
    return _report("minima_hunt", cfg, records, aggregates, checks), tables


# ---------------------------------------------------------------- split certify

def certify_minimum(W: np.ndarray, V: np.ndarray, alphas) -> list[dict]:
    """Split every neuron at every alpha; certificates for non-global W."""
    out = []
    is_global = model.objective(W, V) <= GLOBAL_F_TOL
    for i in range(W.shape[0]):
        for a in alphas:
            spec = splitting.SplitSpec(i, a)
            Ws = splitting.split(W, spec)
            formula = splitting.split_hessian_formula(W, V, spec).matrix
            block_err = float(np.linalg.norm(formula - model.hessian(Ws, V)))
            row = {"neuron": i, "alpha": a, "global": is_global,
                   "F_split": model.objective(Ws, V),
                   "grad_norm_at_split": float(np.linalg.norm(model.gradient(Ws, V))),
                   "block_identity_error": block_err}
            cert = splitting.certify_saddle(W, V, i, a)
            if isinstance(cert, splitting.SaddleCertificate):
                row.update({"certified": True, "lambda": cert.lam,
                            "quadratic_value": cert.quadratic_value,
                            "predicted_value": cert.predicted_value,
                            "relative_error": cert.relative_error,
                            "direction_u": cert.direction_u})
            else:
                row.update({"certified": False, "lambda": cert.min_eigenvalue,
                            "quadratic_value": float("nan"), "predicted_value": float("nan"),
                            "relative_error": float("nan"), "direction_u": []})
            out.append(row)
    return out


def run_split_certify(cfg: dict):
    sources = []
    if cfg["params_file"]:
        W = load_params(cfg["params_file"])
        k = cfg["teacher_k"] or W.shape[0]
        sources.append((k, "file", model.standard_teacher(k, W.shape[1]), W))
    else:
        for k in cfg["k_values"]:
            _, catalog = hunt_minima(k, cfg["runs"], cfg["seed"], 0, cfg["step_scale"],
                                     cfg["grad_norm_stop"], cfg["max_iters"], cfg["dedup_tol"])
            V = model.standard_teacher(k)
            sources += [(k, f"class{c}", V, W) for c, W in enumerate(catalog.representatives)]
    records = []
    for k, label, V, W in sources:
        for row in certify_minimum(W, V, cfg["alphas"]):
            row.update({"k": k, "minimum": label})
            records.append(row)
    nong = [r for r in records if not r["global"]]
    glob = [r for r in records if r["global"]]
    checks = {
        "nonglobal_split_critical": all(r["grad_norm_at_split"] <= 1e-8 for r in nong),
        "nonglobal_certified": all(r["certified"] and r["quadratic_value"] < 0 for r in nong),
        "certificate_identity": all(r["certified"] and r["relative_error"] <= 1e-8 for r in nong),
        "global_split_zero_loss": all(r["F_split"] <= 1e-12 for r in glob),
        "block_identity": all(r["block_identity_error"] <= 1e-9 for r in records),
    }
    aggregates = {"minima": len(sources), "splits": len(records), "nonglobal_splits": len(nong),
                  "max_relative_error": max((r["relative_error"] for r in nong), default=0.0),
                  "max_block_identity_error": max((r["block_identity_error"] for r in records),
                                                  default=0.0)}
    tables = {"certificates": [{k: v for k, v in r.items() if k != "direction_u"}
                               for r in records]}
    return _report("split_certify", cfg, records, aggregates, checks), tables


# ---------------------------------------------------------------- conjecture

def run_conjecture(cfg: dict):
    records, aggregates, tables = [], {}, {}
    checks = {"margins_positive": True, "gaussian_adversarial_gap": True,
              "min_lhs_grows_with_m": True}
    sample_rows = []
    for k in cfg["k_values"]:
        d = cfg["d"] or k
        V = model.standard_teacher(k, d)
        prev = -np.inf
        for m in cfg["m_values"]:
            base = probes.balanced_base(V, m)
            stats = {}
            for mode_id, (mode, count) in enumerate((("gaussian", cfg["samples"]),
                                                     ("adversarial", cfg["adversarial_samples"]))):
                start = derive_seed(cfg["seed"], k, m, mode_id)
                rows = []
                for s in range(count):
                    p = probes.sample_orthogonal_neighborhood(
                        base, cfg["eps"], mode, seed=start + s, variance=cfg["variance"],
                        orthogonal=cfg["orthogonal"], m=m)
                    cb = probes.curvature_breakdown(V, m, p)
                    rows.append({"k": k, "m": m, "d": d, "mode": mode, "seed": start + s,
                                 "lhs": cb.lhs, "normalized_lhs": cb.normalized_lhs,
                                 "rhs": cb.rhs, "margin": cb.margin,
                                 "g_norm_sq": cb.g_norm_sq,
                                 "group_norm_sum": float(cb.group_norms.sum())})
                sample_rows += rows
                lhs = np.array([r["lhs"] for r in rows])
                nl = np.array([r["normalized_lhs"] for r in rows])
                mg = np.array([r["margin"] for r in rows])
                stats[mode] = {"samples": count, "min_lhs": float(lhs.min()),
                               "min_normalized_lhs": float(nl.min()),
                               "min_margin": float(mg.min()),
                               "positive_margins": int(np.sum(mg > 0)),
                               "negative_margins": int(np.sum(mg <= 0))}
                tables[f"hist_normalized_lhs_k{k}_m{m}_{mode}"] = histogram(
                    nl, float(nl.min()), float(nl.max()) + 1e-300, cfg["bins"])
            gap = stats["gaussian"]["min_lhs"] / stats["adversarial"]["min_lhs"]
            stats["gap_decades"] = float(np.log10(gap)) if gap > 0 else float("nan")
            aggregates[f"k{k}_m{m}"] = stats
            checks["margins_positive"] &= all(stats[md]["negative_margins"] == 0
                                              for md in ("gaussian", "adversarial"))
            checks["gaussian_adversarial_gap"] &= stats["gap_decades"] >= cfg["min_gap_decades"]
            checks["min_lhs_grows_with_m"] &= stats["gaussian"]["min_lhs"] > prev
            prev = stats["gaussian"]["min_lhs"]
    records = sample_rows
    tables["samples"] = sample_rows
    return _report("conjecture", cfg, records, aggregates, checks), tables


# ---------------------------------------------------------------- PGD

def estimate_constants(V: np.ndarray, base: np.ndarray, m: int, eps: float, samples: int,
                       seed: int) -> tuple[float, float]:
    """(lambda, L): min lhs/|g|^2 and max |H|_2 over Gaussian neighborhood samples."""
    d = V.shape[1]
    lams, Ls = [], []
    for s in range(samples):
        p = probes.sample_orthogonal_neighborhood(base, eps, "gaussian", seed=seed + s,
                                                  variance=eps * eps / d)
        cb = probes.curvature_breakdown(V, m, p)
        lams.append(cb.lhs / cb.g_norm_sq)
        Ls.append(np.linalg.norm(model.hessian(p.point, V), 2))
    return float(min(lams)), float(max(Ls))


def ball_init(base: np.ndarray, eps: float, seed: int) -> np.ndarray:
    """Each neuron displaced uniformly inside its own eps-ball."""
    rng = np.random.default_rng(seed)
    n, d = base.shape
    D = rng.normal(size=base.shape)
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return base + D * eps * rng.uniform(size=(n, 1)) ** (1.0 / d)


def run_pgd(cfg: dict):
    k, m, d = cfg["k"], cfg["m"], cfg["d"]
    V = model.standard_teacher(k, d)
    base = probes.balanced_base(V, m)
    n = k * m
    lam, L = estimate_constants(V, base, m, cfg["eps"], cfg["estimate_samples"],
                                derive_seed(cfg["seed"], 0))
    aggregates = {"lambda_hat": lam, "L_hat": L}
    if lam <= 0:
        aggregates["recipe_infeasible"] = True
        checks = {"recipe_feasible": False, "recipe_success_rate": False}
        return _report("pgd_convergence", cfg, [], aggregates, checks), {}
    rec = optimize.pgd_recipe(lam, L, cfg["delta"], n, cfg["safety"])
    half = optimize.pgd_recipe(lam, L, cfg["delta"] / 2, n, cfg["safety"])
    T = min(rec.iters, cfg["max_iters"])
    practical = cfg["practical_step"] or 1.0 / L
    arms = {"recipe": (rec.step_size, rec.noise_level),
            "recipe_no_noise": (rec.step_size, 0.0),
            "practical": (practical, rec.noise_level)}
    aggregates.update({"recipe_step": rec.step_size, "recipe_noise": rec.noise_level,
                       "recipe_T": rec.iters, "recipe_T_half_delta": half.iters,
                       "T_used": T, "truncated": T < rec.iters, "practical_step": practical})
    records, trajectories = [], []
    for arm, (eta, alpha) in arms.items():
        rows = []
        for r in range(cfg["runs"]):
            s = derive_seed(cfg["seed"], 1, r)
            W0 = ball_init(base, cfg["eps"], s)
            out = optimize.perturbed_gradient_descent(
                W0, V, optimize.PGDConfig(eta, alpha, T, s, cfg["log_stride"]), target=base)
            dist = float(np.sum((out.params - base) ** 2))
            rows.append({"arm": arm, "run": r, "seed": s, "init_dist_sq": float(np.sum((W0 - base) ** 2)),
                         "final_dist_sq": dist, "success": dist <= cfg["delta"],
                         "final_F": out.final_F, "iterations": out.iterations,
                         "termination": out.termination})
            trajectories += [{"arm": arm, "run": r, "iter": t, "F": F, "grad_norm": g,
                              "dist_to_target": dd} for t, F, g, dd in out.trajectory]
        aggregates[f"success_rate_{arm}"] = float(np.mean([x["success"] for x in rows]))
        records += rows
    tables = {"runs": records, "trajectories": trajectories}
    checks = {"recipe_feasible": True,
              "recipe_success_rate": aggregates["success_rate_recipe"] >= cfg["success_rate"]}
    return _report("pgd_convergence", cfg, records, aggregates, checks), tables


# ---------------------------------------------------------------- witnesses

def run_witness(cfg: dict):
    V = model.standard_teacher(cfg["k"], cfg["d"])
    non = []
    for a1 in cfg["alphas"]:
        for a2 in cfg["alphas"]:
            for eps in cfg["nonconvex_eps"]:
                w = probes.nonconvexity_witness(V, a1, a2, eps)
                non.append({"alpha1": a1, "alpha2": a2, "eps": eps, "value": w.value,
                            "formula_value": w.formula_value, "exact_value": w.exact_value,
                            "formula_rel_err": abs(w.value / w.formula_value - 1),
                            "exact_rel_err": abs(w.value / w.exact_value - 1)})
    a1, a2 = cfg["sweep_alpha1"], cfg["sweep_alpha2"]
    opsc, pl = [], []
    for eps in cfg["sweep_eps"]:
        o = probes.opsc_witness(V, a1, a2, eps)
        p = probes.pl_witness(V, a1, a2, eps)
        opsc.append({"eps": eps, "normalized_form": o.normalized_form,
                     "in_neighborhood": o.in_neighborhood})
        pl.append({"eps": eps, "F": p.F, "grad_norm_sq": p.grad_norm_sq, "pl_ratio": p.pl_ratio})
    eps = np.array(cfg["sweep_eps"])
    slopes = {"opsc": probes.loglog_slope(eps, [r["normalized_form"] for r in opsc]),
              "pl_F": probes.loglog_slope(eps, [r["F"] for r in pl]),
              "pl_grad_sq": probes.loglog_slope(eps, [r["grad_norm_sq"] for r in pl])}
    band = cfg["slope_band"]
    checks = {
        "nonconvex_negative": all(r["value"] < 0 for r in non),
        "nonconvex_formula_match": all(r["formula_rel_err"] <= cfg["formula_rtol"] for r in non),
        "nonconvex_exact_match": all(r["exact_rel_err"] <= cfg["formula_rtol"] for r in non),
        "opsc_in_neighborhood": all(r["in_neighborhood"] for r in opsc),
        "opsc_slope": abs(slopes["opsc"] - 1) <= band,
        "pl_F_slope": abs(slopes["pl_F"] - 1) <= band,
        "pl_grad_sq_slope": abs(slopes["pl_grad_sq"] - 2) <= band,
        "pl_ratio_vanishes": pl[-1]["pl_ratio"] < pl[0]["pl_ratio"],
    }
    aggregates = {"slopes": slopes,
                  "max_formula_rel_err": max(r["formula_rel_err"] for r in non),
                  "max_exact_rel_err": max(r["exact_rel_err"] for r in non)}
    records = {"nonconvexity": non, "opsc": opsc, "pl": pl}
    tables = {"nonconvexity": non, "opsc": opsc, "pl": pl}
    return _report("witness_sweep", cfg, records, aggregates, checks), tables


# ---------------------------------------------------------------- probe / spectrum

def run_probe(cfg: dict):
    kind = cfg["kind"]
    V = model.standard_teacher(cfg["k"], cfg["d"])
    a1, a2, eps = cfg["alpha1"], cfg["alpha2"], cfg["eps"]
    params = {key: cfg[key] for key in ("k", "d", "alpha1", "alpha2", "eps")}
    margin = float("nan")
    if kind == "nonconvexity":
        w = probes.nonconvexity_witness(V, a1, a2, eps)
        value, formula = w.value, w.formula_value
        extra = {"exact_value": w.exact_value, "direction": w.direction}
        ok = value < 0
    elif kind == "opsc":
        w = probes.opsc_witness(V, a1, a2, eps)
        value, formula = w.normalized_form, float("nan")
        extra = {"in_neighborhood": w.in_neighborhood}
        ok = w.in_neighborhood
    elif kind == "pl":
        w = probes.pl_witness(V, a1, a2, eps)
        value, formula = w.F, float("nan")
        extra = {"grad_norm_sq": w.grad_norm_sq, "pl_ratio": w.pl_ratio}
        ok = True
    elif kind == "curvature":
        m = cfg["m"]
        params.update({"m": m, "mode": cfg["mode"], "variance": cfg["variance"],
                       "orthogonal": cfg["orthogonal"]})
        p = probes.sample_orthogonal_neighborhood(probes.balanced_base(V, m), eps, cfg["mode"],
                                                  cfg["seed"], cfg["variance"],
                                                  cfg["orthogonal"], m)
        cb = probes.curvature_breakdown(V, m, p)
        value, formula, margin = cb.lhs, cb.rhs, cb.margin
        extra = {"normalized_lhs": cb.normalized_lhs, "g_norm_sq": cb.g_norm_sq,
                 "group_norms": cb.group_norms}
        ok = margin > 0
    else:
        raise ConfigError(f"unknown probe kind {kind!r}")
    record = {"probe": kind, "params": params, "value": value, "formula_value": formula,
              "margin": margin, "seed": cfg["seed"], **extra}
    return _report("probe", cfg, [record], {}, {"probe_ok": ok}), {}


def run_spectrum(cfg: dict):
    if cfg["point"] == "teacher":
        k = cfg["k"]
        V = model.standard_teacher(k, cfg["d"] or k)
        W = V.copy()
    elif cfg["point"] == "file":
        if not cfg["params_file"]:
            raise ConfigError("spectrum.point = 'file' needs spectrum.params_file")
        W = load_params(cfg["params_file"])
        k = cfg["teacher_k"] or W.shape[0]
        V = model.standard_teacher(k, W.shape[1])
    else:
        raise ConfigError(f"unknown spectrum point {cfg['point']!r}")
    H = model.hessian(W, V)
    rep = spectral.eig_symmetric(H)
    hp = [spectral.min_eigenvalue(model.h_prime_block(W, V, i)) for i in range(W.shape[0])]
    aggregates = {"F": model.objective(W, V), "grad_norm": float(np.linalg.norm(model.gradient(W, V))),
                  "min_eigenvalue": rep.min_eigenvalue, "max_eigenvalue": rep.max_eigenvalue,
                  "psd": rep.psd, "h_prime_min_eigs": hp,
                  "mean_curvatures": model.mean_curvatures(W, V),
                  "norm_sum": minima.norm_sum(W)}
    checks = {"symmetric": np.linalg.norm(H - H.T) <= 1e-10 * max(np.linalg.norm(H), 1.0)}
    if cfg["point"] == "teacher":
        checks["min_eig_lower_bound"] = rep.min_eigenvalue >= LOWER_BOUND_N_EQ_K - 1e-9
    ev = rep.eigenvalues
    tables = {"eigenvalues": [{"index": i, "eigenvalue": float(v)} for i, v in enumerate(ev)],
              "hist_eigenvalues": histogram(ev, float(ev.min()), float(ev.max()) + 1e-12,
                                            cfg["bins"])}
    return _report("spectrum", cfg, {"params": W, "eigenvalues": ev}, aggregates, checks), tables


RUNNERS = {
    "minima_hunt": run_minima_hunt,
    "conjecture": run_conjecture,
    "pgd": run_pgd,
    "witness": run_witness,
    "probe": run_probe,
    "split_certify": run_split_certify,
    "spectrum": run_spectrum,
}


def run(experiment: str, cfg: dict):
    try:
        runner = RUNNERS[experiment]
    except KeyError:
        raise ConfigError(f"unknown experiment {experiment!r}") from None
    return runner(cfg)
