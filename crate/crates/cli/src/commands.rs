use std::fs::File;

use ftnm_core::bath::{
    depolarizing_fidelity, min_norm_representative, random_model, spectral_width, verify_fidelity_decay, zz_model,
    RandomModelSpec, SystemBathModel,
};
use ftnm_core::concat::{
    build_concatenation, is_sparse, lemma8_property_check, propagate_errors, CircuitLayout, CodeModel, FaultSet,
    Phase, Schedule,
};
use ftnm_core::fault::{decompose_gate, verify_spread_identity, CircuitInterval, TimeResolvedFaultPath};
use ftnm_core::random::{random_hermitian, substream};
use ftnm_core::spectral::{
    cooling_bound, energy_bound, hyperfine_bound_with_kappa, reorg_integral, sigma_dot_spin_norm, CoolingMethod,
    HyperfineModel, SpectralDensity,
};
use ftnm_core::threshold::{
    base_bound, empirical_threshold, fixed_point, iterate_recursion, required_level, threshold_value, BaseRule,
    ThresholdParams,
};
use ftnm_core::op_norm;
use rand::seq::index::sample;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::config::{CliError, Params, RunConfig};
use crate::report::{Record, Report};

type Out = Result<(), CliError>;

/// Named enum value from a string parameter.
fn parse_enum<T: DeserializeOwned>(field: &str, v: &str, expected: &str) -> Result<T, CliError> {
    serde_json::from_value(Value::from(v)).map_err(|_| CliError::field(field, format!("`{v}` is not one of {expected}")))
}

fn base_rule(p: &Params) -> Result<BaseRule, CliError> {
    match p.string_opt("base_rule")? {
        None => Ok(BaseRule::default()),
        Some(s) => parse_enum("base_rule", s, "lemma2_product, cluster_lemma"),
    }
}

fn rule_name(rule: BaseRule) -> &'static str {
    match rule {
        BaseRule::Lemma2Product => "lemma2_product",
        BaseRule::ClusterLemma => "cluster_lemma",
    }
}

/// Seed for the `index`-th sub-run of a sweep.
fn child_seed(seed: u64, index: u64) -> u64 {
    substream(seed, index).random()
}

pub fn spectral_width_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let h = p.matrix("operator")?;
    let (rep_op, s) = min_norm_representative(&h)?;
    let points = p.usize_or("scan_points", 201)?;
    let span = p.f64_or("scan_span", 1.0)?;
    if !(span >= 0.0 && span.is_finite()) {
        return Err(CliError::field("scan_span", "must be a finite nonnegative number"));
    }
    rep.summary.push("dim", h.dim());
    rep.summary.push("mu_min", s.mu_min);
    rep.summary.push("mu_max", s.mu_max);
    rep.summary.push("delta", s.delta);
    rep.summary.push("alpha_opt", s.alpha_opt);
    rep.summary.push("norm_at_alpha_opt", op_norm(&rep_op));

    let width = s.delta.max(1e-12);
    let mut min_scanned = f64::INFINITY;
    for i in 0..points {
        let u = if points == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (points - 1) as f64 };
        let alpha = s.alpha_opt + span * width * u;
        let norm = op_norm(&h.shifted(alpha));
        min_scanned = min_scanned.min(norm);
        rep.rows.push(Record::new().with("alpha", alpha).with("norm", norm));
    }
    let tol = 1e-10 * (1.0 + s.delta);
    rep.verdict(
        "no_shift_beats_delta",
        points == 0 || min_scanned >= s.delta - tol,
        format!("min scanned norm {min_scanned:e} vs delta {:e}", s.delta),
    );
    Ok(())
}

pub fn fidelity_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let include_zz = p.bool_or("include_zz", true)?;
    let n_random = p.usize_or("random_models", 5)?;
    let bath_max = p.usize_or("bath_dim", 4)?;
    let samples = p.usize_or("samples", 1000)?;
    let products = p.f64_list_or("delta_t", &[0.2, 0.5, 1.0, std::f64::consts::FRAC_PI_2])?;
    let tol = p.f64_or("tolerance", 1e-9)?;
    if n_random > 0 && bath_max < 2 {
        return Err(CliError::field("bath_dim", "random models need bath_dim >= 2"));
    }

    let mut models: Vec<(String, SystemBathModel)> = Vec::new();
    if include_zz {
        models.push(("zz".into(), zz_model(1.0)));
    }
    for i in 0..n_random {
        let mut rng = substream(cfg.seed, i as u64);
        let bath_dim = rng.random_range(2..=bath_max);
        let spec = RandomModelSpec {
            n_system_qubits: 1,
            bath_dim,
            t0: 1.0,
            free_hamiltonians: false,
        };
        models.push((format!("random-{i}"), random_model(&mut rng, spec)?));
    }

    let mut failures = 0;
    let mut points = 0;
    for (mi, (name, model)) in models.iter().enumerate() {
        let delta = spectral_width(&model.coupling_hamiltonian()?)?.delta;
        if delta <= 0.0 {
            return Err(CliError::field("model", format!("{name} has zero spectral width")));
        }
        for (j, &dt) in products.iter().enumerate() {
            let seed = child_seed(cfg.seed, 1_000_000 + (mi * products.len() + j) as u64);
            let f = verify_fidelity_decay(model, dt / delta, samples, seed)?;
            let ok = f.holds(tol);
            points += 1;
            failures += usize::from(!ok);
            rep.rows.push(
                Record::new()
                    .with("model", name.as_str())
                    .with("bath_dim", model.bath_dim())
                    .with("delta", f.delta)
                    .with("delta_t", dt)
                    .with("t", f.t)
                    .with("min_sampled", f.min_sampled_fidelity)
                    .with("analytic_floor", f.analytic_floor)
                    .with("worst_state", f.worst_state_fidelity)
                    .with("ok", ok),
            );
        }
    }
    if let Some(prob) = p.f64_opt("depolarizing_p")? {
        rep.summary.push("depolarizing_p", prob);
        rep.summary
            .push("depolarizing_fidelity", depolarizing_fidelity(prob).map_err(|e| CliError::field("depolarizing_p", e.to_string()))?);
    }
    rep.verdict(
        "fidelity_floor",
        failures == 0,
        format!("{failures} of {points} points violate the floor"),
    );
    Ok(())
}

pub fn verify_bounds_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let trials = p.usize_or("trials", 100)?;
    let qubits = p.usize_list_or("qubits", &[1, 2])?;
    let bath_max = p.usize_or("bath_dim", 8)?;
    let t0_min = p.f64_or("t0_min", 0.01)?;
    let t0_max = p.f64_or("t0_max", 0.2)?;
    let free = p.bool_or("free_hamiltonians", true)?;
    let slack = p.f64_or("slack", 1e-9)?;
    let inflation = p.f64_or("t0_inflation", 1.0)?;
    if let Some(q) = qubits.iter().find(|&&q| !(1..=2).contains(&q)) {
        return Err(CliError::field("qubits", format!("{q} is not 1 or 2")));
    }
    if bath_max < 2 {
        return Err(CliError::field("bath_dim", "must be at least 2"));
    }
    if !(0.0 < t0_min && t0_min <= t0_max && t0_max.is_finite()) {
        return Err(CliError::field("t0_min", "need 0 < t0_min <= t0_max"));
    }
    if !(inflation > 0.0 && inflation.is_finite()) {
        return Err(CliError::field("t0_inflation", "must be positive"));
    }

    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut index = 0u64;
    for &q in &qubits {
        for trial in 0..trials {
            let mut rng = substream(cfg.seed, index);
            index += 1;
            let bath_dim = rng.random_range(2..=bath_max);
            let t0 = rng.random_range(t0_min..=t0_max);
            let spec = RandomModelSpec {
                n_system_qubits: q,
                bath_dim,
                t0: t0 * inflation,
                free_hamiltonians: free,
            };
            let d = decompose_gate(&random_model(&mut rng, spec)?)?;
            let bound = d.bound / inflation;
            let norm = d.fault_norm();
            let ok = norm <= bound + slack;
            violations += usize::from(!ok);
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(norm / bound);
            }
            rep.rows.push(
                Record::new()
                    .with("qubits", q)
                    .with("trial", trial)
                    .with("bath_dim", bath_dim)
                    .with("t0", t0)
                    .with("fault_norm", norm)
                    .with("bound", bound)
                    .with("ok", ok),
            );
        }
    }
    rep.summary.push("checks", rep.rows.len());
    rep.summary.push("max_norm_over_bound", worst_ratio);
    rep.verdict(
        "gate_fault_bound",
        violations == 0,
        format!("{violations} violations in {} checks", rep.rows.len()),
    );
    Ok(())
}

pub fn spread_identity_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let trials = p.usize_or("trials", 100)?;
    let intervals = p.usize_or("intervals", 3)?;
    let sys_qubits = p.usize_or("system_qubits", 2)?;
    let bath_dim = p.usize_or("bath_dim", 2)?;
    let counts = p.usize_list_or("fault_counts", &[0, 1, 2])?;
    let scale = p.f64_or("coupling_scale", 0.3)?;
    let tol = p.f64_or("tolerance", 1e-10)?;
    if intervals == 0 {
        return Err(CliError::field("intervals", "must be at least 1"));
    }
    if bath_dim == 0 {
        return Err(CliError::field("bath_dim", "must be at least 1"));
    }
    if sys_qubits > 4 {
        return Err(CliError::field("system_qubits", "at most 4"));
    }
    if let Some(k) = counts.iter().find(|&&k| k > intervals) {
        return Err(CliError::field("fault_counts", format!("{k} faults exceed {intervals} intervals")));
    }
    let dim = (1usize << sys_qubits) * bath_dim;

    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = substream(cfg.seed, trial as u64);
        let circuit: Vec<CircuitInterval> = (0..intervals)
            .map(|_| CircuitInterval {
                duration: rng.random_range(0.05..0.5),
                free: random_hermitian(&mut rng, dim),
                coupling: random_hermitian(&mut rng, dim).scale_real(scale),
            })
            .collect();
        let ends: Vec<f64> = circuit
            .iter()
            .scan(0.0, |t, c| {
                *t += c.duration;
                Some(*t)
            })
            .collect();
        for &k in &counts {
            let mut locs = sample(&mut rng, intervals, k).into_vec();
            locs.sort_unstable();
            let path = TimeResolvedFaultPath::new(locs.iter().map(|&l| (l, ends[l])).collect())?;
            let r = verify_spread_identity(&circuit, &path)?;
            worst = worst.max(r.lhs_rhs_distance);
            let names: Vec<String> = locs.iter().map(usize::to_string).collect();
            rep.rows.push(
                Record::new()
                    .with("trial", trial)
                    .with("faults", k)
                    .with("locations", names.join(";"))
                    .with("distance", r.lhs_rhs_distance)
                    .with("lhs_norm", r.lhs_norm),
            );
        }
    }
    rep.summary.push("dim", dim);
    rep.summary.push("max_distance", worst);
    rep.verdict(
        "spread_identity",
        worst <= tol,
        format!("max distance {worst:e} (tolerance {tol:e})"),
    );
    Ok(())
}

fn prefixed(prefix: &str, e: CliError) -> CliError {
    match e {
        CliError::Config { field, reason } => CliError::field(format!("{prefix}.{field}"), reason),
        other => other,
    }
}

fn layout(p: &Params) -> Result<CircuitLayout, CliError> {
    let lp = p.object("layout")?;
    let wrap = |e| prefixed("layout", e);
    if lp.has("roots") {
        let l: CircuitLayout = serde_json::from_value(p.raw("layout")?.clone())
            .map_err(|e| CliError::field("layout", format!("malformed layout tree: {e}")))?;
        l.validate().map_err(|e| CliError::field("layout", e.to_string()))?;
        return Ok(l);
    }
    let n = lp.usize("N").map_err(wrap)?;
    let r = lp.usize("r").map_err(wrap)?;
    let a_c = lp.usize("A_C").map_err(wrap)?;
    let m = lp.usize_or("m", 5).map_err(wrap)?;
    let blocks = lp.usize_or("register_blocks", 1).map_err(wrap)?;
    let code = CodeModel::new(m, a_c).map_err(|e| CliError::field("layout", e.to_string()))?;
    build_concatenation(n, r, code)
        .and_then(|l| l.with_register_blocks(blocks))
        .map_err(|e| CliError::field("layout", e.to_string()))
}

fn faults(p: &Params, layout: &CircuitLayout) -> Result<FaultSet, CliError> {
    let leaves = p.usize_list_or("faults", &[])?;
    FaultSet::new(leaves, layout).map_err(|e| CliError::field("faults", e.to_string()))
}

pub fn sparse_check_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let layout = layout(&p)?;
    let faults = faults(&p, &layout)?;
    let levels: Vec<usize> = match p.usize_opt("level")? {
        Some(l) if l > layout.levels() => {
            return Err(CliError::field("level", format!("layout has {} levels", layout.levels())))
        }
        Some(l) => vec![l],
        None => (0..=layout.levels()).collect(),
    };
    rep.summary.push("leaves", layout.leaf_count());
    rep.summary.push("fault_count", faults.len());
    for level in levels {
        let sparse = is_sparse(&faults, &layout, level)?;
        rep.rows.push(Record::new().with("level", level).with("sparse", sparse));
    }
    if p.bool_or("include_layout", false)? {
        rep.documents
            .insert("layout".into(), serde_json::to_value(&layout).expect("layout is JSON"));
    }
    Ok(())
}

fn phase_list(field: &str, v: &Value) -> Result<Vec<Option<Phase>>, CliError> {
    serde_json::from_value(v.clone()).map_err(|_| CliError::field(field, "expected a list of \"pre-ec\", \"during-ec\" or null"))
}

fn schedule(p: &Params, layout: &CircuitLayout) -> Result<Schedule, CliError> {
    if p.has("phases") && p.has("phases_by_level") {
        return Err(CliError::field("phases", "give either phases or phases_by_level"));
    }
    if p.has("phases_by_level") {
        let rows = p
            .raw("phases_by_level")?
            .as_array()
            .ok_or_else(|| CliError::field("phases_by_level", "expected a list of lists"))?;
        let by_level = rows
            .iter()
            .enumerate()
            .map(|(i, r)| phase_list(&format!("phases_by_level[{i}]"), r))
            .collect::<Result<_, _>>()?;
        return Ok(Schedule::per_level(by_level));
    }
    if p.has("phases") {
        let row = phase_list("phases", p.raw("phases")?)?;
        return Ok(Schedule::per_level(vec![row; layout.levels()]));
    }
    let phase = match p.string_opt("phase")? {
        None => Phase::PreEc,
        Some(s) => parse_enum("phase", s, "pre-ec, during-ec")?,
    };
    Ok(Schedule::all(phase, layout))
}

pub fn propagate_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let layout = layout(&p)?;
    let faults = faults(&p, &layout)?;
    let schedule = schedule(&p, &layout)?;
    let state = propagate_errors(&layout, &faults, &schedule)?;
    let sparse_in = is_sparse(&faults, &layout, layout.levels())?;

    rep.summary.push("fault_count", faults.len());
    rep.summary.push("faults_sparse", sparse_in);
    rep.summary.push("all_periods_sparse", state.all_periods_sparse());
    for (i, b) in state.blocks.iter().enumerate() {
        rep.rows.push(
            Record::new()
                .with("kind", "block")
                .with("index", i)
                .with("failed", b.is_failed())
                .with("errors", b.error_count())
                .with("qubits", b.qubit_count())
                .with("sparse", b.is_sparse()),
        );
    }
    for (k, &s) in state.period_sparse.iter().enumerate() {
        rep.rows.push(Record::new().with("kind", "period").with("index", k).with("sparse", s));
    }
    if sparse_in {
        rep.verdict(
            "sparse_in_sparse_out",
            state.all_periods_sparse(),
            format!(
                "{} of {} working periods end sparse",
                state.period_sparse.iter().filter(|&&s| s).count(),
                state.period_sparse.len()
            ),
        );
    }
    let trials = p.usize_or("property_trials", 0)?;
    if trials > 0 {
        let r = lemma8_property_check(&layout, trials, cfg.seed)
            .map_err(|e| CliError::field("property_trials", e.to_string()))?;
        rep.summary.push("sampled_trials", r.trials);
        rep.summary.push("sampled_rejected", r.rejected);
        rep.summary.push("sampled_nonempty", r.nonempty);
        rep.summary.push("sampled_violations", r.violations);
        rep.verdict(
            "sampled_sparse_in_sparse_out",
            r.violations == 0,
            format!("{} violations in {} trials", r.violations, r.trials),
        );
    }
    Ok(())
}

fn binomial2(a: u64) -> f64 {
    (a * a.saturating_sub(1)) as f64 / 2.0
}

pub fn threshold_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let rule = base_rule(&p)?;
    let tol = p.f64_or("tol", 1e-9)?;
    let mut failures = Vec::new();
    for a in p.u64_one_or_many("A_C")? {
        let a_c = a as usize;
        let t = threshold_value(a_c).map_err(|e| CliError::field("A_C", e.to_string()))?;
        let emp = empirical_threshold(a_c, rule, tol)?;
        if emp < t {
            failures.push(a);
        }
        rep.rows.push(
            Record::new()
                .with("A_C", a)
                .with("threshold", t)
                .with("fixed_point", fixed_point(a_c)?)
                .with("empirical_threshold", emp)
                .with("base_rule", rule_name(rule))
                .with("probabilistic_threshold", 1.0 / binomial2(a)),
        );
    }
    rep.verdict(
        "empirical_at_least_formula",
        failures.is_empty(),
        if failures.is_empty() {
            "bisected threshold dominates the formula for every A_C".to_string()
        } else {
            format!("formula exceeds the bisected threshold at A_C = {failures:?}")
        },
    );
    Ok(())
}

fn eta(p: &Params, a_c: usize) -> Result<f64, CliError> {
    match (p.f64_opt("eta")?, p.f64_opt("eta_fraction")?) {
        (Some(_), Some(_)) => Err(CliError::field("eta", "give either eta or eta_fraction")),
        (Some(e), None) => Ok(e),
        (None, Some(f)) => Ok(f * threshold_value(a_c).map_err(|e| CliError::field("A_C", e.to_string()))?),
        (None, None) => Err(CliError::field("eta", "required parameter missing (or give eta_fraction)")),
    }
}

pub fn recursion_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let a_c = p.usize("A_C")?;
    let eta = eta(&p, a_c)?;
    let r_max = p.usize_or("r_max", 10)?;
    let eps = p.f64_or("epsilon_target", 1e-6)?;
    let rule = base_rule(&p)?;
    let params = ThresholdParams::new(a_c, eta, 1, eps)?;
    let trace = iterate_recursion(&params, r_max, rule)?;

    let l2 = base_bound(BaseRule::Lemma2Product, a_c, eta)?;
    let cl = base_bound(BaseRule::ClusterLemma, a_c, eta)?;
    rep.summary.push("eta", eta);
    rep.summary.push("threshold", threshold_value(a_c)?);
    rep.summary.push("fixed_point", fixed_point(a_c)?);
    rep.summary.push("base_rule", rule_name(rule));
    rep.summary.push("base_lemma2_product", l2);
    rep.summary.push("base_cluster_lemma", cl);
    let ordering = if cl < l2 {
        "cluster_lemma < lemma2_product"
    } else if cl > l2 {
        "cluster_lemma > lemma2_product"
    } else {
        "cluster_lemma = lemma2_product"
    };
    rep.summary.push("base_ordering", ordering);
    rep.summary.push("converged", trace.converged);
    rep.summary.push("diverged", trace.diverged);
    for l in &trace.levels {
        rep.rows.push(Record::new().with("r", l.r).with("x", l.x).with("ln_x", l.ln_x));
    }
    Ok(())
}

pub fn level_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let a_c = p.usize("A_C")?;
    let eta = eta(&p, a_c)?;
    let eps = p.f64("epsilon_target")?;
    let rule = base_rule(&p)?;
    rep.summary.push("eta", eta);
    rep.summary.push("threshold", threshold_value(a_c)?);
    rep.summary.push("base_rule", rule_name(rule));
    for n in p.u64_one_or_many("N")? {
        let params = ThresholdParams::new(a_c, eta, n, eps)?;
        let l = required_level(&params, rule)?;
        rep.rows.push(
            Record::new()
                .with("N", n)
                .with("r", l.r)
                .with("total_locations", l.total_locations)
                .with("eps_prime", l.eps_prime)
                .with("global_bad", l.global_bad),
        );
    }
    Ok(())
}

pub fn spinboson_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let tabulated = p.has("table");
    let mut density = match p.string_opt("table")? {
        Some(path) => {
            if p.has("alpha") || p.has("omega_c") {
                return Err(CliError::field("table", "give either a table or alpha/omega_c"));
            }
            let full = cfg.base_dir.join(path);
            let file = File::open(&full).map_err(|e| CliError::Io {
                path: full.display().to_string(),
                reason: e.to_string(),
            })?;
            SpectralDensity::from_csv(file).map_err(|e| CliError::field("table", e.to_string()))?
        }
        None => SpectralDensity::ohmic(p.f64("alpha")?, p.f64("omega_c")?)?,
    };
    if let Some(beta) = p.f64_opt("beta_eff")? {
        density = density.with_beta_eff(beta)?;
    }
    rep.rows.push(
        Record::new()
            .with("quantity", "reorg_integral")
            .with("method", "quadrature")
            .with("value", reorg_integral(&density)?),
    );
    if let Some(e) = p.f64_opt("bath_energy")? {
        rep.rows.push(
            Record::new()
                .with("quantity", "energy_bound")
                .with("method", "quadrature")
                .with("value", energy_bound(&density, e)?),
        );
    }
    if p.has("beta_eff") {
        let defaults: &[&str] = if tabulated {
            &["quadrature"]
        } else {
            &["quadrature", "closed", "series"]
        };
        for (i, name) in p.string_list_or("methods", defaults)?.iter().enumerate() {
            let method: CoolingMethod =
                parse_enum(&format!("methods[{i}]"), name, "quadrature, closed, series")?;
            let b = cooling_bound(&density, method)?;
            rep.rows.push(
                Record::new()
                    .with("quantity", "cooling_bound")
                    .with("method", name.as_str())
                    .with("value", b.value)
                    .with("heuristic", b.heuristic)
                    .with("regime_warning", b.regime_warning),
            );
        }
    } else if p.has("methods") {
        return Err(CliError::field("beta_eff", "cooling-bound methods need beta_eff"));
    }
    Ok(())
}

pub fn hyperfine_cmd(cfg: &RunConfig, rep: &mut Report) -> Out {
    let p = cfg.params();
    let a_hf = p.f64("A_hf")?;
    let v0 = p.f64("v0")?;
    let weights = p.f64_list_or("weights", &[])?;
    let kappa = p.f64_or("kappa", 1.5)?;
    let sites = weights.len();
    let total: f64 = weights.iter().sum();
    let model = HyperfineModel::new(a_hf, v0, weights)?;
    let bound = hyperfine_bound_with_kappa(&model, kappa)?;
    let cap = kappa * a_hf.abs() * v0;
    rep.summary.push("site_norm", sigma_dot_spin_norm());
    rep.rows.push(
        Record::new()
            .with("A_hf", a_hf)
            .with("v0", v0)
            .with("sites", sites)
            .with("weight_sum", total)
            .with("kappa", kappa)
            .with("bound", bound)
            .with("cap", cap),
    );
    rep.verdict(
        "bound_within_cap",
        bound <= cap * (1.0 + 1e-12),
        format!("{bound:e} vs kappa*|A_hf|*v0 = {cap:e}"),
    );
    Ok(())
}
