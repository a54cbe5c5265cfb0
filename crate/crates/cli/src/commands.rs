use mttdl_core::allocation::{system_mttdl, AllocationScenario};
use mttdl_core::growth::{repair_vector, GrowthSpec, RepairSpec};
use mttdl_core::hard_error::apply_hard_error;
use mttdl_core::markov::{mttdl_closed_form, mttdl_linear_solve, mttdl_recursion, mttdl_transform, default_xi, mttdl_upper_bound};
use mttdl_core::montecarlo::simulate_mttdl;
use mttdl_core::numeric::relative_difference;
use mttdl_core::overhead::{
    apply_recoverability, asymptotic_overhead, avg_read_overhead, builtin_profile, builtin_profiles,
    load_code_profile, AccessPattern, CodeProfile, MDS_18_12,
};
use mttdl_core::{FailureModel, Method, MttdlEstimate, SimResult};
use serde::Serialize;

use crate::config::{Overrides, ProfileRef, ScenarioConfig, SweepVariable};
use crate::error::CliError;

fn invalid(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Fixed-width scientific notation, 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn finish(self) -> Result<Vec<u8>, CliError> {
        self.writer
            .into_inner()
            .map_err(|e| CliError::Write(e.into_error()))
    }
}

#[derive(Debug, Serialize)]
pub struct ModelRecord {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl From<&FailureModel> for ModelRecord {
    fn from(model: &FailureModel) -> Self {
        ModelRecord {
            n: model.n(),
            m: model.m(),
            p: model.p(),
            lambda: model.lambda().to_vec(),
            mu: model.mu().to_vec(),
            gamma: model.gamma().to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Skipped {
    pub method: Method,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct Deviation {
    pub a: Method,
    pub b: Method,
    pub relative: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub model: ModelRecord,
    pub estimates: Vec<MttdlEstimate>,
    pub skipped: Vec<Skipped>,
    pub deviations: Vec<Deviation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<SimResult>,
}

pub fn analyze(config: &ScenarioConfig, seed: Option<u64>) -> Result<AnalyzeReport, CliError> {
    let model = config.epg()?.model(Overrides::default())?;
    let mut estimates = Vec::new();
    let mut skipped = Vec::new();

    let exact = mttdl_linear_solve(&model).map_err(CliError::model("linear solve"))?;
    if model.has_gamma() {
        // The transform is exact only while every needed ξ_t is known;
        // otherwise it degrades to the bound, reported separately below.
        match mttdl_transform(&model, &default_xi(&model)) {
            Ok(e) if e.method == Method::ClosedForm => estimates.push(e),
            Ok(_) => skipped.push(Skipped {
                method: Method::ClosedForm,
                reason: format!("correction constants unknown beyond p = 3 (p = {})", model.p()),
            }),
            Err(e) => skipped.push(Skipped {
                method: Method::ClosedForm,
                reason: e.to_string(),
            }),
        }
    } else {
        estimates.push(mttdl_closed_form(&model).map_err(CliError::model("closed form"))?);
    }
    estimates.push(exact);
    match mttdl_recursion(&model) {
        Ok(e) => estimates.push(e),
        Err(e) => skipped.push(Skipped {
            method: Method::Recursion,
            reason: e.to_string(),
        }),
    }
    estimates.push(mttdl_upper_bound(&model).map_err(CliError::model("upper bound"))?);

    let monte_carlo = match config.sim_config(seed)? {
        Some(cfg) => {
            let r = simulate_mttdl(&model, &cfg).map_err(CliError::model("monte carlo"))?;
            if r.trials_completed > 0 {
                estimates.push(r.estimate());
            } else {
                skipped.push(Skipped {
                    method: Method::MonteCarlo,
                    reason: "every trial hit the event cap".into(),
                });
            }
            Some(r)
        }
        None => None,
    };

    let mut deviations = Vec::new();
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            deviations.push(Deviation {
                a: a.method,
                b: b.method,
                relative: relative_difference(a.hours, b.hours),
            });
        }
    }
    Ok(AnalyzeReport {
        model: ModelRecord::from(&model),
        estimates,
        skipped,
        deviations,
        monte_carlo,
    })
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub model: ModelRecord,
    pub linear_solve_hours: f64,
    pub result: SimResult,
    pub estimate: MttdlEstimate,
    /// `(mean - exact) / stderr`.
    pub z_score: f64,
}

pub fn simulate(config: &ScenarioConfig, seed: Option<u64>) -> Result<SimulateReport, CliError> {
    let model = config.epg()?.model(Overrides::default())?;
    let cfg = config
        .sim_config(seed)?
        .ok_or_else(|| invalid("monte_carlo", "section is required"))?;
    let exact = mttdl_linear_solve(&model).map_err(CliError::model("linear solve"))?.hours;
    let result = simulate_mttdl(&model, &cfg).map_err(CliError::model("monte carlo"))?;
    Ok(SimulateReport {
        model: ModelRecord::from(&model),
        linear_solve_hours: exact,
        estimate: result.estimate(),
        z_score: (result.mean_hours - exact) / result.stderr_hours,
        result,
    })
}

fn whole(path: String, x: f64) -> Result<usize, CliError> {
    if x.fract() != 0.0 || !(1.0..=1e9).contains(&x) {
        return Err(invalid(path, format!("{x} is not a positive integer")));
    }
    Ok(x as usize)
}

pub fn sweep(config: &ScenarioConfig) -> Result<Vec<u8>, CliError> {
    let epg = config.epg()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| invalid("sweep", "section is required"))?;
    if sweep.values.is_empty() {
        return Err(invalid("sweep.values", "must not be empty"));
    }
    let parities: Vec<usize> = match &sweep.parities {
        Some(list) if list.is_empty() => return Err(invalid("sweep.parities", "must not be empty")),
        Some(list) => list.clone(),
        None => (1..=epg.p).collect(),
    };
    let var = sweep.variable;
    let mut table = Table::new(&[var.name(), "p", "mttdl_hours", "ratio_to_previous"])?;

    let mttdl = |o: Overrides| -> Result<f64, CliError> {
        let model = epg.model(o)?;
        Ok(mttdl_linear_solve(&model).map_err(CliError::model("linear solve"))?.hours)
    };

    if var == SweepVariable::P {
        let mut prev: Option<f64> = None;
        for (i, &v) in sweep.values.iter().enumerate() {
            let p = whole(format!("sweep.values[{i}]"), v)?;
            let h = mttdl(Overrides {
                p: Some(p),
                ..Overrides::default()
            })?;
            table.row(&[p.to_string(), p.to_string(), fmt_float(h), prev.map_or(String::new(), |x| fmt_float(h / x))])?;
            prev = Some(h);
        }
        return table.finish();
    }

    for (i, &v) in sweep.values.iter().enumerate() {
        let path = format!("sweep.values[{i}]");
        let mut base = Overrides::default();
        let label = match var {
            SweepVariable::R => {
                base.r = Some(v);
                fmt_float(v)
            }
            SweepVariable::Eta => {
                base.eta = Some(v);
                fmt_float(v)
            }
            SweepVariable::M => {
                let m = whole(path, v)?;
                base.m = Some(m);
                m.to_string()
            }
            SweepVariable::P => unreachable!(),
        };
        let mut prev: Option<f64> = None;
        for (k, &p) in parities.iter().enumerate() {
            if p < 1 {
                return Err(invalid(format!("sweep.parities[{k}]"), "must be at least 1"));
            }
            let h = mttdl(Overrides { p: Some(p), ..base })?;
            table.row(&[label.clone(), p.to_string(), fmt_float(h), prev.map_or(String::new(), |x| fmt_float(h / x))])?;
            prev = Some(h);
        }
    }
    table.finish()
}

fn resolve_profile(path: &str, r: &ProfileRef) -> Result<CodeProfile, CliError> {
    match r {
        ProfileRef::Builtin(name) => {
            builtin_profile(name).ok_or_else(|| invalid(path, format!("unknown profile `{name}`")))
        }
        ProfileRef::Inline(record) => {
            load_code_profile(record.clone()).map_err(|e| invalid(path, e.to_string()))
        }
    }
}

pub fn overhead(config: &ScenarioConfig) -> Result<Vec<u8>, CliError> {
    let cfg = config
        .overhead
        .as_ref()
        .ok_or_else(|| invalid("overhead", "section is required"))?;
    if let Some(r) = &cfg.profile {
        let profile = resolve_profile("overhead.profile", r)?;
        let mds = AccessPattern::mds(profile.n(), profile.m()).map_err(|e| invalid("overhead.profile", e.to_string()))?;
        let mut table = Table::new(&["j", "recoverability", "read_overhead", "mds_exact", "mds_asymptotic"])?;
        for (j, (rec, phi)) in profile.recoverability().iter().zip(profile.read_overhead()).enumerate() {
            let exact = avg_read_overhead(&mds, j).map_err(CliError::model("read overhead"))?;
            table.row(&[
                j.to_string(),
                fmt_float(*rec),
                fmt_float(*phi),
                fmt_float(exact),
                fmt_float(asymptotic_overhead(&mds, j)),
            ])?;
        }
        return table.finish();
    }
    let n = cfg.n.ok_or_else(|| invalid("overhead.n", "required without a profile"))?;
    let m = cfg.m.ok_or_else(|| invalid("overhead.m", "required without a profile"))?;
    let pattern = match &cfg.set_sizes {
        Some(s) => AccessPattern::new(n, m, s.clone()).map_err(|e| invalid("overhead.set_sizes", e.to_string()))?,
        None => AccessPattern::mds(n, m).map_err(|e| invalid("overhead", e.to_string()))?,
    };
    let mut table = Table::new(&["j", "exact", "asymptotic"])?;
    for j in 0..=n - m {
        let exact = avg_read_overhead(&pattern, j).map_err(CliError::model("read overhead"))?;
        table.row(&[j.to_string(), fmt_float(exact), fmt_float(asymptotic_overhead(&pattern, j))])?;
    }
    table.finish()
}

/// One cell of the code comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidCell {
    pub code: String,
    pub lambda: f64,
    pub mttdl_hours: f64,
}

/// Constant per-disk failure rate, overhead-scaled repair, hard errors on
/// the critical state, then the code's recoverability.
pub fn pyramid_cells(config: &ScenarioConfig) -> Result<Vec<PyramidCell>, CliError> {
    let cfg = config
        .pyramid
        .as_ref()
        .ok_or_else(|| invalid("pyramid", "section is required"))?;
    let profiles = match &cfg.profiles {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, r)| resolve_profile(&format!("pyramid.profiles[{i}]"), r))
            .collect::<Result<Vec<_>, _>>()?,
        None => builtin_profiles(),
    };
    let baseline_name = cfg.baseline.as_deref().unwrap_or(MDS_18_12);
    let baseline = profiles
        .iter()
        .find(|p| p.name() == baseline_name)
        .cloned()
        .or_else(|| builtin_profile(baseline_name))
        .ok_or_else(|| invalid("pyramid.baseline", format!("unknown profile `{baseline_name}`")))?;
    if cfg.lambdas.is_empty() {
        return Err(invalid("pyramid.lambdas", "must not be empty"));
    }

    let mut cells = Vec::new();
    for (pi, profile) in profiles.iter().enumerate() {
        let path = format!("pyramid.profiles[{pi}]");
        if (profile.n(), profile.m()) != (baseline.n(), baseline.m()) {
            return Err(invalid(path, "shape differs from the baseline"));
        }
        let p = profile.n() - profile.m();
        let delta = if profile.name() == baseline.name() {
            cfg.baseline_delta
        } else {
            cfg.delta
        };
        let spec = RepairSpec::new(cfg.mu, delta, baseline.read_overhead().to_vec(), profile.read_overhead().to_vec())
            .map_err(|e| invalid("pyramid", e.to_string()))?;
        let nominal = repair_vector(&spec, p).map_err(|e| invalid(path.clone(), e.to_string()))?;
        let mu = cfg.repair_mode.chain_rates(&nominal);
        for (li, &lambda) in cfg.lambdas.iter().enumerate() {
            let model = FailureModel::new(profile.n(), profile.m(), vec![lambda; p + 1], mu.clone(), vec![0.0; p])
                .map_err(|e| invalid(format!("pyramid.lambdas[{li}]"), e.to_string()))?;
            let model = apply_hard_error(&model, cfg.eta).map_err(|e| invalid("pyramid.eta", e.to_string()))?;
            let model = apply_recoverability(&model, profile).map_err(|e| invalid(path.clone(), e.to_string()))?;
            let hours = mttdl_linear_solve(&model).map_err(CliError::model("linear solve"))?.hours;
            cells.push(PyramidCell {
                code: profile.name().to_string(),
                lambda,
                mttdl_hours: hours,
            });
        }
    }
    Ok(cells)
}

pub fn pyramid(config: &ScenarioConfig) -> Result<Vec<u8>, CliError> {
    let mut table = Table::new(&["code", "lambda", "mttdl_hours"])?;
    for c in pyramid_cells(config)? {
        table.row(&[c.code, fmt_float(c.lambda), fmt_float(c.mttdl_hours)])?;
    }
    table.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRow {
    pub r: f64,
    pub policy: mttdl_core::allocation::Policy,
    pub p: usize,
    pub system_mttdl_hours: f64,
}

pub fn allocation_rows(config: &ScenarioConfig) -> Result<Vec<AllocationRow>, CliError> {
    let cfg = config
        .allocation
        .as_ref()
        .ok_or_else(|| invalid("allocation", "section is required"))?;
    let mut rows = Vec::new();
    for (ri, &r) in cfg.r_values.iter().enumerate() {
        let growth = GrowthSpec::new(cfg.lambda0, r, cfg.lambda_max)
            .map_err(|e| invalid(format!("allocation.r_values[{ri}]"), e.to_string()))?;
        for (pi, &p) in cfg.parities.iter().enumerate() {
            let path = format!("allocation.parities[{pi}]");
            if p < 1 || p >= cfg.z {
                return Err(invalid(path, format!("p = {p} must lie in 1..z")));
            }
            let lambda = mttdl_core::growth::build_lambda_vector(&growth, p).map_err(|e| invalid(path.clone(), e.to_string()))?;
            let mu = cfg.repair_mode.chain_rates(&vec![cfg.mu; p]);
            let model = FailureModel::new(cfg.z, cfg.z - p, lambda, mu, vec![0.0; p])
                .map_err(|e| invalid("allocation", e.to_string()))?;
            for &policy in &cfg.policies {
                let scenario = AllocationScenario::new(cfg.z, policy, cfg.weibull_k, model.clone(), growth)
                    .map_err(|e| invalid("allocation", e.to_string()))?;
                let hours = system_mttdl(&scenario).map_err(CliError::model("allocation"))?;
                rows.push(AllocationRow {
                    r,
                    policy,
                    p,
                    system_mttdl_hours: hours,
                });
            }
        }
    }
    Ok(rows)
}

pub fn allocate(config: &ScenarioConfig) -> Result<Vec<u8>, CliError> {
    let mut table = Table::new(&["r", "policy", "p", "system_mttdl_hours"])?;
    for row in allocation_rows(config)? {
        let policy = serde_json::to_value(row.policy).expect("policy serializes");
        table.row(&[
            fmt_float(row.r),
            policy.as_str().unwrap_or_default().to_string(),
            row.p.to_string(),
            fmt_float(row.system_mttdl_hours),
        ])?;
    }
    table.finish()
}
