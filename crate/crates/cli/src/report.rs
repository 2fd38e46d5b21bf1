//! JSON report structures.
//!
//! Reports are fully deterministic: no timestamps, scalar values
//! rendered through `Display` (exact fractions in rational mode,
//! shortest round-trip decimals in float mode), struct fields in fixed
//! order.

use serde::Serialize;

use papangelou::checks::{CheckReport, Witness};
use papangelou::extract::{Classification, Decomposition, Regime};
use papangelou::gnz::EstimateReport;
use papangelou::scalar::Scalar;
use papangelou::space::Space;

#[derive(Debug, Serialize)]
pub struct Report {
    pub space: Vec<String>,
    pub kernel: String,
    pub arithmetic: String,
    pub seed: u64,
    pub probe_mass: u32,
    pub replicas: usize,
    pub tasks: Vec<TaskReport>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskReport {
    Check(CheckJson),
    Sample(SampleJson),
    Gnz(GnzJson),
    Extract(ExtractJson),
    Transform(TransformJson),
    Error { message: String },
}

impl TaskReport {
    /// Whether this task counts as passed for the exit status.
    pub fn passed(&self) -> bool {
        match self {
            TaskReport::Check(c) => c.verdict == "pass",
            TaskReport::Sample(_) => true,
            TaskReport::Gnz(g) => g.all_pass,
            TaskReport::Extract(_) => true,
            TaskReport::Transform(t) => t.all_pass,
            TaskReport::Error { .. } => false,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub property: String,
    pub verdict: String,
    pub probe_mass: u32,
    pub tolerance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    /// Count vectors in site order.
    pub configs: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sites: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
    pub lhs: String,
    pub rhs: String,
}

pub fn witness_json<T: Scalar>(space: &Space, w: &Witness<T>) -> WitnessJson {
    let region_labels = w.region.as_ref().map(|region| {
        region
            .iter()
            .map(|&x| space.site_name(x).to_string())
            .collect::<Vec<_>>()
    });
    // Dynkin/merge witnesses index the target space; its site is the
    // joined fiber label. Everything else indexes the source space.
    let sites = if w.map.is_some() {
        region_labels
            .clone()
            .map(|labels| vec![labels.join("+")])
            .unwrap_or_default()
    } else {
        w.sites
            .iter()
            .map(|&x| space.site_name(x).to_string())
            .collect()
    };
    WitnessJson {
        configs: w.configs.iter().map(|c| c.counts().to_vec()).collect(),
        sites,
        region: region_labels,
        map: w.map.clone(),
        factor: w.factor.as_ref().map(|f| f.to_string()),
        lhs: w.lhs.to_string(),
        rhs: w.rhs.to_string(),
    }
}

pub fn check_json<T: Scalar>(space: &Space, report: &CheckReport<T>) -> CheckJson {
    CheckJson {
        property: report.property.to_string(),
        verdict: if report.passed() { "pass" } else { "fail" }.to_string(),
        probe_mass: report.probe_mass,
        tolerance: report.tolerance.to_string(),
        witness: report.witness.as_ref().map(|w| witness_json(space, w)),
        notes: report.notes.clone(),
    }
}

#[derive(Debug, Serialize)]
pub struct SampleJson {
    pub method: String,
    pub n: usize,
    pub mean_counts: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GnzJson {
    pub method: String,
    pub n: usize,
    pub all_pass: bool,
    pub reports: Vec<GnzRowJson>,
}

#[derive(Debug, Serialize)]
pub struct GnzRowJson {
    pub function: String,
    pub family: String,
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
    pub z_score: f64,
    pub pass: bool,
}

pub fn gnz_rows(reports: &[EstimateReport]) -> Vec<GnzRowJson> {
    reports
        .iter()
        .map(|r| GnzRowJson {
            function: r.function.clone(),
            family: r.family.as_str().to_string(),
            lhs: r.lhs,
            rhs: r.rhs,
            se_lhs: r.se_lhs,
            se_rhs: r.se_rhs,
            z_score: r.z_score,
            pass: r.pass,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ExtractJson {
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<String>>,
    /// Per-site reinforcement values for multiplicities 1, 2, …
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<String>>>,
}

fn regime_str(regime: Regime) -> &'static str {
    match regime {
        Regime::Local => "local",
        Regime::InteractionPositiveDiagonal => "interaction_positive_diagonal",
        Regime::InteractionVanishingDiagonal => "interaction_vanishing_diagonal",
    }
}

pub fn decomposition_json<T: Scalar>(d: &Decomposition<T>) -> ExtractJson {
    ExtractJson {
        regime: regime_str(d.regime).to_string(),
        class: None,
        z: None,
        rho0: None,
        rho: Some(d.rho.iter().map(|w| w.to_string()).collect()),
        c: Some(
            d.c.iter()
                .map(|row| row.iter().map(|v| v.to_string()).collect())
                .collect(),
        ),
        f: d.f.as_ref().map(|f| {
            f.entries()
                .iter()
                .map(|row| row.iter().map(|v| v.to_string()).collect())
                .collect()
        }),
    }
}

pub fn classification_json<T: Scalar>(c: &Classification<T>) -> ExtractJson {
    let mut json = match &c.decomposition {
        Some(d) => decomposition_json(d),
        None => ExtractJson {
            regime: "classify".to_string(),
            class: None,
            z: None,
            rho0: None,
            rho: None,
            c: None,
            f: None,
        },
    };
    json.regime = "classify".to_string();
    json.class = Some(c.class.as_str().to_string());
    json.z = c.z.as_ref().map(|z| z.to_string());
    json.rho0 = c
        .rho0
        .as_ref()
        .map(|m| m.iter().map(|w| w.to_string()).collect());
    json
}

#[derive(Debug, Serialize)]
pub struct TransformJson {
    pub map: String,
    pub target_sites: Vec<String>,
    pub kernel: String,
    pub method: String,
    pub n: usize,
    pub all_pass: bool,
    pub mean_counts: Vec<f64>,
    pub reports: Vec<GnzRowJson>,
}
