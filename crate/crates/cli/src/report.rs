//! The `check` suite and its report.

use std::collections::BTreeMap;

use acmetric::classify::{
    check_aqs_phi_derivative, check_canonical_phi_parallel, check_nijenhuis_difference,
    check_projected_nijenhuis, check_qs_phi_derivative, classify, ClassificationReport, Residual,
    Verdict,
};
use acmetric::connection::{
    lc_adapted, lc_from_coordinates, metricity_defect, n_connection, n_connection_from_levi_civita,
    torsion, Endomorphism,
};
use acmetric::curvature::{einstein_check, EinsteinReport, OmegaSource};
use acmetric::{AdaptedStructure, GeometryError, Point};
use rayon::prelude::*;
use serde::Serialize;

pub const TOOL_NAME: &str = "acmetric";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hard identities and their tolerances. A failure makes `check` exit 1.
pub const LEVI_CIVITA_ORACLE_TOL: f64 = 1e-8;
pub const NIJENHUIS_TOL: f64 = 1e-9;
pub const TORSION_CROSS_CHECK_TOL: f64 = 1e-9;
pub const TORSION_SKEW_TOL: f64 = 1e-9;

/// Names of the hard identities in [`RunReport::identities`].
pub const HARD_IDENTITIES: [&str; 4] = [
    "levi_civita_oracle",
    "nijenhuis_difference",
    "nijenhuis_projection",
    "torsion_cross_check",
];

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub omega_source: OmegaSource,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSummary {
    pub holds: bool,
    pub max_residual: f64,
    pub samples: usize,
}

impl From<&Verdict> for VerdictSummary {
    fn from(v: &Verdict) -> Self {
        VerdictSummary {
            holds: v.holds,
            max_residual: v.max_residual,
            samples: v.samples,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSummary {
    pub verdicts: BTreeMap<String, VerdictSummary>,
    pub quasi_sasakian_conditions: BTreeMap<String, VerdictSummary>,
    pub axiom_residual: f64,
}

impl From<&ClassificationReport> for ClassificationSummary {
    fn from(r: &ClassificationReport) -> Self {
        let conv =
            |m: &BTreeMap<String, Verdict>| m.iter().map(|(k, v)| (k.clone(), v.into())).collect();
        ClassificationSummary {
            verdicts: conv(&r.verdicts),
            quasi_sasakian_conditions: conv(&r.quasi_sasakian_conditions),
            axiom_residual: r.axiom_residual,
        }
    }
}

/// Max residual of one identity over all samples.
#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub max_residual: f64,
    pub scale: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub holds: bool,
    pub hard: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<Vec<f64>>,
}

impl IdentitySummary {
    fn from_residuals(rs: &[Residual], tolerance: f64, hard: bool, per_sample: bool) -> Self {
        let total = rs.iter().fold(Residual::default(), |a, r| a.merge(*r));
        IdentitySummary {
            max_residual: total.max,
            scale: total.scale,
            samples: rs.len(),
            tolerance,
            holds: total.holds(tolerance),
            hard,
            per_sample: per_sample.then(|| rs.iter().map(|r| r.max).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EinsteinSummary {
    pub holds: bool,
    pub max_residual: f64,
    pub samples: usize,
    pub per_sample: Vec<f64>,
    pub parallel_torsion_residual: f64,
}

impl From<&EinsteinReport> for EinsteinSummary {
    fn from(r: &EinsteinReport) -> Self {
        EinsteinSummary {
            holds: r.holds,
            max_residual: r.max_residual,
            samples: r.samples,
            per_sample: r.per_sample.clone(),
            parallel_torsion_residual: r.parallel_torsion_residual,
        }
    }
}

/// The Einstein check under every `ω` source; `selected` names the one
/// chosen by the manifest or flags.
#[derive(Debug, Clone, Serialize)]
pub struct EinsteinSection {
    pub selected: &'static str,
    pub sources: BTreeMap<&'static str, EinsteinOutcome>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum EinsteinOutcome {
    Report(EinsteinSummary),
    Error { error: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub min: usize,
    pub max: usize,
    pub per_sample: Vec<usize>,
    /// `true` when every sample has even rank, `false` when every sample
    /// has odd rank, absent when they differ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub even: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricitySummary {
    /// `max |∇^N g|` for the canonical connection.
    pub canonical_max: f64,
    /// `max |(∇^N_ξ g)(ξ, e_a) - ∂_n Γ_a|`.
    pub xi_xi_vs_d_eta_xi: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub classification: ClassificationSummary,
    pub identities: BTreeMap<&'static str, IdentitySummary>,
    pub einstein: EinsteinSection,
    pub rank: RankSummary,
    pub metricity: MetricitySummary,
    pub hard_identities_pass: bool,
}

impl RunReport {
    pub fn failed_hard_identities(&self) -> Vec<&'static str> {
        HARD_IDENTITIES
            .iter()
            .copied()
            .filter(|name| !self.identities[name].holds)
            .collect()
    }
}

/// Everything `check` evaluates at one sample.
struct SampleChecks {
    levi_civita_oracle: Residual,
    n_connection_formula: Residual,
    torsion_cross_check: Residual,
    canonical_torsion_skew: Residual,
    nijenhuis_projection: Residual,
    nijenhuis_difference: Residual,
    aqs_phi_derivative: Residual,
    qs_phi_derivative: Residual,
    canonical_phi_parallel: Residual,
    axioms: Residual,
    metricity_max: f64,
    metricity_xi_diff: f64,
    rank: usize,
}

fn sample_checks(s: &AdaptedStructure, p: &Point) -> Result<SampleChecks, GeometryError> {
    let lc = lc_adapted(s, p)?.coeffs;
    let lc_oracle = lc_from_coordinates(s, p)?.coeffs;
    let canon = Endomorphism::Canonical;
    let nc = n_connection(s, &canon, p)?.coeffs;
    let nc_formula = n_connection_from_levi_civita(s, &canon, p)?.coeffs;
    let tor = torsion(s, &canon, p, TORSION_SKEW_TOL)?;

    let n = s.chart().dim();
    let xi = n - 1;
    let defect = metricity_defect(s, &canon, p)?;
    let d_eta_xi = s.chart().d_eta_xi(p)?;
    let metricity_xi_diff = d_eta_xi
        .iter()
        .enumerate()
        .map(|(a, v)| (defect.get(&[xi, xi, a]) - v).abs())
        .fold(0.0_f64, f64::max);

    Ok(SampleChecks {
        levi_civita_oracle: Residual::new(lc.max_abs_diff(&lc_oracle)?, lc.max_abs()),
        n_connection_formula: Residual::new(nc.max_abs_diff(&nc_formula)?, nc.max_abs()),
        torsion_cross_check: Residual::new(tor.cross_check, tor.scale),
        canonical_torsion_skew: Residual::new(tor.skew_residual, tor.scale),
        nijenhuis_projection: check_projected_nijenhuis(s, p)?,
        nijenhuis_difference: check_nijenhuis_difference(s, p)?,
        aqs_phi_derivative: check_aqs_phi_derivative(s, p)?,
        qs_phi_derivative: check_qs_phi_derivative(s, p)?,
        canonical_phi_parallel: check_canonical_phi_parallel(s, p)?,
        axioms: Residual::new(s.validate_axioms(p)?.max(), 0.0),
        metricity_max: defect.max_abs(),
        metricity_xi_diff,
        rank: s.chart().rank_at(p)?,
    })
}

pub fn einstein_section(
    s: &AdaptedStructure,
    settings: &RunSettings,
) -> Result<EinsteinSection, GeometryError> {
    let mut sources = BTreeMap::new();
    for source in [OmegaSource::DEta, OmegaSource::FundamentalForm] {
        let outcome = einstein_check(
            s,
            settings.samples,
            settings.seed,
            settings.tolerance,
            source,
        );
        let outcome = match outcome {
            Ok(r) => EinsteinOutcome::Report((&r).into()),
            Err(e) if source != settings.omega_source => EinsteinOutcome::Error {
                error: e.to_string(),
            },
            Err(e) => return Err(e),
        };
        sources.insert(source.name(), outcome);
    }
    Ok(EinsteinSection {
        selected: settings.omega_source.name(),
        sources,
    })
}

/// Runs the full suite.
pub fn run_check(s: &AdaptedStructure, settings: &RunSettings) -> Result<RunReport, GeometryError> {
    let per_sample: Vec<SampleChecks> = (0..settings.samples)
        .into_par_iter()
        .map(|i| sample_checks(s, &s.chart().sample(settings.seed, i)?))
        .collect::<Result<_, _>>()?;
    let classification = classify(s, settings.samples, settings.seed, settings.tolerance)?;
    let einstein = einstein_section(s, settings)?;

    let tol = settings.tolerance;
    let collect =
        |f: fn(&SampleChecks) -> Residual| -> Vec<Residual> { per_sample.iter().map(f).collect() };
    let mut identities = BTreeMap::new();
    let mut add = |name: &'static str, rs: Vec<Residual>, tol: f64, hard: bool, per: bool| {
        identities.insert(name, IdentitySummary::from_residuals(&rs, tol, hard, per));
    };
    add(
        "levi_civita_oracle",
        collect(|c| c.levi_civita_oracle),
        LEVI_CIVITA_ORACLE_TOL,
        true,
        false,
    );
    add(
        "nijenhuis_projection",
        collect(|c| c.nijenhuis_projection),
        NIJENHUIS_TOL,
        true,
        false,
    );
    add(
        "nijenhuis_difference",
        collect(|c| c.nijenhuis_difference),
        NIJENHUIS_TOL,
        true,
        false,
    );
    add(
        "torsion_cross_check",
        collect(|c| c.torsion_cross_check),
        TORSION_CROSS_CHECK_TOL,
        true,
        false,
    );
    add(
        "canonical_torsion_skew",
        collect(|c| c.canonical_torsion_skew),
        TORSION_SKEW_TOL,
        false,
        false,
    );
    add(
        "n_connection_formula",
        collect(|c| c.n_connection_formula),
        tol,
        false,
        false,
    );
    add(
        "aqs_phi_derivative",
        collect(|c| c.aqs_phi_derivative),
        tol,
        false,
        true,
    );
    add(
        "qs_phi_derivative",
        collect(|c| c.qs_phi_derivative),
        tol,
        false,
        true,
    );
    add(
        "canonical_phi_parallel",
        collect(|c| c.canonical_phi_parallel),
        tol,
        false,
        true,
    );
    add("axioms", collect(|c| c.axioms), tol, false, false);

    let ranks: Vec<usize> = per_sample.iter().map(|c| c.rank).collect();
    let all_even = ranks.iter().all(|r| r % 2 == 0);
    let all_odd = ranks.iter().all(|r| r % 2 == 1);
    let rank = RankSummary {
        min: ranks.iter().copied().min().unwrap_or(0),
        max: ranks.iter().copied().max().unwrap_or(0),
        even: if all_even {
            Some(true)
        } else if all_odd {
            Some(false)
        } else {
            None
        },
        per_sample: ranks,
    };
    let metricity = MetricitySummary {
        canonical_max: per_sample
            .iter()
            .map(|c| c.metricity_max)
            .fold(0.0, f64::max),
        xi_xi_vs_d_eta_xi: per_sample
            .iter()
            .map(|c| c.metricity_xi_diff)
            .fold(0.0, f64::max),
        samples: per_sample.len(),
    };

    let mut report = RunReport {
        tool: ToolInfo::default(),
        seed: settings.seed,
        samples: settings.samples,
        tolerance: tol,
        classification: (&classification).into(),
        identities,
        einstein,
        rank,
        metricity,
        hard_identities_pass: false,
    };
    report.hard_identities_pass = report.failed_hard_identities().is_empty();
    Ok(report)
}

fn mark(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn classification_table(c: &ClassificationSummary) -> String {
    let mut out = String::from("classification\n");
    for (name, v) in &c.verdicts {
        out.push_str(&format!(
            "  {name:<24} {:<4} max {:.3e}\n",
            mark(v.holds),
            v.max_residual
        ));
    }
    out.push_str("quasi-Sasakian conditions\n");
    for (name, v) in &c.quasi_sasakian_conditions {
        out.push_str(&format!(
            "  {name:<24} {:<4} max {:.3e}\n",
            mark(v.holds),
            v.max_residual
        ));
    }
    out.push_str(&format!("axiom residual {:.3e}\n", c.axiom_residual));
    out
}

pub fn einstein_table(e: &EinsteinSection) -> String {
    let mut out = format!("einstein (selected source: {})\n", e.selected);
    for (name, outcome) in &e.sources {
        match outcome {
            EinsteinOutcome::Report(r) => out.push_str(&format!(
                "  {name:<24} {:<4} max {:.3e}  parallel torsion {:.3e}\n",
                mark(r.holds),
                r.max_residual,
                r.parallel_torsion_residual
            )),
            EinsteinOutcome::Error { error } => {
                out.push_str(&format!("  {name:<24} error: {error}\n"))
            }
        }
    }
    out
}

/// Human-readable table.
pub fn human(report: &RunReport) -> String {
    let mut out = format!(
        "{} {}  seed {}  samples {}  tolerance {:e}\n",
        report.tool.name, report.tool.version, report.seed, report.samples, report.tolerance
    );
    out.push_str(&classification_table(&report.classification));
    out.push_str("identities\n");
    for (name, r) in &report.identities {
        let status = if r.holds {
            "pass"
        } else if r.hard {
            "FAIL"
        } else {
            "no"
        };
        let hard = if r.hard { "hard" } else { "" };
        out.push_str(&format!(
            "  {name:<24} {status:<4} {hard:<4} max {:.3e}\n",
            r.max_residual
        ));
    }
    out.push_str(&einstein_table(&report.einstein));
    let parity = match report.rank.even {
        Some(true) => "even",
        Some(false) => "odd",
        None => "mixed",
    };
    out.push_str(&format!(
        "rank {}..{} ({parity})\n",
        report.rank.min, report.rank.max
    ));
    out.push_str(&format!(
        "metricity canonical max {:.3e}, (xi, xi, e_a) vs d_n Gamma_a {:.3e}\n",
        report.metricity.canonical_max, report.metricity.xi_xi_vs_d_eta_xi
    ));
    out.push_str(&format!(
        "hard identities {}\n",
        if report.hard_identities_pass {
            "pass"
        } else {
            "FAIL"
        }
    ));
    out
}
