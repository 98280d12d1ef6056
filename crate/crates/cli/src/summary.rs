//! Per-config reset statistics and pairwise tests against `ours`.

use rdw_core::stats::{bonferroni, mann_whitney_u, summary, Summary};
use serde::{Deserialize, Serialize};

use crate::table::TrialRow;

pub const REFERENCE_METHOD: &str = "ours";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    /// Successful trials.
    pub n: usize,
    pub failed: usize,
    /// Absent when every trial failed.
    pub resets: Option<Summary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method: String,
    pub u_reference: f64,
    pub u_method: f64,
    pub p_two_sided: f64,
    pub p_adjusted: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config: String,
    pub n_users: usize,
    pub methods: Vec<MethodSummary>,
    /// Each baseline against `ours`.
    pub comparisons: Vec<Comparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub name: String,
    pub reference: String,
    /// Number of comparisons per config used in the Bonferroni adjustment.
    pub comparisons_per_config: usize,
    pub configs: Vec<ConfigSummary>,
}

/// Reset counts of successful rows for one config and method, in row order.
pub fn resets(rows: &[TrialRow], config: &str, method: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.ok() && r.config() == config && r.method == method)
        .filter_map(|r| r.common_resets)
        .map(|c| c as f64)
        .collect()
}

fn ordered_unique<'a>(it: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in it {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Groups rows by config and method in order of first appearance.
pub fn summarize(name: &str, rows: &[TrialRow]) -> SummaryReport {
    let methods = ordered_unique(rows.iter().map(|r| r.method.as_str()));
    let m = methods.iter().filter(|x| *x != REFERENCE_METHOD).count();
    let configs = ordered_unique(rows.iter().map(|r| r.config()))
        .into_iter()
        .map(|config| {
            let n_users = rows
                .iter()
                .find(|r| r.config() == config)
                .map(|r| r.n_users)
                .unwrap_or(0);
            let per: Vec<MethodSummary> = methods
                .iter()
                .filter(|method| rows.iter().any(|r| r.config() == config && &r.method == *method))
                .map(|method| {
                    let v = resets(rows, &config, method);
                    let total = rows
                        .iter()
                        .filter(|r| r.config() == config && &r.method == method)
                        .count();
                    MethodSummary {
                        method: method.clone(),
                        n: v.len(),
                        failed: total - v.len(),
                        resets: summary(&v),
                    }
                })
                .collect();
            let reference = resets(rows, &config, REFERENCE_METHOD);
            let comparisons = per
                .iter()
                .filter(|s| s.method != REFERENCE_METHOD && s.n > 0 && !reference.is_empty())
                .filter_map(|s| {
                    let other = resets(rows, &config, &s.method);
                    let t = mann_whitney_u(&reference, &other).ok()?;
                    Some(Comparison {
                        method: s.method.clone(),
                        u_reference: t.u_a,
                        u_method: t.u_b,
                        p_two_sided: t.p_two_sided,
                        p_adjusted: bonferroni(t.p_two_sided, m),
                        exact: t.exact,
                    })
                })
                .collect();
            ConfigSummary {
                config,
                n_users,
                methods: per,
                comparisons,
            }
        })
        .collect();
    SummaryReport {
        name: name.to_string(),
        reference: REFERENCE_METHOD.to_string(),
        comparisons_per_config: m,
        configs,
    }
}
