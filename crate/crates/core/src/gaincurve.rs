//! Locomotion-gain model: bounds, the curvature candidate family, and the
//! validity gate every emitted command passes through.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Curvature;

/// Perceptual limits on the gains a controller may apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainBounds {
    #[serde(default = "defaults::g_t_min")]
    pub g_t_min: f64,
    #[serde(default = "defaults::g_t_max")]
    pub g_t_max: f64,
    /// Smallest permitted curvature radius (m).
    #[serde(default = "defaults::r_min", rename = "curvature_radius_min")]
    pub r_min: f64,
}

mod defaults {
    pub fn g_t_min() -> f64 {
        0.86
    }
    pub fn g_t_max() -> f64 {
        1.26
    }
    pub fn r_min() -> f64 {
        7.5
    }
}

impl Default for GainBounds {
    fn default() -> Self {
        Self {
            g_t_min: defaults::g_t_min(),
            g_t_max: defaults::g_t_max(),
            r_min: defaults::r_min(),
        }
    }
}

impl GainBounds {
    pub fn new(g_t_min: f64, g_t_max: f64, r_min: f64) -> Result<Self> {
        let b = Self {
            g_t_min,
            g_t_max,
            r_min,
        };
        b.check()?;
        Ok(b)
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.g_t_min > 0.0
            && self.g_t_min <= 1.0
            && self.g_t_max >= 1.0
            && self.g_t_max.is_finite()
            && self.r_min > 0.0
            && self.r_min.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "gain bounds need 0 < g_t_min <= 1 <= g_t_max and curvature_radius_min > 0, got {self:?}"
            )))
        }
    }
}

/// One entry of the candidate curvature family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCandidate {
    /// 1-based; the straight path is `2k + 1`.
    pub index: usize,
    /// Signed radius factor; `None` for the straight path (infinite factor).
    pub alpha: Option<f64>,
    pub curvature: Curvature,
}

impl CurvatureCandidate {
    pub fn is_straight(&self) -> bool {
        self.alpha.is_none()
    }
}

/// The `2k` signed radius factors, alternating left/right and growing in
/// magnitude pair by pair.
pub fn candidate_alphas(k: usize) -> Vec<f64> {
    assert!(k >= 1, "candidate family needs k >= 1");
    (1..=2 * k)
        .map(|i| {
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let pair = ((i - 1) / 2) as f64;
            sign / (PI / (2 * k) as f64 * pair).cos()
        })
        .collect()
}

/// `2k` arcs of radius `alpha * r_min` followed by the straight path.
pub fn candidate_paths(k: usize, bounds: &GainBounds) -> Vec<CurvatureCandidate> {
    let mut out: Vec<CurvatureCandidate> = candidate_alphas(k)
        .into_iter()
        .enumerate()
        .map(|(i, alpha)| CurvatureCandidate {
            index: i + 1,
            alpha: Some(alpha),
            curvature: Curvature::Arc(alpha * bounds.r_min),
        })
        .collect();
    out.push(CurvatureCandidate {
        index: 2 * k + 1,
        alpha: None,
        curvature: Curvature::Straight,
    });
    out
}

/// Steering decision for one user over one walking segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedirectionCommand {
    /// Physical heading right after the reset; `None` when no reset happens.
    pub reset_heading: Option<f64>,
    pub curvature: Curvature,
    /// Translation gain: virtual displacement over physical displacement.
    pub g_t: f64,
}

impl RedirectionCommand {
    pub fn walk(curvature: Curvature, g_t: f64) -> Self {
        Self {
            reset_heading: None,
            curvature,
            g_t,
        }
    }

    pub fn reset(heading: f64, curvature: Curvature, g_t: f64) -> Self {
        Self {
            reset_heading: Some(heading),
            curvature,
            g_t,
        }
    }
}

const GAIN_TOL: f64 = 1e-12;

/// Checks a command against the bounds, collecting every violation.
pub fn validate(cmd: &RedirectionCommand, bounds: &GainBounds) -> Result<(), Vec<String>> {
    let mut issues = Vec::new();
    if !cmd.g_t.is_finite() {
        issues.push(format!("translation gain {} is not finite", cmd.g_t));
    } else if cmd.g_t < bounds.g_t_min - GAIN_TOL {
        issues.push(format!(
            "translation gain {} below g_t_min={}",
            cmd.g_t, bounds.g_t_min
        ));
    } else if cmd.g_t > bounds.g_t_max + GAIN_TOL {
        issues.push(format!(
            "translation gain {} exceeds g_t_max={}",
            cmd.g_t, bounds.g_t_max
        ));
    }
    if let Curvature::Arc(r) = cmd.curvature {
        if !r.is_finite() || r == 0.0 {
            issues.push(format!("curvature radius {r} is not a finite non-zero value"));
        } else if r.abs() < bounds.r_min * (1.0 - 1e-9) {
            issues.push(format!(
                "curvature radius {} below curvature_radius_min={}",
                r.abs(),
                bounds.r_min
            ));
        }
    }
    if let Some(h) = cmd.reset_heading {
        if !h.is_finite() {
            issues.push(format!("reset heading {h} is not finite"));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let a = candidate_alphas(10);
        assert_eq!(a.len(), 20);
        assert_eq!(a[0], 1.0);
        assert_eq!(a[1], -1.0);
        // 1 / cos(pi/20), 1 / cos(9 pi/20)
        assert!((a[2] - 1.012_465_1).abs() < 1e-6, "{}", a[2]);
        assert!((a[19] + 6.392_453_2).abs() < 1e-6, "{}", a[19]);
    }

    #[test]
    fn alpha_structure() {
        for k in 1..=16 {
            let a = candidate_alphas(k);
            for j in 0..k {
                assert_eq!(a[2 * j], -a[2 * j + 1]);
                assert!(a[2 * j] >= 1.0);
                if j > 0 {
                    assert!(a[2 * j] > a[2 * j - 2]);
                }
            }
        }
    }

    #[test]
    fn candidate_family() {
        let b = GainBounds::default();
        let c = candidate_paths(10, &b);
        assert_eq!(c.len(), 21);
        assert!(c[20].is_straight());
        assert_eq!(c[20].index, 21);
        let max_r = c
            .iter()
            .filter_map(|c| c.curvature.radius())
            .map(f64::abs)
            .fold(0.0, f64::max);
        assert!((max_r - 47.943).abs() < 1e-3, "{max_r}");
        assert!(c.iter().filter_map(|c| c.curvature.radius()).all(|r| r.abs() >= b.r_min));

        let one = candidate_paths(1, &b);
        assert_eq!(one[0].curvature, Curvature::Arc(7.5));
        assert_eq!(one[1].curvature, Curvature::Arc(-7.5));
        assert_eq!(one[2].curvature, Curvature::Straight);
    }

    #[test]
    fn validation() {
        let b = GainBounds::default();
        assert!(validate(&RedirectionCommand::walk(Curvature::Straight, 1.0), &b).is_ok());
        let err = validate(&RedirectionCommand::walk(Curvature::Straight, 1.5), &b).unwrap_err();
        assert!(err[0].contains("g_t_max"));
        let err = validate(&RedirectionCommand::walk(Curvature::Arc(5.0), 1.0), &b).unwrap_err();
        assert!(err[0].contains("curvature_radius_min"));
        let err = validate(&RedirectionCommand::reset(f64::NAN, Curvature::Arc(-5.0), 0.5), &b)
            .unwrap_err();
        assert_eq!(err.len(), 3);
        assert!(validate(&RedirectionCommand::walk(Curvature::Arc(-7.5), 0.86), &b).is_ok());
    }

    #[test]
    fn bounds_check() {
        assert!(GainBounds::new(0.86, 1.26, 7.5).is_ok());
        assert!(GainBounds::new(1.1, 1.26, 7.5).is_err());
        assert!(GainBounds::new(0.86, 0.9, 7.5).is_err());
        assert!(GainBounds::new(0.86, 1.26, 0.0).is_err());
    }
}
