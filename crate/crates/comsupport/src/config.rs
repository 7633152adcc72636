//! Scenario configuration file (TOML, `schema_version = 1`).
//!
//! Parsing is two-stage: serde reads the document into plain structs, then
//! [`ScenarioConfig::to_scenario`] validates values and reports the offending
//! field path (`feet[0].mu`, `force_profile.points[3]`, ...).

use std::path::Path;

use comsupport_core::centroidal::ComPolicy;
use comsupport_core::controller::{ContactModel, Gains, HandPath, Profile, Scenario};
use comsupport_core::csa::{ContactMode, ContactPatch, CsaMiddle, NormalAxis, Point2};
use comsupport_core::spatial::{ContactPose, Vec3, Vec6};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub description: String,
    /// Robot mass [kg].
    pub mass: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub com_policy: ComPolicyConfig,
    /// Pinned CoM point for `com_policy = "fixed"`; defaults to the CoM of
    /// the zero-push solution.
    #[serde(default)]
    pub com_fixed_point: Option<[f64; 2]>,
    #[serde(default)]
    pub csa_middle: MiddleConfig,
    /// Right foot, then left foot.
    pub feet: Vec<FootConfig>,
    pub hand: HandConfig,
    pub force_profile: ProfileConfig,
    #[serde(default)]
    pub wipe_trajectory: Option<PathConfig>,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default)]
    pub contact_model: ContactModelConfig,
}

fn default_gravity() -> f64 {
    comsupport_core::G_MAG
}

fn default_dt() -> f64 {
    0.005
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComPolicyConfig {
    #[default]
    Free,
    Fixed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiddleConfig {
    #[default]
    Centroid,
    Chebyshev,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootConfig {
    pub center: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    pub half_x: f64,
    pub half_y: f64,
    pub mu: f64,
    #[serde(default)]
    pub fz_min: f64,
    pub fz_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisConfig {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeConfig {
    Fixed,
    Sliding,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandConfig {
    pub position: [f64; 3],
    /// Roll, pitch, yaw of the contact frame [rad].
    #[serde(default)]
    pub rpy: [f64; 3],
    pub normal_axis: AxisConfig,
    pub half_x: f64,
    pub half_y: f64,
    pub mu: f64,
    pub mode: ModeConfig,
    #[serde(default)]
    pub fz_min: f64,
    pub fz_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// `[t, normal force]` knots.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// `[t, offset along tangent 1, offset along tangent 2]` knots.
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub k_com: f64,
    /// Defaults to 2√k_com.
    #[serde(default)]
    pub b_com: Option<f64>,
    /// Per contact-frame wrench axis of the hand.
    pub admittance: [f64; 6],
    pub a_z: f64,
    pub k_posture: f64,
}

impl Default for GainsConfig {
    fn default() -> Self {
        Self { k_com: 25.0, b_com: None, admittance: [1e-3, 0.0, 0.0, 0.0, 0.0, 0.0], a_z: 2.5e-5, k_posture: 9.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactModelConfig {
    pub wall_stiffness: f64,
    pub time_constant: f64,
    #[serde(default)]
    pub surface_slope: [f64; 2],
    pub foot_stiffness: f64,
}

impl Default for ContactModelConfig {
    fn default() -> Self {
        let m = ContactModel::default();
        Self {
            wall_stiffness: m.wall_stiffness,
            time_constant: m.time_constant,
            surface_slope: [m.surface_slope.x, m.surface_slope.y],
            foot_stiffness: m.foot_stiffness,
        }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Failure {
    Failure::Config { path: path.into(), message: message.into() }
}

fn check(ok: bool, path: &str, message: &str) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(invalid(path, message))
    }
}

fn finite(values: &[f64], path: &str) -> Result<(), Failure> {
    check(values.iter().all(|v| v.is_finite()), path, "must be finite")
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid("<document>", e.to_string()))?;
        cfg.to_scenario()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Validated core scenario. A fixed CoM policy without an explicit point
    /// is resolved by the caller ([`crate::resolve_policy`]); here it maps to
    /// `Free`.
    pub fn to_scenario(&self) -> Result<Scenario, Failure> {
        check(self.schema_version == SCHEMA_VERSION, "schema_version", "unsupported schema version (expected 1)")?;
        check(self.mass > 0.0 && self.mass.is_finite(), "mass", "must be positive")?;
        check(self.gravity > 0.0 && self.gravity.is_finite(), "gravity", "must be positive")?;
        check(self.dt > 0.0 && self.dt.is_finite(), "dt", "must be positive")?;
        check(self.t_end >= 0.0 && self.t_end.is_finite(), "t_end", "must be non-negative")?;
        check(self.feet.len() == 2, "feet", "exactly two feet are required (right, then left)")?;

        let mut feet = Vec::with_capacity(2);
        let mut limits = Vec::with_capacity(2);
        for (i, f) in self.feet.iter().enumerate() {
            let p = |field: &str| format!("feet[{i}].{field}");
            finite(&f.center, &p("center"))?;
            check(f.center[2].abs() <= 1e-9, &p("center"), "feet must lie on the ground plane z = 0")?;
            finite(&[f.yaw], &p("yaw"))?;
            check(f.half_x > 0.0, &p("half_x"), "must be positive")?;
            check(f.half_y > 0.0, &p("half_y"), "must be positive")?;
            check(f.mu > 0.0 && f.mu < 2.0, &p("mu"), "must be in (0, 2)")?;
            check(f.fz_min >= 0.0, &p("fz_min"), "must be non-negative")?;
            check(f.fz_max > f.fz_min, &p("fz_max"), "must exceed fz_min")?;
            let pose = ContactPose::from_yaw(Vec3::from(f.center), f.yaw);
            feet.push(ContactPatch::foot(pose, f.half_x, f.half_y, f.mu).map_err(|e| invalid(p("mu"), e.to_string()))?);
            limits.push((f.fz_min, f.fz_max));
        }

        let h = &self.hand;
        finite(&h.position, "hand.position")?;
        finite(&h.rpy, "hand.rpy")?;
        check(h.half_x > 0.0, "hand.half_x", "must be positive")?;
        check(h.half_y > 0.0, "hand.half_y", "must be positive")?;
        check(h.mu > 0.0 && h.mu < 2.0, "hand.mu", "must be in (0, 2)")?;
        check(h.fz_min >= 0.0, "hand.fz_min", "must be non-negative")?;
        check(h.fz_max > h.fz_min, "hand.fz_max", "must exceed fz_min")?;
        let axis = match h.normal_axis {
            AxisConfig::X => NormalAxis::X,
            AxisConfig::Y => NormalAxis::Y,
            AxisConfig::Z => NormalAxis::Z,
        };
        let mode = match h.mode {
            ModeConfig::Fixed => ContactMode::Fixed,
            ModeConfig::Sliding => ContactMode::Sliding,
        };
        let pose = ContactPose::from_rpy(Vec3::from(h.position), h.rpy[0], h.rpy[1], h.rpy[2]);
        let hand = ContactPatch::new(pose, h.half_x, h.half_y, h.mu, mode, axis)
            .map_err(|e| invalid("hand", e.to_string()))?;

        check(!self.force_profile.points.is_empty(), "force_profile.points", "needs at least one knot")?;
        for (i, k) in self.force_profile.points.iter().enumerate() {
            let path = format!("force_profile.points[{i}]");
            finite(k, &path)?;
            check(k[1] >= 0.0, &path, "pressing force must be non-negative")?;
            if i > 0 {
                check(k[0] > self.force_profile.points[i - 1][0], &path, "times must be strictly increasing")?;
            }
        }
        let force_profile = Profile::new(self.force_profile.points.iter().map(|k| (k[0], k[1])).collect())
            .map_err(|e| invalid("force_profile.points", e.to_string()))?;

        let wipe_path = match &self.wipe_trajectory {
            None => None,
            Some(w) => {
                check(!w.points.is_empty(), "wipe_trajectory.points", "needs at least one knot")?;
                for (i, k) in w.points.iter().enumerate() {
                    let path = format!("wipe_trajectory.points[{i}]");
                    finite(k, &path)?;
                    if i > 0 {
                        check(k[0] > w.points[i - 1][0], &path, "times must be strictly increasing")?;
                    }
                }
                Some(
                    HandPath::new(w.points.iter().map(|k| (k[0], Point2::new(k[1], k[2]))).collect())
                        .map_err(|e| invalid("wipe_trajectory.points", e.to_string()))?,
                )
            }
        };
        if mode == ContactMode::Sliding {
            check(
                wipe_path.as_ref().is_some_and(|p| p.direction(0.0).is_some()),
                "wipe_trajectory",
                "a sliding hand needs a wipe trajectory that moves",
            )?;
            check(
                self.force_profile.points.iter().all(|k| k[1] > 0.0),
                "force_profile.points",
                "a sliding hand needs a positive pressing force throughout",
            )?;
        }

        let g = &self.gains;
        check(g.k_com > 0.0, "gains.k_com", "must be positive")?;
        let b_com = g.b_com.unwrap_or(2.0 * g.k_com.sqrt());
        check(b_com > 0.0, "gains.b_com", "must be positive")?;
        check(g.admittance.iter().all(|&a| a >= 0.0 && a.is_finite()), "gains.admittance", "entries must be ≥ 0")?;
        check(g.a_z >= 0.0, "gains.a_z", "must be non-negative")?;
        check(g.k_posture > 0.0, "gains.k_posture", "must be positive")?;
        let gains =
            Gains { k_com: g.k_com, b_com, admittance: Vec6::from_row_slice(&g.admittance), a_z: g.a_z, k_posture: g.k_posture };

        let m = &self.contact_model;
        check(m.wall_stiffness > 0.0, "contact_model.wall_stiffness", "must be positive")?;
        check(m.time_constant >= 0.0, "contact_model.time_constant", "must be non-negative")?;
        finite(&m.surface_slope, "contact_model.surface_slope")?;
        check(m.foot_stiffness > 0.0, "contact_model.foot_stiffness", "must be positive")?;

        if let Some(p) = self.com_fixed_point {
            finite(&p, "com_fixed_point")?;
        }
        let com_policy = match (self.com_policy, self.com_fixed_point) {
            (ComPolicyConfig::Fixed, Some(p)) => ComPolicy::Fixed(Point2::new(p[0], p[1])),
            _ => ComPolicy::Free,
        };

        let scenario = Scenario {
            mass: self.mass,
            g_mag: self.gravity,
            feet: [feet[0], feet[1]],
            foot_force_limits: [limits[0], limits[1]],
            hand,
            hand_force_limits: (h.fz_min, h.fz_max),
            force_profile,
            wipe_path,
            gains,
            dt: self.dt,
            t_end: self.t_end,
            com_policy,
            csa_middle: match self.csa_middle {
                MiddleConfig::Centroid => CsaMiddle::Centroid,
                MiddleConfig::Chebyshev => CsaMiddle::Chebyshev,
            },
            contact_model: ContactModel {
                wall_stiffness: m.wall_stiffness,
                time_constant: m.time_constant,
                surface_slope: Point2::new(m.surface_slope[0], m.surface_slope[1]),
                foot_stiffness: m.foot_stiffness,
            },
        };
        scenario.validate().map_err(|e| invalid("<scenario>", e.to_string()))?;
        Ok(scenario)
    }
}
