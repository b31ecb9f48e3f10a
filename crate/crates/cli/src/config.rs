//! Scenario configuration: the JSON format, the built-in scenarios and the
//! translation into simulation configs.
//!
//! Every field except `scenario` is optional and falls back to the built-in
//! default of that scenario. Gains may be written as a scalar `c`, meaning
//! `c I`, or as a row-major 3x3 matrix.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use manifold_ctrl::matlib::{e2, rot_exp, Mat3, Vec3};
use manifold_ctrl::odesim::{Scenario, SimConfig, ThrustExtension};
use manifold_ctrl::quadcopter::{IntegralGains, QuadController, QuadGains, QuadState};
use manifold_ctrl::rigid_body::{RigidController, RigidGains, RigidState, RigidVariant};
use manifold_ctrl::StabilizationParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    RigidTrack,
    RigidCompareLee,
    QuadTrack,
    QuadTrackDisturbed,
    ZsDecay,
}

impl ScenarioName {
    /// Listing order.
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::RigidTrack,
        ScenarioName::RigidCompareLee,
        ScenarioName::QuadTrack,
        ScenarioName::QuadTrackDisturbed,
        ScenarioName::ZsDecay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioName::RigidTrack => "rigid-track",
            ScenarioName::RigidCompareLee => "rigid-compare-lee",
            ScenarioName::QuadTrack => "quad-track",
            ScenarioName::QuadTrackDisturbed => "quad-track-disturbed",
            ScenarioName::ZsDecay => "zs-decay",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ScenarioName::RigidTrack => "rigid body tracking from a near half-turn attitude error",
            ScenarioName::RigidCompareLee => "linear law against the geometric law of Lee from exp(0.9 pi e2)",
            ScenarioName::QuadTrack => "quadcopter tracking with the dynamic thrust extension",
            ScenarioName::QuadTrackDisturbed => "quadcopter tracking with a force disturbance on [3, 4]",
            ScenarioName::ZsDecay => "decoupled symmetric attitude-error dynamics from a random start",
        }
    }

    fn is_rigid(&self) -> bool {
        matches!(self, ScenarioName::RigidTrack | ScenarioName::RigidCompareLee)
    }

    fn is_quad(&self) -> bool {
        matches!(self, ScenarioName::QuadTrack | ScenarioName::QuadTrackDisturbed)
    }

    fn default_t_end(&self) -> f64 {
        match self {
            ScenarioName::ZsDecay => 5.0,
            _ => 20.0,
        }
    }

    fn default_angle(&self) -> f64 {
        match self {
            ScenarioName::RigidCompareLee => 0.9 * PI,
            ScenarioName::QuadTrack | ScenarioName::QuadTrackDisturbed => 0.25 * PI,
            _ => 0.99 * PI,
        }
    }

    /// Human-readable parameter defaults for listings.
    pub fn defaults(&self) -> Vec<(&'static str, String)> {
        let mut d = vec![
            ("dt", "0.001".to_string()),
            ("t_end", format!("{}", self.default_t_end())),
            ("k_e", "1".to_string()),
        ];
        match self {
            ScenarioName::RigidTrack => {
                d.push(("controller", "p4 (k_p = 4, k_d = 2 I, eps = 1)".into()));
                d.push(("initial", "R = exp(0.99 pi e2), Omega = (-1, -1, -1)".into()));
            }
            ScenarioName::RigidCompareLee => {
                d.push(("controller", "p4 (k_p = 4, k_d = 2 I, eps = 1) and lee (k_r = 4, k_omega = 2)".into()));
                d.push(("initial", "R = exp(0.9 pi e2), Omega = (-1, -1, -1)".into()));
            }
            ScenarioName::QuadTrack | ScenarioName::QuadTrackDisturbed => {
                d.push(("g", "1".into()));
                d.push(("gains", "k3 = 8 I, k2 = 32 I, k1 = k0 = 64 I, a1 = 8, a0 = 20".into()));
                d.push((
                    "initial",
                    "R = exp(0.25 pi e2), Omega = 0, x = (-g/2, -g/2, 0), v = 0, f = 2 g, f' = 0".into(),
                ));
                d.push(("thrust_extension", "additive".into()));
                d.push(("disturbed", (*self == ScenarioName::QuadTrackDisturbed).to_string()));
            }
            ScenarioName::ZsDecay => {
                d.push(("initial", "random symmetric Z_s with entries in [-1, 1]".into()));
                d.push(("seed", "0".into()));
            }
        }
        d
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioName {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        ScenarioName::ALL.into_iter().find(|n| n.name() == s).ok_or_else(|| {
            let known: Vec<_> = ScenarioName::ALL.iter().map(|n| n.name()).collect();
            CliError::ConfigParse(format!("unknown scenario `{s}` (known: {})", known.join(", ")))
        })
    }
}

/// A scalar `c` (meaning `c I`) or a row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gain {
    Scalar(f64),
    Matrix([[f64; 3]; 3]),
}

impl Gain {
    pub fn matrix(&self) -> Mat3 {
        match self {
            Gain::Scalar(c) => *c * Mat3::identity(),
            Gain::Matrix(m) => mat_from_rows(m),
        }
    }

    /// The scalar `c` of a gain that must be `c I`.
    pub fn scalar(&self, name: &str) -> Result<f64, CliError> {
        match self {
            Gain::Scalar(c) => Ok(*c),
            Gain::Matrix(m) => {
                let c = m[0][0];
                if mat_from_rows(m) == c * Mat3::identity() {
                    Ok(c)
                } else {
                    Err(CliError::ConfigParse(format!("gain `{name}` must be a scalar multiple of the identity")))
                }
            }
        }
    }
}

fn mat_from_rows(m: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| m[i][j])
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_p: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_d: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_i: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k3: Option<Gain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    /// Integral gain on `dx` for the quadcopter PID law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_int: Option<Gain>,
    /// Integral gain on the yaw error for the quadcopter PID law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_int: Option<f64>,
}

impl GainsConfig {
    fn set_fields(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut push = |name, set: bool| {
            if set {
                v.push(name)
            }
        };
        push("k_p", self.k_p.is_some());
        push("k_d", self.k_d.is_some());
        push("k_i", self.k_i.is_some());
        push("eps", self.eps.is_some());
        push("k_r", self.k_r.is_some());
        push("k_omega", self.k_omega.is_some());
        push("k0", self.k0.is_some());
        push("k1", self.k1.is_some());
        push("k2", self.k2.is_some());
        push("k3", self.k3.is_some());
        push("a0", self.a0.is_some());
        push("a1", self.a1.is_some());
        push("k_int", self.k_int.is_some());
        push("a_int", self.a_int.is_some());
        v
    }

    fn only(&self, allowed: &[&str], owner: &str) -> Result<(), CliError> {
        match self.set_fields().into_iter().find(|f| !allowed.contains(f)) {
            Some(f) => Err(CliError::ConfigParse(format!("gain `{f}` does not apply to {owner}"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Initial attitude as a row-major matrix; exclusive with `angle`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<[[f64; 3]; 3]>,
    /// Initial attitude `exp(angle e2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_dot: Option<f64>,
    /// Symmetric initial `Z_s` for `zs-decay`; random from `seed` if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_s: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    /// Rigid scenarios only. For `rigid-compare-lee` this is the law compared
    /// against Lee's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<RigidVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thrust_extension: Option<ThrustExtension>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// One simulation of a run, written to `<stem>.csv` and `<stem>.summary.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub stem: String,
    pub controller: Option<RigidVariant>,
    pub sim: SimConfig,
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::from(*a)
}

fn attitude(init: &InitialConfig, default_angle: f64) -> Result<Mat3, CliError> {
    match (&init.r, init.angle) {
        (Some(_), Some(_)) => Err(CliError::ConfigParse("initial: give either `r` or `angle`, not both".into())),
        (Some(r), None) => Ok(mat_from_rows(r)),
        (None, angle) => Ok(rot_exp(&e2(), angle.unwrap_or(default_angle)).expect("unit axis")),
    }
}

impl ScenarioConfig {
    pub fn builtin(scenario: ScenarioName) -> Self {
        ScenarioConfig {
            scenario,
            controller: None,
            gains: None,
            k_e: None,
            g: None,
            dt: None,
            t_end: None,
            record_stride: None,
            disturbed: None,
            thrust_extension: None,
            initial: None,
            seed: None,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse(format!("config: {e}")))
    }

    fn reject(&self, set: bool, field: &str) -> Result<(), CliError> {
        if set {
            Err(CliError::ConfigParse(format!("`{field}` does not apply to scenario {}", self.scenario)))
        } else {
            Ok(())
        }
    }

    fn params(&self) -> Result<StabilizationParams, CliError> {
        StabilizationParams::new(self.k_e.unwrap_or(1.0)).map_err(|e| CliError::InvalidGains(e.to_string()))
    }

    fn sim_config(&self, scenario: Scenario) -> Result<SimConfig, CliError> {
        let mut cfg = SimConfig::new(scenario);
        cfg.params = self.params()?;
        cfg.t_end = self.t_end.unwrap_or(self.scenario.default_t_end());
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(stride) = self.record_stride {
            cfg.record_stride = stride;
        }
        if let Some(g) = self.g {
            cfg.g = g;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolves defaults and validates gains; no simulation is run.
    pub fn jobs(&self) -> Result<Vec<Job>, CliError> {
        let gains = self.gains.clone().unwrap_or_default();
        let init = self.initial.clone().unwrap_or_default();
        if self.scenario.is_rigid() {
            self.reject(self.g.is_some(), "g")?;
            self.reject(self.disturbed.is_some(), "disturbed")?;
            self.reject(self.thrust_extension.is_some(), "thrust_extension")?;
            self.reject(self.seed.is_some(), "seed")?;
            self.reject(init.x.is_some() || init.v.is_some(), "initial.x / initial.v")?;
            self.reject(init.f.is_some() || init.f_dot.is_some() || init.z_s.is_some(), "initial.f / f_dot / z_s")?;
            let initial = RigidState {
                r: attitude(&init, self.scenario.default_angle())?,
                omega: init.omega.as_ref().map(vec3).unwrap_or(Vec3::repeat(-1.0)),
            };
            let main = self.controller.unwrap_or(RigidVariant::P4);
            let mut variants = vec![main];
            if self.scenario == ScenarioName::RigidCompareLee {
                if main == RigidVariant::Lee {
                    return Err(CliError::ConfigParse(
                        "rigid-compare-lee compares a linear law against lee; pick p1..p5".into(),
                    ));
                }
                variants.push(RigidVariant::Lee);
            }
            let allowed: Vec<&str> = variants.iter().flat_map(|v| gain_fields(*v).iter().copied()).collect();
            gains.only(&allowed, &format!("controller {}", variants.iter().map(|v| v.name()).collect::<Vec<_>>().join(" / ")))?;
            let mut jobs = Vec::new();
            for v in variants {
                let controller = RigidController::new(rigid_gains(v, &gains)?)?;
                let stem = if self.scenario == ScenarioName::RigidCompareLee {
                    format!("{}-{}", self.scenario, v)
                } else {
                    self.scenario.to_string()
                };
                jobs.push(Job {
                    stem,
                    controller: Some(v),
                    sim: self.sim_config(Scenario::Rigid { controller, initial })?,
                });
            }
            Ok(jobs)
        } else if self.scenario.is_quad() {
            self.reject(self.controller.is_some(), "controller")?;
            self.reject(self.seed.is_some(), "seed")?;
            self.reject(init.z_s.is_some(), "initial.z_s")?;
            gains.only(&["k0", "k1", "k2", "k3", "a0", "a1", "k_int", "a_int"], "the quadcopter law")?;
            let g = self.g.unwrap_or(1.0);
            let mut initial = QuadState::experiment_initial(g);
            initial.r = attitude(&init, self.scenario.default_angle())?;
            if let Some(w) = &init.omega {
                initial.omega = vec3(w);
            }
            if let Some(x) = &init.x {
                initial.x = vec3(x);
            }
            if let Some(v) = &init.v {
                initial.v = vec3(v);
            }
            if let Some(f) = init.f {
                initial.f = f;
            }
            if let Some(f_dot) = init.f_dot {
                initial.f_dot = f_dot;
            }
            let controller = QuadController::new(quad_gains(&gains)?, self.params()?)?;
            let disturbed = self.disturbed.unwrap_or(self.scenario == ScenarioName::QuadTrackDisturbed);
            let sim = self.sim_config(Scenario::Quad {
                controller,
                initial,
                extension: self.thrust_extension.unwrap_or(ThrustExtension::Additive),
                disturbed,
            })?;
            Ok(vec![Job {
                stem: self.scenario.to_string(),
                controller: None,
                sim,
            }])
        } else {
            self.reject(self.controller.is_some(), "controller")?;
            self.reject(self.g.is_some(), "g")?;
            self.reject(self.disturbed.is_some(), "disturbed")?;
            self.reject(self.thrust_extension.is_some(), "thrust_extension")?;
            self.reject(!gains.set_fields().is_empty(), "gains")?;
            let other = init.r.is_some()
                || init.angle.is_some()
                || init.omega.is_some()
                || init.x.is_some()
                || init.v.is_some()
                || init.f.is_some()
                || init.f_dot.is_some();
            self.reject(other, "initial fields other than z_s")?;
            let z_s0 = match &init.z_s {
                Some(m) => {
                    let z = mat_from_rows(m);
                    if (z - z.transpose()).norm() > 1e-12 * z.norm().max(1.0) {
                        return Err(CliError::ConfigParse("initial.z_s must be symmetric".into()));
                    }
                    z
                }
                None => random_symmetric(self.seed.unwrap_or(0)),
            };
            Ok(vec![Job {
                stem: self.scenario.to_string(),
                controller: None,
                sim: self.sim_config(Scenario::ZsDecay { z_s0 })?,
            }])
        }
    }
}

fn random_symmetric(seed: u64) -> Mat3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Mat3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
    0.5 * (a + a.transpose())
}

fn gain_fields(v: RigidVariant) -> &'static [&'static str] {
    match v {
        RigidVariant::P1 | RigidVariant::P3 => &["k_p", "k_d"],
        RigidVariant::P2 => &["k_p", "k_d", "k_i"],
        RigidVariant::P4 => &["k_p", "k_d", "eps"],
        RigidVariant::P5 | RigidVariant::Lee => &["k_r", "k_omega"],
    }
}

fn rigid_gains(v: RigidVariant, g: &GainsConfig) -> Result<RigidGains, CliError> {
    let mat = |gain: &Option<Gain>, default: Mat3| gain.map_or(default, |x| x.matrix());
    let scalar = |gain: &Option<Gain>, name: &str, default: f64| gain.map_or(Ok(default), |x| x.scalar(name));
    Ok(match RigidGains::defaults(v) {
        RigidGains::P1 { k_p, k_d } => RigidGains::P1 {
            k_p: mat(&g.k_p, k_p),
            k_d: mat(&g.k_d, k_d),
        },
        RigidGains::P2 { k_p, k_d, k_i } => RigidGains::P2 {
            k_p: mat(&g.k_p, k_p),
            k_d: mat(&g.k_d, k_d),
            k_i: mat(&g.k_i, k_i),
        },
        RigidGains::P3 { k_p, k_d } => RigidGains::P3 {
            k_p: scalar(&g.k_p, "k_p", k_p)?,
            k_d: mat(&g.k_d, k_d),
        },
        RigidGains::P4 { k_p, k_d, eps } => RigidGains::P4 {
            k_p: scalar(&g.k_p, "k_p", k_p)?,
            k_d: mat(&g.k_d, k_d),
            eps: g.eps.unwrap_or(eps),
        },
        RigidGains::P5 { k_r, k_omega } => RigidGains::P5 {
            k_r: g.k_r.unwrap_or(k_r),
            k_omega: g.k_omega.unwrap_or(k_omega),
        },
        RigidGains::Lee { k_r, k_omega } => RigidGains::Lee {
            k_r: g.k_r.unwrap_or(k_r),
            k_omega: g.k_omega.unwrap_or(k_omega),
        },
    })
}

fn quad_gains(g: &GainsConfig) -> Result<QuadGains, CliError> {
    let d = QuadGains::default();
    let mat = |gain: &Option<Gain>, default: Mat3| gain.map_or(default, |x| x.matrix());
    let integral = match (&g.k_int, g.a_int) {
        (None, None) => None,
        (Some(k), Some(a)) => Some(IntegralGains { k_i: k.matrix(), a_i: a }),
        _ => return Err(CliError::ConfigParse("give both `k_int` and `a_int` or neither".into())),
    };
    Ok(QuadGains {
        k0: mat(&g.k0, d.k0),
        k1: mat(&g.k1, d.k1),
        k2: mat(&g.k2, d.k2),
        k3: mat(&g.k3, d.k3),
        a0: g.a0.unwrap_or(d.a0),
        a1: g.a1.unwrap_or(d.a1),
        integral,
    })
}
