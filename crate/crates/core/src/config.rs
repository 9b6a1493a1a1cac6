//! Flat `key = value` settings.
//!
//! ```text
//! # planner
//! planner = rmpc
//! samples_K = 16
//! weight_range = 0.1,10
//! ```
//!
//! Blank lines and `#` comments are ignored, keys are case-sensitive and an
//! unknown key is an error. Values are layered: built-in defaults, then a
//! file, then individual overrides (the CLI flags).

use std::path::Path;

use crate::error::ConfigError;
use crate::eval::EpisodeConfig;
use crate::planners::{Planner, PlannerConfig, PlannerKind};
use crate::scenegen::SceneGenConfig;

/// Environment variable naming a default settings file.
pub const CONFIG_ENV: &str = "RMPC_PUSH_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub planner: Planner,
    pub episode: EpisodeConfig,
    pub scenegen: SceneGenConfig,
    /// Worker threads for batch evaluation; `None` uses every core.
    pub workers: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        let planner = Planner::new(PlannerConfig::default());
        Self {
            episode: EpisodeConfig {
                max_steps: planner.config.max_steps,
                ..Default::default()
            },
            planner,
            scenegen: SceneGenConfig::default(),
            workers: None,
        }
    }
}

/// Every accepted key, in the order `to_text` writes them.
pub const KEYS: &[&str] = &[
    "planner",
    "samples_K",
    "horizon_H",
    "weight_range",
    "seed",
    "include_nominal",
    "sample_policy_weights",
    "sample_field_alphas",
    "mpc_resample_every",
    "mpc_obstacle_weight",
    "mpc_clearance",
    "mpc_reach_weight",
    "max_steps",
    "target_mass_scale",
    "gamma",
    "angular_weight",
    "collision_epsilon",
    "dt",
    "floor_friction",
    "contact_friction",
    "penetration_tolerance",
    "solver_iterations",
    "robot_radius",
    "robot_mass",
    "v_max",
    "a_max",
    "attractor_gain",
    "attractor_damping",
    "attractor_soft_radius",
    "obstacle_eta",
    "obstacle_damping",
    "obstacle_d_min",
    "obstacle_metric_cap",
    "obstacle_d_active",
    "approach_margin",
    "engage_radius",
    "field_gain",
    "orbit_sector",
    "orbit_clearance",
    "max_deflection",
    "wall_d_active",
    "scene_objects",
    "scene_min_clearance",
    "scene_wall_clearance",
    "scene_min_goal_distance",
    "scene_goal_tolerance",
    "workspace",
    "workers",
];

fn invalid(key: &str, value: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn num(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(invalid(key, value)),
    }
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    num(key, value).and_then(|v| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, value))
        }
    })
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    num(key, value).and_then(|v| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, value))
        }
    })
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| invalid(key, value))
}

fn positive_count(key: &str, value: &str) -> Result<usize, ConfigError> {
    count(key, value).and_then(|v| {
        if v > 0 {
            Ok(v)
        } else {
            Err(invalid(key, value))
        }
    })
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    value.parse().map_err(|_| invalid(key, value))
}

fn pair<T: std::str::FromStr>(key: &str, value: &str) -> Result<(T, T), ConfigError> {
    let (a, b) = value.split_once(',').ok_or_else(|| invalid(key, value))?;
    let parse = |s: &str| s.trim().parse::<T>().map_err(|_| invalid(key, value));
    Ok((parse(a)?, parse(b)?))
}

impl Settings {
    /// Defaults, then the file named by `RMPC_PUSH_CONFIG` if it is set.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut s = Self::default();
        if let Some(path) = std::env::var_os(CONFIG_ENV) {
            s.apply_file(Path::new(&path))?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let p = &mut self.planner;
        let g = &mut p.control.gains;
        match key {
            "planner" => {
                p.config.kind = value
                    .parse::<PlannerKind>()
                    .map_err(|_| invalid(key, value))?
            }
            "samples_K" => p.config.samples_k = positive_count(key, value)?,
            "horizon_H" => {
                p.config.horizon_h = positive_count(key, value)?;
                p.reward.horizon = p.config.horizon_h;
            }
            "weight_range" => {
                let (low, high): (f64, f64) = pair(key, value)?;
                if !(low > 0.0 && low <= high && high.is_finite()) {
                    return Err(invalid(key, value));
                }
                p.config.weight_log_range = (low, high);
            }
            "seed" => {
                let seed = value.parse().map_err(|_| invalid(key, value))?;
                p.config.seed = seed;
                self.scenegen.seed = seed;
            }
            "include_nominal" => p.config.include_nominal = flag(key, value)?,
            "sample_policy_weights" => p.config.sample_policy_weights = flag(key, value)?,
            "sample_field_alphas" => p.config.sample_field_alphas = flag(key, value)?,
            "mpc_resample_every" => p.config.mpc_resample_every = positive_count(key, value)?,
            "mpc_obstacle_weight" => p.config.mpc_obstacle_weight = non_negative(key, value)?,
            "mpc_clearance" => p.config.mpc_clearance = non_negative(key, value)?,
            "mpc_reach_weight" => p.config.mpc_reach_weight = non_negative(key, value)?,
            "max_steps" => {
                let n = count(key, value)?;
                p.config.max_steps = n;
                self.episode.max_steps = n;
            }
            "target_mass_scale" => self.episode.target_mass_scale = positive(key, value)?,
            "gamma" => {
                let v = num(key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(key, value));
                }
                p.reward.gamma = v;
            }
            "angular_weight" => {
                let v = non_negative(key, value)?;
                p.reward.angular_weight = v;
                p.physics.angular_weight = v;
            }
            "collision_epsilon" => {
                let v = positive(key, value)?;
                p.reward.collision_epsilon = v;
                p.physics.displacement_epsilon = v;
            }
            "dt" => p.physics.dt = positive(key, value)?,
            "floor_friction" => p.physics.floor_friction_mu = non_negative(key, value)?,
            "contact_friction" => p.physics.contact_friction_mu = non_negative(key, value)?,
            "penetration_tolerance" => p.physics.penetration_tolerance = positive(key, value)?,
            "solver_iterations" => p.physics.solver_iterations = positive_count(key, value)?,
            "robot_radius" => {
                let v = positive(key, value)?;
                p.physics.robot_radius = v;
                p.control.robot_radius = v;
                self.scenegen.robot_radius = v;
            }
            "robot_mass" => p.physics.robot_mass = positive(key, value)?,
            "v_max" => {
                let v = positive(key, value)?;
                p.physics.limits.v_max = v;
                p.control.limits.v_max = v;
            }
            "a_max" => {
                let v = positive(key, value)?;
                p.physics.limits.a_max = v;
                p.control.limits.a_max = v;
            }
            "attractor_gain" => g.attractor_gain = non_negative(key, value)?,
            "attractor_damping" => g.attractor_damping = non_negative(key, value)?,
            "attractor_soft_radius" => g.attractor_soft_radius = positive(key, value)?,
            "obstacle_eta" => g.obstacle_eta = non_negative(key, value)?,
            "obstacle_damping" => g.obstacle_damping = non_negative(key, value)?,
            "obstacle_d_min" => g.obstacle_d_min = positive(key, value)?,
            "obstacle_metric_cap" => g.obstacle_metric_cap = positive(key, value)?,
            "obstacle_d_active" => g.obstacle_d_active = positive(key, value)?,
            "approach_margin" => g.approach_margin = non_negative(key, value)?,
            "engage_radius" => {
                g.engage_radius = match value {
                    "auto" => None,
                    v => Some(positive(key, v)?),
                }
            }
            "field_gain" => g.field_gain = positive(key, value)?,
            "orbit_sector" => g.orbit_sector = positive(key, value)?,
            "orbit_clearance" => g.orbit_clearance = non_negative(key, value)?,
            "max_deflection" => g.max_deflection = non_negative(key, value)?,
            "wall_d_active" => g.wall_d_active = positive(key, value)?,
            "scene_objects" => {
                let (lo, hi): (usize, usize) = pair(key, value)?;
                self.scenegen.n_objects_range = (lo, hi);
            }
            "scene_min_clearance" => self.scenegen.min_clearance = non_negative(key, value)?,
            "scene_wall_clearance" => self.scenegen.wall_clearance = non_negative(key, value)?,
            "scene_min_goal_distance" => {
                self.scenegen.min_goal_distance = non_negative(key, value)?
            }
            "scene_goal_tolerance" => self.scenegen.goal_tolerance = positive(key, value)?,
            "workspace" => {
                let (w, h): (f64, f64) = pair(key, value)?;
                if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
                    return Err(invalid(key, value));
                }
                self.scenegen.workspace = crate::types::Workspace::new(w, h);
            }
            "workers" => {
                self.workers = match value {
                    "auto" => None,
                    v => Some(positive_count(key, v)?),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: n + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: n + 1 });
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    fn value(&self, key: &str) -> String {
        let p = &self.planner;
        let g = &p.control.gains;
        let f = |v: f64| format!("{v}");
        match key {
            "planner" => p.config.kind.to_string(),
            "samples_K" => p.config.samples_k.to_string(),
            "horizon_H" => p.config.horizon_h.to_string(),
            "weight_range" => format!(
                "{},{}",
                p.config.weight_log_range.0, p.config.weight_log_range.1
            ),
            "seed" => p.config.seed.to_string(),
            "include_nominal" => p.config.include_nominal.to_string(),
            "sample_policy_weights" => p.config.sample_policy_weights.to_string(),
            "sample_field_alphas" => p.config.sample_field_alphas.to_string(),
            "mpc_resample_every" => p.config.mpc_resample_every.to_string(),
            "mpc_obstacle_weight" => f(p.config.mpc_obstacle_weight),
            "mpc_clearance" => f(p.config.mpc_clearance),
            "mpc_reach_weight" => f(p.config.mpc_reach_weight),
            "max_steps" => self.episode.max_steps.to_string(),
            "target_mass_scale" => f(self.episode.target_mass_scale),
            "gamma" => f(p.reward.gamma),
            "angular_weight" => f(p.reward.angular_weight),
            "collision_epsilon" => f(p.reward.collision_epsilon),
            "dt" => f(p.physics.dt),
            "floor_friction" => f(p.physics.floor_friction_mu),
            "contact_friction" => f(p.physics.contact_friction_mu),
            "penetration_tolerance" => f(p.physics.penetration_tolerance),
            "solver_iterations" => p.physics.solver_iterations.to_string(),
            "robot_radius" => f(p.physics.robot_radius),
            "robot_mass" => f(p.physics.robot_mass),
            "v_max" => f(p.physics.limits.v_max),
            "a_max" => f(p.physics.limits.a_max),
            "attractor_gain" => f(g.attractor_gain),
            "attractor_damping" => f(g.attractor_damping),
            "attractor_soft_radius" => f(g.attractor_soft_radius),
            "obstacle_eta" => f(g.obstacle_eta),
            "obstacle_damping" => f(g.obstacle_damping),
            "obstacle_d_min" => f(g.obstacle_d_min),
            "obstacle_metric_cap" => f(g.obstacle_metric_cap),
            "obstacle_d_active" => f(g.obstacle_d_active),
            "approach_margin" => f(g.approach_margin),
            "engage_radius" => g.engage_radius.map_or_else(|| "auto".to_string(), f),
            "field_gain" => f(g.field_gain),
            "orbit_sector" => f(g.orbit_sector),
            "orbit_clearance" => f(g.orbit_clearance),
            "max_deflection" => f(g.max_deflection),
            "wall_d_active" => f(g.wall_d_active),
            "scene_objects" => format!(
                "{},{}",
                self.scenegen.n_objects_range.0, self.scenegen.n_objects_range.1
            ),
            "scene_min_clearance" => f(self.scenegen.min_clearance),
            "scene_wall_clearance" => f(self.scenegen.wall_clearance),
            "scene_min_goal_distance" => f(self.scenegen.min_goal_distance),
            "scene_goal_tolerance" => f(self.scenegen.goal_tolerance),
            "workspace" => format!(
                "{},{}",
                self.scenegen.workspace.width, self.scenegen.workspace.height
            ),
            "workers" => self
                .workers
                .map_or_else(|| "auto".to_string(), |w| w.to_string()),
            other => unreachable!("key `{other}` missing from the value table"),
        }
    }

    /// Every setting as `key = value` lines; reading it back reproduces `self`.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.value(k)))
            .collect()
    }
}
