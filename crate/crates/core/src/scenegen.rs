//! Seeded random scenes: non-overlapping objects drawn from a small shape
//! catalog, a uniformly chosen target and a reachable goal.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{SceneFileError, SceneGenError};
use crate::scene_file::{self, round9};
use crate::types::{ObjectState, Pose2, PushTask, RobotState, SceneState, Shape, Vec2, Workspace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub shape: Shape,
    pub mass: f64,
}

/// Tabletop footprints with mean extents from 4 to 12 cm.
pub const DEFAULT_CATALOG: [CatalogEntry; 8] = [
    CatalogEntry {
        name: "small_ball",
        shape: Shape::Disc { radius: 0.02 },
        mass: 0.06,
    },
    CatalogEntry {
        name: "tuna_can",
        shape: Shape::Disc { radius: 0.0325 },
        mass: 0.17,
    },
    CatalogEntry {
        name: "mug",
        shape: Shape::Disc { radius: 0.045 },
        mass: 0.3,
    },
    CatalogEntry {
        name: "bowl",
        shape: Shape::Disc { radius: 0.06 },
        mass: 0.45,
    },
    CatalogEntry {
        name: "jello_box",
        shape: Shape::Box {
            width: 0.04,
            length: 0.05,
        },
        mass: 0.1,
    },
    CatalogEntry {
        name: "sugar_box",
        shape: Shape::Box {
            width: 0.05,
            length: 0.09,
        },
        mass: 0.25,
    },
    CatalogEntry {
        name: "cracker_box",
        shape: Shape::Box {
            width: 0.07,
            length: 0.11,
        },
        mass: 0.4,
    },
    CatalogEntry {
        name: "wood_block",
        shape: Shape::Box {
            width: 0.09,
            length: 0.15,
        },
        mass: 0.6,
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGenConfig {
    /// Inclusive object-count bounds.
    pub n_objects_range: (usize, usize),
    pub catalog: Vec<CatalogEntry>,
    pub workspace: Workspace,
    /// Minimum gap between bounding circles of any two bodies.
    pub min_clearance: f64,
    /// Minimum gap between an object's bounding circle and the walls.
    pub wall_clearance: f64,
    pub robot_radius: f64,
    pub min_goal_distance: f64,
    pub goal_tolerance: f64,
    pub seed: u64,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        Self {
            n_objects_range: (6, 10),
            catalog: DEFAULT_CATALOG.to_vec(),
            workspace: Workspace::default(),
            min_clearance: 0.02,
            wall_clearance: 0.15,
            robot_radius: 0.05,
            min_goal_distance: 0.3,
            goal_tolerance: 0.05,
            seed: 0,
        }
    }
}

pub const REJECTION_BUDGET: usize = 10_000;

impl SceneGenConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SceneGenError> {
        let (lo, hi) = self.n_objects_range;
        let problem = if lo < 2 || lo > hi {
            Some("n_objects_range must satisfy 2 <= min <= max")
        } else if self.catalog.is_empty() {
            Some("shape catalog is empty")
        } else if !(self.min_clearance >= 0.0 && self.wall_clearance >= self.min_clearance) {
            Some("clearances must satisfy 0 <= min_clearance <= wall_clearance")
        } else if !(self.workspace.width > 0.0 && self.workspace.height > 0.0) {
            Some("workspace dimensions must be positive")
        } else if !(self.goal_tolerance > 0.0
            && self.min_goal_distance >= 0.0
            && self.robot_radius > 0.0)
        {
            Some("goal tolerance and robot radius must be positive")
        } else {
            None
        };
        match problem {
            Some(p) => Err(SceneGenError::InvalidConfig(p.to_string())),
            None => Ok(()),
        }
    }
}

struct Placed {
    center: Vec2,
    radius: f64,
}

fn sample_point(rng: &mut ChaCha8Rng, ws: &Workspace, margin: f64) -> Option<Vec2> {
    let (w, h) = (ws.width - 2.0 * margin, ws.height - 2.0 * margin);
    if w < 0.0 || h < 0.0 {
        return None;
    }
    let x: f64 = rng.random();
    let y: f64 = rng.random();
    Some(Vec2::new(round9(margin + x * w), round9(margin + y * h)))
}

fn clear_of(placed: &[Placed], c: Vec2, r: f64, gap: f64) -> bool {
    placed
        .iter()
        .all(|p| (p.center - c).norm() - p.radius - r >= gap)
}

pub fn generate_scene(cfg: &SceneGenConfig) -> Result<(SceneState, PushTask), SceneGenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ws = cfg.workspace;
    let n = rng.random_range(cfg.n_objects_range.0..=cfg.n_objects_range.1);
    let mut budget = REJECTION_BUDGET;
    let mut placed: Vec<Placed> = Vec::with_capacity(n + 1);
    let mut objects = Vec::with_capacity(n);

    for id in 1..=n as u32 {
        let entry = cfg.catalog[rng.random_range(0..cfg.catalog.len())];
        let radius = entry.shape.bounding_radius();
        let theta = round9(rng.random_range(-PI..PI));
        let center = loop {
            if budget == 0 {
                return Err(SceneGenError::Crowded {
                    what: format!("object {id}"),
                });
            }
            budget -= 1;
            match sample_point(&mut rng, &ws, radius + cfg.wall_clearance) {
                Some(c) if clear_of(&placed, c, radius, cfg.min_clearance) => break c,
                Some(_) => {}
                None => {
                    return Err(SceneGenError::Crowded {
                        what: format!("object {id}"),
                    })
                }
            }
        };
        placed.push(Placed { center, radius });
        objects.push(ObjectState::new(
            id,
            entry.shape,
            Pose2::new(center.x, center.y, theta),
            entry.mass,
        ));
    }

    let robot = loop {
        if budget == 0 {
            return Err(SceneGenError::Crowded {
                what: "robot".into(),
            });
        }
        budget -= 1;
        let c =
            sample_point(&mut rng, &ws, cfg.robot_radius + cfg.min_clearance).ok_or_else(|| {
                SceneGenError::Crowded {
                    what: "robot".into(),
                }
            })?;
        if clear_of(&placed, c, cfg.robot_radius, cfg.min_clearance) {
            break RobotState::at(c.x, c.y);
        }
    };

    let target_index = rng.random_range(0..objects.len());
    let target = &objects[target_index];
    let half = 0.5 * target.mean_extent();
    let margin = target.shape.bounding_radius() + cfg.wall_clearance;
    let others: Vec<Placed> = placed
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_index)
        .map(|(_, p)| Placed {
            center: p.center,
            radius: p.radius,
        })
        .collect();
    let goal = loop {
        if budget == 0 {
            return Err(SceneGenError::Crowded {
                what: "goal".into(),
            });
        }
        budget -= 1;
        let g = sample_point(&mut rng, &ws, margin).ok_or_else(|| SceneGenError::Crowded {
            what: "goal".into(),
        })?;
        if (g - target.position()).norm() >= cfg.min_goal_distance
            && clear_of(&others, g, 0.0, half)
        {
            break g;
        }
    };

    let task = PushTask {
        target_id: target.id,
        goal,
        goal_tolerance: round9(cfg.goal_tolerance),
    };
    let state = SceneState {
        objects,
        robot,
        time: 0.0,
        workspace: ws,
    };
    Ok((state, task))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub scene_id: String,
    pub seed: u64,
    pub path: PathBuf,
}

/// Scene `i` of a batch uses seed `base_seed + i`.
pub fn batch_seeds(base_seed: u64, n: usize) -> impl Iterator<Item = (usize, u64)> {
    (0..n).map(move |i| (i, base_seed.wrapping_add(i as u64)))
}

pub fn scene_id(index: usize) -> String {
    format!("scene_{index:05}")
}

/// Writes `n` scene files and `manifest.txt` into `dir`. Manifest lines are
/// `<scene_id> <seed> <file name>`.
pub fn write_batch(cfg: &SceneGenConfig, n: usize, dir: &Path) -> Result<PathBuf, BatchError> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (i, seed) in batch_seeds(cfg.seed, n) {
        let (state, task) = generate_scene(&cfg.with_seed(seed))?;
        let id = scene_id(i);
        let file = format!("{id}.txt");
        scene_file::save(&state, &task, &dir.join(&file))?;
        let _ = writeln!(manifest, "{id} {seed} {file}");
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest)?;
    Ok(path)
}

/// Reads a manifest; relative scene paths resolve against its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, BatchError> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || BatchError::Manifest { line: n + 1 };
        if fields.len() != 3 {
            return Err(bad());
        }
        let seed = fields[1].parse().map_err(|_| bad())?;
        out.push(ManifestEntry {
            scene_id: fields[0].to_string(),
            seed,
            path: base.join(fields[2]),
        });
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error(transparent)]
    Generate(#[from] SceneGenError),
    #[error(transparent)]
    SceneFile(#[from] SceneFileError),
    #[error("manifest line {line}: expected `<scene_id> <seed> <path>`")]
    Manifest { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
