//! Per-step trajectory dump.
//!
//! ```text
//! # key=value            (zero or more comment lines echoing the run configuration)
//! step,t,robot_x,robot_y,v_x,v_y,cmd_v_x,cmd_v_y,a_x,a_y,reward,collision,o<id>_x,o<id>_y,o<id>_theta,...
//! 0,<initial state>,0,0,0,0,0,0
//! 1,<state after action 1>,<action 1>,<reward>,<0|1>
//! ```
//!
//! Row 0 is the initial state. Row k holds the action applied at step k and
//! the state it produced. Floats use Rust's shortest round-trip formatting, so
//! parsing a row recovers the exact `f64` bits.

use std::fmt::Write as _;

use crate::types::{RobotAction, SceneState, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub time: f64,
    pub robot: [f64; 4],
    pub action: RobotAction,
    pub reward: f64,
    pub collision: bool,
    /// (x, y, theta) per object in scene order.
    pub poses: Vec<[f64; 3]>,
}

impl TrajectoryRow {
    pub fn from_state(
        step: usize,
        state: &SceneState,
        action: RobotAction,
        reward: f64,
        collision: bool,
    ) -> Self {
        Self {
            step,
            time: state.time,
            robot: [
                state.robot.pose.x,
                state.robot.pose.y,
                state.robot.velocity.x,
                state.robot.velocity.y,
            ],
            action,
            reward,
            collision,
            poses: state
                .objects
                .iter()
                .map(|o| [o.pose.x, o.pose.y, o.pose.theta])
                .collect(),
        }
    }

    /// True when the kinematic columns (time, robot, object poses) are bit-identical.
    pub fn same_state(&self, other: &TrajectoryRow) -> bool {
        let bits = |v: f64| v.to_bits();
        bits(self.time) == bits(other.time)
            && self
                .robot
                .iter()
                .map(|&v| bits(v))
                .eq(other.robot.iter().map(|&v| bits(v)))
            && self.poses.len() == other.poses.len()
            && self.poses.iter().flatten().map(|&v| bits(v)).eq(other
                .poses
                .iter()
                .flatten()
                .map(|&v| bits(v)))
    }
}

pub fn header(object_ids: &[u32]) -> String {
    let mut h =
        String::from("step,t,robot_x,robot_y,v_x,v_y,cmd_v_x,cmd_v_y,a_x,a_y,reward,collision");
    for id in object_ids {
        let _ = write!(h, ",o{id}_x,o{id}_y,o{id}_theta");
    }
    h
}

pub fn write_csv(meta: &[(String, String)], object_ids: &[u32], rows: &[TrajectoryRow]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(&header(object_ids));
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.time,
            r.robot[0],
            r.robot[1],
            r.robot[2],
            r.robot[3],
            r.action.velocity.x,
            r.action.velocity.y,
            r.action.acceleration.x,
            r.action.acceleration.y,
            r.reward,
            u8::from(r.collision)
        );
        for p in &r.poses {
            let _ = write!(out, ",{},{},{}", p[0], p[1], p[2]);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub meta: Vec<(String, String)>,
    pub object_ids: Vec<u32>,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_csv(text: &str) -> Result<Trajectory, String> {
    let mut meta = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut object_ids = None;
    for (n, line) in lines.by_ref() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| format!("line {}: malformed comment", n + 1))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 12 || cols[0] != "step" || !(cols.len() - 12).is_multiple_of(3) {
            return Err(format!("line {}: malformed header", n + 1));
        }
        let ids = cols[12..]
            .chunks(3)
            .map(|c| {
                c[0].strip_prefix('o')
                    .and_then(|s| s.strip_suffix("_x"))
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| format!("line {}: bad object column `{}`", n + 1, c[0]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        object_ids = Some(ids);
        break;
    }
    let object_ids = object_ids.ok_or("missing header line")?;
    let width = 12 + 3 * object_ids.len();
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width {
            return Err(format!("line {}: expected {width} columns", n + 1));
        }
        let f = |i: usize| -> Result<f64, String> {
            cols[i]
                .parse::<f64>()
                .map_err(|_| format!("line {}: bad number `{}`", n + 1, cols[i]))
        };
        let step = cols[0]
            .parse::<usize>()
            .map_err(|_| format!("line {}: bad step", n + 1))?;
        let poses = (0..object_ids.len())
            .map(|k| Ok([f(12 + 3 * k)?, f(13 + 3 * k)?, f(14 + 3 * k)?]))
            .collect::<Result<Vec<_>, String>>()?;
        rows.push(TrajectoryRow {
            step,
            time: f(1)?,
            robot: [f(2)?, f(3)?, f(4)?, f(5)?],
            action: RobotAction::new(Vec2::new(f(6)?, f(7)?), Vec2::new(f(8)?, f(9)?)),
            reward: f(10)?,
            collision: cols[11] == "1",
            poses,
        });
    }
    Ok(Trajectory {
        meta,
        object_ids,
        rows,
    })
}
