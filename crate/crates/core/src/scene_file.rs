//! Line-oriented scene files.
//!
//! ```text
//! # comment
//! workspace <width> <height>
//! robot <x> <y> <theta>
//! task <target_id> <goal_x> <goal_y> <tolerance>
//! <id> disc <radius> <x> <y> <theta> <mass>
//! <id> box <width> <length> <x> <y> <theta> <mass>
//! ```
//!
//! Tokens are separated by whitespace; `#` starts a comment that runs to the
//! end of the line. Header records may appear in any order but each exactly
//! once. Objects keep their file order. The robot starts at rest.
//!
//! Numbers are written with at most 9 significant digits, so a scene whose
//! values are already rounded to 9 digits survives `save` then `load`
//! bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::SceneFileError;
use crate::types::{ObjectState, Pose2, PushTask, RobotState, SceneState, Shape, Vec2, Workspace};

/// Rounds to 9 significant digits.
pub fn round9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

/// Shortest decimal text of `v` rounded to 9 significant digits.
pub fn fmt9(v: f64) -> String {
    let r = round9(v);
    if r == 0.0 {
        // also folds -0
        return "0".to_string();
    }
    format!("{r}")
}

pub fn to_string(state: &SceneState, task: &PushTask) -> String {
    let mut s = String::new();
    let ws = &state.workspace;
    let r = &state.robot.pose;
    let _ = writeln!(s, "workspace {} {}", fmt9(ws.width), fmt9(ws.height));
    let _ = writeln!(s, "robot {} {} {}", fmt9(r.x), fmt9(r.y), fmt9(r.theta));
    let _ = writeln!(
        s,
        "task {} {} {} {}",
        task.target_id,
        fmt9(task.goal.x),
        fmt9(task.goal.y),
        fmt9(task.goal_tolerance)
    );
    for o in &state.objects {
        let dims = match o.shape {
            Shape::Disc { radius } => format!("disc {}", fmt9(radius)),
            Shape::Box { width, length } => format!("box {} {}", fmt9(width), fmt9(length)),
        };
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            o.id,
            dims,
            fmt9(o.pose.x),
            fmt9(o.pose.y),
            fmt9(o.pose.theta),
            fmt9(o.mass)
        );
    }
    s
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in body
        .char_indices()
        .chain(std::iter::once((body.len(), ' ')))
    {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &body[s..i],
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

struct LineParser<'a> {
    line: usize,
    end_column: usize,
    tokens: Vec<Token<'a>>,
}

impl LineParser<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> SceneFileError {
        SceneFileError::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn expect_len(&self, n: usize, what: &str) -> Result<(), SceneFileError> {
        match self.tokens.len() {
            len if len == n => Ok(()),
            len if len < n => Err(self.error(
                self.end_column,
                format!("{what}: expected {n} fields, found {len}"),
            )),
            _ => Err(self.error(
                self.tokens[n].column,
                format!("{what}: unexpected trailing field"),
            )),
        }
    }

    fn number(&self, i: usize) -> Result<f64, SceneFileError> {
        let t = &self.tokens[i];
        match t.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(
                t.column,
                format!("expected a finite number, found `{}`", t.text),
            )),
        }
    }

    fn id(&self, i: usize) -> Result<u32, SceneFileError> {
        let t = &self.tokens[i];
        t.text.parse::<u32>().map_err(|_| {
            self.error(
                t.column,
                format!("expected an object id, found `{}`", t.text),
            )
        })
    }
}

pub fn parse(text: &str) -> Result<(SceneState, PushTask), SceneFileError> {
    let mut workspace: Option<Workspace> = None;
    let mut robot: Option<RobotState> = None;
    let mut task: Option<PushTask> = None;
    let mut objects = Vec::new();
    let mut any_record = false;

    for (n, raw) in text.lines().enumerate() {
        let p = LineParser {
            line: n + 1,
            end_column: raw.split('#').next().unwrap_or("").trim_end().len() + 1,
            tokens: tokenize(raw),
        };
        let Some(head) = p.tokens.first() else {
            continue;
        };
        any_record = true;
        let duplicate = |what: &str| p.error(1, format!("duplicate `{what}` record"));
        match head.text {
            "workspace" => {
                p.expect_len(3, "workspace")?;
                if workspace.is_some() {
                    return Err(duplicate("workspace"));
                }
                workspace = Some(Workspace::new(p.number(1)?, p.number(2)?));
            }
            "robot" => {
                p.expect_len(4, "robot")?;
                if robot.is_some() {
                    return Err(duplicate("robot"));
                }
                robot = Some(RobotState {
                    pose: Pose2::new(p.number(1)?, p.number(2)?, p.number(3)?),
                    velocity: Vec2::zeros(),
                });
            }
            "task" => {
                p.expect_len(5, "task")?;
                if task.is_some() {
                    return Err(duplicate("task"));
                }
                task = Some(PushTask {
                    target_id: p.id(1)?,
                    goal: Vec2::new(p.number(2)?, p.number(3)?),
                    goal_tolerance: p.number(4)?,
                });
            }
            _ => {
                let id = p.id(0)?;
                let Some(kind) = p.tokens.get(1) else {
                    return Err(p.error(p.end_column, "object: missing shape kind"));
                };
                let (shape, rest) = match kind.text {
                    "disc" => {
                        p.expect_len(7, "disc")?;
                        (
                            Shape::Disc {
                                radius: p.number(2)?,
                            },
                            3,
                        )
                    }
                    "box" => {
                        p.expect_len(8, "box")?;
                        (
                            Shape::Box {
                                width: p.number(2)?,
                                length: p.number(3)?,
                            },
                            4,
                        )
                    }
                    other => {
                        return Err(p.error(kind.column, format!("unknown shape kind `{other}`")))
                    }
                };
                let pose = Pose2::new(p.number(rest)?, p.number(rest + 1)?, p.number(rest + 2)?);
                objects.push(ObjectState::new(id, shape, pose, p.number(rest + 3)?));
            }
        }
    }

    if !any_record {
        return Err(SceneFileError::Parse {
            line: 1,
            column: 1,
            message: "empty scene file".into(),
        });
    }
    let state = SceneState {
        objects,
        robot: robot.ok_or(SceneFileError::MissingRecord("robot"))?,
        time: 0.0,
        workspace: workspace.ok_or(SceneFileError::MissingRecord("workspace"))?,
    };
    let task = task.ok_or(SceneFileError::MissingRecord("task"))?;
    state.validate()?;
    task.validate(&state)?;
    Ok((state, task))
}

pub fn save(state: &SceneState, task: &PushTask, path: &Path) -> Result<(), SceneFileError> {
    std::fs::write(path, to_string(state, task))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(SceneState, PushTask), SceneFileError> {
    parse(&std::fs::read_to_string(path)?)
}
