//! Drives the robot into a row of objects, writes the trajectory CSV and
//! replays it to show that the simulation is bit-exact.
//!
//! cargo run --example physics_replay

use rmpc_push::eval::{replay_text, run_episode, EpisodeConfig};
use rmpc_push::physics::{max_penetration, PhysicsConfig};
use rmpc_push::planners::{Planner, PlannerConfig, PlannerKind};
use rmpc_push::scene_file;

const SCENE: &str = "\
workspace 2 2
robot 0.3 1 0
task 1 1.4 1 0.05
1 disc 0.04 0.6 1 0 0.3
2 box 0.06 0.1 0.75 1.02 0.4 0.25
3 disc 0.045 0.9 0.97 0 0.3
";

fn main() {
    let (state, task) = scene_file::parse(SCENE).expect("scene parses");
    let planner = Planner::new(PlannerConfig {
        kind: PlannerKind::Direct,
        ..Default::default()
    });
    let log = run_episode("row", &state, &task, &planner, &EpisodeConfig::default());
    let csv = log.trajectory_csv();
    println!("{}", log.summary_line());
    println!("trajectory: {} rows, {} bytes", log.rows.len(), csv.len());

    let physics = PhysicsConfig::default();
    println!(
        "replay: {:?}",
        replay_text(&state, &task, &csv, &physics).expect("csv parses")
    );
    println!(
        "initial max penetration {:.2e} m",
        max_penetration(&state, &physics)
    );

    // Any change to a logged action shows up as a divergence at that step.
    let tampered: String = csv
        .lines()
        .map(|l| {
            if l.starts_with("5,") {
                l.replacen(",0,", ",0.001,", 1)
            } else {
                l.to_string()
            }
        })
        .map(|l| l + "\n")
        .collect();
    println!(
        "tampered replay: {:?}",
        replay_text(&state, &task, &tampered, &physics).expect("csv parses")
    );
}
