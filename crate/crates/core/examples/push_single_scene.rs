//! Pushes the target of one generated scene with a chosen planner and
//! prints the progress every few steps.
//!
//! cargo run --release --example push_single_scene -- [planner] [scene_seed]

use rmpc_push::eval::{run_episode, EpisodeConfig};
use rmpc_push::planners::{Planner, PlannerConfig, PlannerKind};
use rmpc_push::scenegen::{generate_scene, SceneGenConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let kind: PlannerKind = args
        .next()
        .map(|a| a.parse().expect("planner name"))
        .unwrap_or(PlannerKind::Rmpc);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);

    let (state, task) = generate_scene(&SceneGenConfig::default().with_seed(seed)).expect("scene");
    let planner = Planner::new(PlannerConfig {
        kind,
        ..Default::default()
    });
    let log = run_episode(
        "example",
        &state,
        &task,
        &planner,
        &EpisodeConfig::default(),
    );

    let target = state.object_index(task.target_id).expect("target present");
    for row in log.rows.iter().step_by(20) {
        let [x, y, _] = row.poses[target];
        let distance = ((x - task.goal.x).powi(2) + (y - task.goal.y).powi(2)).sqrt();
        println!(
            "step {:>3}  robot ({:.3}, {:.3})  target ({x:.3}, {y:.3})  {distance:.3} m to go{}",
            row.step,
            row.robot[0],
            row.robot[1],
            if row.collision { "  bump" } else { "" },
        );
    }
    if let Some(f) = &log.failure {
        println!("planner gave up: {f}");
    }
    println!("{kind}: {}", log.summary_line());
}
