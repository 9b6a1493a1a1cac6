//! Open-loop versus closed-loop pushing when the real target is heavier
//! than the model believes.
//!
//! cargo run --release --example open_loop_perturbation -- [scenes] [mass_scale]

use rmpc_push::eval::{compare_planners, default_k_grid, generate_batch, EpisodeConfig};
use rmpc_push::planners::{Planner, PlannerConfig, PlannerKind};
use rmpc_push::scenegen::SceneGenConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let scale: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let scenes = generate_batch(&SceneGenConfig::default(), n).expect("scene batch");
    let base = Planner::new(PlannerConfig::default());
    let planners = [
        base.with_kind(PlannerKind::OpenLoop),
        base.with_kind(PlannerKind::Rmpc),
    ];
    for s in [1.0, scale] {
        let episode = EpisodeConfig {
            target_mass_scale: s,
            ..Default::default()
        };
        let c =
            compare_planners(&scenes, &planners, &episode, &default_k_grid()).expect("comparison");
        for p in &c.summaries {
            println!(
                "mass x{s:<4} {:<9} mean final distance {:.3} m  success {:.2}  planner failures {}",
                p.planner.name(),
                p.mean_final_distance,
                p.success_rate,
                p.planner_failures
            );
        }
    }
}
