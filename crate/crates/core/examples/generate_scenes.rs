//! Generates a seeded batch of scene files plus a manifest and prints a
//! short description of each scene.
//!
//! cargo run --example generate_scenes -- [count] [seed] [out_dir]

use std::path::PathBuf;

use rmpc_push::scene_file;
use rmpc_push::scenegen::{read_manifest, write_batch, SceneGenConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rmpc_push_scenes"));

    let cfg = SceneGenConfig::default().with_seed(seed);
    let manifest = write_batch(&cfg, n, &out).expect("batch written");
    println!("manifest: {}", manifest.display());
    for entry in read_manifest(&manifest).expect("manifest reads back") {
        let (state, task) = scene_file::load(&entry.path).expect("scene parses");
        let target = state.object(task.target_id).expect("target present");
        println!(
            "{} seed {:>3}: {} objects, target {} ({}) {:.2} m from its goal",
            entry.scene_id,
            entry.seed,
            state.objects.len(),
            task.target_id,
            target.shape.kind(),
            task.target_distance(&state),
        );
    }
}
