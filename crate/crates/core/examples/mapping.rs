//! Builds a static point map from odometry and writes CSV and SVG output.
//!
//! cargo run --release --example mapping -- [out_dir]

use radar_egoseg::commands::{cmd_map, Context};
use radar_egoseg::config::RunConfig;
use radar_egoseg::dataset::{Dataset, Sequence};
use radar_egoseg::sim::{simulate_sequence, SceneConfig};

fn main() -> radar_egoseg::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "map_out".into());
    let mut scene = SceneConfig::default();
    scene.duration = 20.0;
    scene.noise_range = 0.0;
    scene.noise_azimuth = 0.0;
    scene.noise_radial_velocity = 0.0;
    let sim = simulate_sequence(&scene, 9)?;
    let data = tempdir();
    Dataset::new(vec![Sequence::new("drive", sim.frames, sim.extrinsics)]).save(&data)?;

    let ctx = Context::new(RunConfig::default(), &out);
    for (name, n) in cmd_map(&ctx, &data, None)? {
        println!("{name}: {n} static points -> {out}/{name}_map.svg");
    }
    std::fs::remove_dir_all(&data).ok();
    Ok(())
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("radar-egoseg-mapping-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}
