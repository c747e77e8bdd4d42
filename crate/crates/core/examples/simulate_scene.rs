//! Simulates one sequence and prints what the frames contain.
//!
//! cargo run --release --example simulate_scene -- [seed] [out.jsonl]

use radar_egoseg::io::write_sequence;
use radar_egoseg::point::validate_sequence;
use radar_egoseg::sim::{simulate_sequence, PointOrigin, SceneConfig};
use radar_egoseg::PointClass;

fn main() -> radar_egoseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let cfg = SceneConfig::default();
    let seq = simulate_sequence(&cfg, seed)?;
    assert!(validate_sequence(&seq.frames).is_empty());

    let (mut landmarks, mut targets, mut clutter) = (0, 0, 0);
    for o in seq.origins.iter().flatten() {
        match o {
            PointOrigin::Landmark(_) => landmarks += 1,
            PointOrigin::Target(_) => targets += 1,
            PointOrigin::Clutter => clutter += 1,
        }
    }
    let mut classes = [0usize; 3];
    for f in &seq.frames {
        for c in &f.gt.as_ref().expect("simulated frames are labeled").class {
            classes[c.code() as usize] += 1;
        }
    }
    let end = seq.poses.last().expect("non-empty");
    println!("{} frames at {} Hz, {} landmarks", seq.frames.len(), cfg.frame_rate, seq.landmarks.len());
    println!("detections: {landmarks} landmark, {targets} target, {clutter} clutter");
    println!(
        "labels: {} {:?}, {} {:?}, {} {:?}",
        classes[0],
        PointClass::Static,
        classes[1],
        PointClass::Moving,
        classes[2],
        PointClass::FalsePositive
    );
    println!("final pose ({:.1}, {:.1}) m, heading {:.1} deg", end.x, end.y, end.heading.to_degrees());

    if let Some(path) = args.next() {
        write_sequence(&path, &seq.frames)?;
        println!("wrote {path}");
    }
    Ok(())
}
