//! Reality suppresses an adversarial Skeptic without ever seeing the future.
//!
//! Reality runs a private surrogate Skeptic (here the combined rate-forcing
//! mixture), blends its move with the actual Skeptic's, and answers the blend
//! coherently.  The actual capital then never exceeds its initial value,
//! while the surrogate's boundedness pins the path inside the event the
//! surrogate forces — a forcing strategy recycled as a deterministic strategy
//! for the opposite player.
//!
//! ```bash
//! cargo run -p gtp --example strong_compliance
//! ```

use gtp::forecaster::RandomForecaster;
use gtp::game::run_game;
use gtp::protocol::ProtocolSpec;
use gtp::reality::{SurrogateComply, SurrogateComplyStrong};
use gtp::skeptic::{force_general_rate, RandomDutySkeptic};
use gtp::GrowthFunction;

fn main() {
    let spec = ProtocolSpec::unbounded();
    let rounds = 20_000;
    let surrogate = || {
        Box::new(force_general_rate(&spec, &GrowthFunction::iterated_log(1), 0.2, 20).unwrap())
            as Box<dyn gtp::game::SkepticStrategy>
    };

    println!("strong compliance, 5 adversarial seeds x {rounds} rounds:");
    for seed in 0..5 {
        let mut reality = SurrogateComplyStrong::new(&spec, surrogate());
        let mut skeptic = RandomDutySkeptic::new(seed);
        let mut forecaster = RandomForecaster::new(&spec, 100 + seed);
        run_game(&spec, &mut forecaster, &mut skeptic, &mut reality, rounds, 1.0).unwrap();
        println!(
            "  seed {seed}: max actual capital {:.15} (bound 1), activation round {:?}",
            reality.max_actual_capital(),
            reality.activation_round()
        );
    }

    println!("\nε-compliance at ε = 0.25 (actual bound 1.25, surrogate bound 5):");
    for seed in 0..5 {
        let mut reality = SurrogateComply::new(&spec, surrogate(), 0.25).unwrap();
        let mut skeptic = RandomDutySkeptic::new(seed);
        let mut forecaster = RandomForecaster::new(&spec, 100 + seed);
        run_game(&spec, &mut forecaster, &mut skeptic, &mut reality, rounds, 1.0).unwrap();
        println!(
            "  seed {seed}: max actual {:.6}, max surrogate {:.6}",
            reality.max_actual_capital(),
            reality.max_surrogate_capital()
        );
    }
}
