//! Estimates as the penalty exponent grows, warm-started along a log grid.
//! Larger exponents shrink harder towards equal abilities and raise the
//! information determinant.
//!
//! ```text
//! cargo run --example coefficient_path
//! ```

use jeffreys_glm::design::{bt_design, load_contests_csv};
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::mle::FitConfig;
use jeffreys_glm::path::{fit_path, log_grid};
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tournament8.csv");
    let data = bt_design(&load_contests_csv(path)?, "Team A")?;
    let grid = log_grid(0.01, 5.0, 12)?;
    let result = fit_path(&data, LinkFamily::Logit, &grid, &FitConfig::default())?;

    print!("{:>8} {:>10}", "a", "logdet");
    for name in &result.coef_names {
        print!(" {:>8}", name.trim_start_matches("Team "));
    }
    println!();
    for point in &result.points {
        print!("{:>8.4} {:>10.4}", point.a, point.logdet);
        for b in &point.beta {
            print!(" {b:>8.3}");
        }
        println!("{}", if point.converged { "" } else { "  (not converged)" });
    }
    Ok(())
}
