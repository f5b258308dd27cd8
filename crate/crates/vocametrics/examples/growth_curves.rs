//! Exponential growth fitting on monthly count series.
//!
//! ```bash
//! cargo run --example growth_curves
//! ```

use vocametrics::distfit::fit_growth;
use vocametrics::synthgen::generate_growth_series;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two series shaped like category/article growth curves
    for (name, rate) in [("categories", 0.081), ("articles", 0.065)] {
        let series = generate_growth_series(rate, 24, 50_000)?;
        let fit = fit_growth(&series)?;
        println!(
            "{name:<10} set {:.1}%/month, fitted {:.2}%/month (r^2 = {:.4})",
            rate * 100.0,
            fit.monthly_rate * 100.0,
            fit.r_squared
        );
    }

    // a hand-written series also works: (month, count) pairs
    let flat = [(0u32, 1200u64), (1, 1200), (2, 1200), (3, 1200)];
    let fit = fit_growth(&flat)?;
    println!("constant   fitted {:.2}%/month", fit.monthly_rate * 100.0);
    Ok(())
}
