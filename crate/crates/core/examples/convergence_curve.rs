//! Records the objective after every sweep, checks it never increases, and writes
//! the curve as CSV and SVG.
//!
//! ```text
//! cargo run --release --example convergence_curve -- out_dir
//! ```

use std::path::PathBuf;

use mfsir::dataset::standardize;
use mfsir::estimator::{fit, MfsirConfig};
use mfsir::experiment::plot::{line_plot_svg, Series};
use mfsir::synthetic::sparse_recovery;

fn main() -> mfsir::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "convergence_demo".into()),
    );
    let data = sparse_recovery(300, 40, 5, 6, 3)?;
    let (d, _) = standardize(&data.dataset);
    let cfg = MfsirConfig {
        eta: 1e-3,
        t_max: 500,
        tol: 1e-12,
        ..MfsirConfig::default()
    };
    let (model, _) = fit(d.x(), &d.y_f64(), &cfg)?;
    let h = &model.objective_history;
    let increases = h.windows(2).filter(|w| w[1] > w[0] + 1e-9).count();
    println!(
        "{} sweeps, converged: {}, objective {:.4} -> {:.4}, increases: {increases}",
        model.iterations_run,
        model.converged,
        h[0],
        model.final_objective()
    );

    model.write_csv(&dir)?;
    let points = h.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
    let svg = line_plot_svg(
        "objective per sweep",
        "iteration",
        "objective",
        &[Series::new("mfsir", points)],
    );
    let svg_path = dir.join("convergence.svg");
    std::fs::write(&svg_path, svg).map_err(|e| mfsir::Error::Io {
        path: svg_path.clone(),
        source: e,
    })?;
    println!("wrote factors, history.csv and {}", svg_path.display());
    Ok(())
}
