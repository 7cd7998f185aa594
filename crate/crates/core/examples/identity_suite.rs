//! Geometric identity residuals for every supported action.

use orbit_langevin::identities::{default_suite_actions, run_identity_suite};

fn main() -> orbit_langevin::Result<()> {
    let report = run_identity_suite(&default_suite_actions(), 20, 11)?;
    for r in &report.residuals {
        println!("{:<40} {:<16} d={} {:.2e} (tol {:.0e})", r.identity, r.action, r.matrix_dim, r.max_residual, r.tolerance);
    }
    println!("all passed: {}", report.passed);
    Ok(())
}
