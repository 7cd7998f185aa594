//! Mean curvature of an orbit and the gradient of its log volume.

use nalgebra::DVector;
use orbit_langevin::geometry::{grad_log_orbit_volume, log_orbit_volume, mean_curvature};
use orbit_langevin::group_action::{ActionKind, GroupAction};

fn main() -> orbit_langevin::Result<()> {
    let sphere = GroupAction::new(ActionKind::Rotation, 3)?;
    let x = DVector::from_vec(vec![0.0, 0.0, 2.0]);
    let h = mean_curvature(&sphere, &x)?;
    println!("sphere of radius 2: H = {:?}", h.mean_curvature.as_slice());
    println!("grad log vol      = {:?}", grad_log_orbit_volume(&sphere, &x)?.as_slice());

    let sym = GroupAction::new(ActionKind::ConjugationSymmetric, 2)?;
    // diag(2, −1) in isometric coordinates
    let m = DVector::from_vec(vec![2.0, -1.0, 0.0]);
    let h = mean_curvature(&sym, &m)?;
    let g = grad_log_orbit_volume(&sym, &m)?;
    println!("Sym(2) orbit through diag(2, -1): log vol = {:.6}", log_orbit_volume(&sym, &m)?);
    println!("  H + grad log vol = {:.2e}", (&h.mean_curvature + &g).norm());
    Ok(())
}
