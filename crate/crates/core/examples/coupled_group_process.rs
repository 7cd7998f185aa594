//! Joint state and group process; the image `g·X` keeps `g` orthogonal.

use nalgebra::DVector;
use orbit_langevin::group_action::{ActionKind, GroupAction};
use orbit_langevin::linalg::orthogonality_defect;
use orbit_langevin::sde::{integrate, make_coupled_system, CoupledBase, Potential, PotentialSpec, SdeSystem};

fn main() -> orbit_langevin::Result<()> {
    let action = GroupAction::new(ActionKind::Rotation, 3)?;
    let spec = PotentialSpec::beta_dip(&action, Potential::Quadratic { a: 1.0 }, 1.0, 0.5, 0.8, 2.5)?;
    for base in [CoupledBase::Projected, CoupledBase::Isotropic] {
        let system = make_coupled_system(&action, &spec, base);
        let s0 = system.initial_state(&DVector::from_vec(vec![1.2, 0.3, -0.4]));
        let traj = integrate(&system, &s0, 1e-3, 1.0, 17)?;
        let last = traj.states.last().expect("nonempty");
        let (x, g) = system.split(last);
        println!(
            "{base:?}: |X| = {:.4}, |g X| = {:.4}, orthogonality defect {:.2e}",
            x.norm(),
            system.image(last).norm(),
            orthogonality_defect(&g)
        );
    }
    Ok(())
}
