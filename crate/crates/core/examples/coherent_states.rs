//! Coherent states on S³ and in momentum space: norms, the Riesz eigenvalue,
//! and the momentum-space hydrogen equation.

use hydrogen_semiclassics::states::{fock_multiplier, hydrogen_residual, riesz_apply, riesz_eigenvalue};
use hydrogen_semiclassics::{AlphaFrame, MomentumState, SemiclassicalScale, SphericalState, Vec3, Vec4};

fn main() -> hydrogen_semiclassics::Result<()> {
    let frame: AlphaFrame = "e1+ie2".parse()?;
    let u = Vec4::new(0.6, 0.48, 0.0, 0.64);
    for n in [0u32, 1, 2, 4] {
        let phi = SphericalState::new(frame, n);
        let t = riesz_apply(&phi, &u)?;
        let sc = SemiclassicalScale::new(-0.5, n)?;
        let psi = MomentumState::new(frame, sc);
        let samples = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.2, 0.9, 0.3)];
        println!(
            "N={n}: ‖Φ‖²={:.12} ‖FΨ‖²={:.12} TΦ/Φ={:.9} (2π²/(N+1)={:.9}) λTΦ−Φ={:.1e} residual={:.1e}",
            phi.norm_squared(),
            psi.norm_squared(),
            (t.value / phi.eval(&u)?).re,
            riesz_eigenvalue(n),
            (t.value * fock_multiplier(n) - phi.eval(&u)?).norm(),
            hydrogen_residual(&psi, &samples)?,
        );
    }

    // concentration on the hodograph as N grows
    for n in [4u32, 16, 64] {
        let psi = MomentumState::new(frame, SemiclassicalScale::new(-0.5, n)?);
        let on = psi.eval(&Vec3::new(0.0, 1.0, 0.0)).norm_sqr();
        let off = psi.eval(&Vec3::new(0.0, 1.3, 0.0)).norm_sqr();
        println!("N={n:>2}: |FΨ|² on the circle {on:.3e}, 0.3 off it {off:.3e}");
    }
    Ok(())
}
