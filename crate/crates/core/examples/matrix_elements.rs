//! One symbol, three quantization routes.

use hydrogen_semiclassics::quantize::OscillatoryForm;
use hydrogen_semiclassics::*;

fn main() -> Result<()> {
    let frame = AlphaFrame::inclined(0.4);
    let sc = SemiclassicalScale::new(-0.5, 8)?;
    let psi = MomentumState::new(frame, sc);
    let a = SymbolSpec::default_radial_bump(sc.p0());

    let exact = matrix_element(&a, &psi, &psi, &QuantizeOptions::default())?;
    println!(
        "multiplier   {:.10} ± {:.1e}  ({} evaluations)",
        exact.value.re, exact.error_estimate, exact.evaluations
    );

    let mc = QuantizeOptions {
        mc_samples: 4096,
        ..QuantizeOptions::default()
    }
    .with_method(Method::MonteCarlo);
    let r = matrix_element(&a, &psi, &psi, &mc)?;
    println!(
        "monte carlo  {:.4} ± {:.1e}  ({:.1}s)",
        r.value.re, r.error_estimate, r.wall_time_s
    );

    // a position-space symbol goes through the position grid
    let b = SymbolSpec::position_ball_bump(Vec3::new(-1.0, 0.0, 0.0), 0.9, 1.0);
    let r = matrix_element(&b, &psi, &psi, &QuantizeOptions::default())?;
    println!("position bump via {:?}: {:.6}", r.method, r.value.re);

    // the complex phase behind the Monte Carlo route
    let form = OscillatoryForm::for_frames(frame, frame, 8, sc.p0());
    let z = form.phase(
        &Vec3::new(0.3, -0.2, 0.1),
        &Vec3::new(0.8, 0.4, 0.0),
        &Vec3::new(0.1, 0.0, 0.2),
    )?;
    println!("P at an off-orbit point: {z:.5} (Im P ≥ 0)");
    Ok(())
}
