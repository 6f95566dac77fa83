//! Push a Kepler orbit through the Moser map and watch it land on a great circle.

use hydrogen_semiclassics::geometry::{
    great_circle, hamiltonian, kepler_state, moser_inv, moser_map, symplectic_defect, KeplerOrbit,
};
use hydrogen_semiclassics::{AlphaFrame, SemiclassicalScale};

fn main() -> hydrogen_semiclassics::Result<()> {
    let scale = SemiclassicalScale::new(-0.5, 1)?;
    let frame = AlphaFrame::inclined(0.7);
    let orbit = KeplerOrbit::new(frame, scale);
    println!(
        "period {:.12} (2π/p0³ = {:.12})",
        orbit.period(),
        std::f64::consts::TAU / scale.p0().powi(3)
    );

    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "t", "H", "|u|", "|η|", "dist to γ");
    for k in 0..8 {
        let t = orbit.period() * (k as f64 + 0.5) / 8.0;
        let p = kepler_state(&orbit, t)?;
        let s = moser_map(&p, &scale);
        // the image lies on the great circle through span(Re α, Im α)
        let off_plane = (s.u - frame.projector() * s.u).norm();
        println!(
            "{t:>8.4} {:>10.6} {:>12.9} {:>12.9} {off_plane:>12.2e}",
            hamiltonian(&p)?,
            s.u.norm(),
            s.eta.norm()
        );
        assert!(moser_inv(&s, &scale)?.distance(&p) < 1e-10);
    }

    let p = moser_inv(&great_circle(&frame, 1.0), &scale)?;
    println!(
        "symplectic defect at a point of γ: {:.2e}",
        symplectic_defect(&p, &scale, 1e-5)
    );
    Ok(())
}
