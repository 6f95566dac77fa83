//! A slice of the Wigner function at a point of the orbit, printed along a line
//! through the orbit's momentum.

use hydrogen_semiclassics::quantize::{wigner_slice, XiGrid};
use hydrogen_semiclassics::*;

fn main() -> Result<()> {
    let frame = AlphaFrame::basis(1, 2)?;
    let sc = SemiclassicalScale::new(-0.5, 6)?;
    let psi = MomentumState::new(frame, sc);
    // (x, ξ) = ((0, −1, 0), (1, 0, 0)) lies on the orbit
    let x = Vec3::new(0.0, -1.0, 0.0);
    let grid = XiGrid::centered(3.0, 128);
    let w = wigner_slice(&psi, &psi, &x, &grid, &QuantizeOptions::default())?;
    let max_im = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    println!("max |Im W| = {max_im:.1e}");
    let (j, k) = (grid.n / 2, grid.n / 2);
    for i in (0..grid.n).step_by(8) {
        let xi = grid.point(i, j, k);
        let v = w[(i * grid.n + j) * grid.n + k].re;
        println!("ξ1 = {:+.3}  W = {v:+.4e}", xi[0]);
    }
    Ok(())
}
