//! Transform a coherent state to position space on a grid and look at where
//! the mass sits. Writes `psi.grid` (+ JSON header) to the temp directory.

use hydrogen_semiclassics::geometry::{orbit_average, KeplerOrbit};
use hydrogen_semiclassics::{AlphaFrame, GridSpec, MomentumState, SemiclassicalScale, SymbolSpec};

fn main() -> hydrogen_semiclassics::Result<()> {
    let frame = AlphaFrame::inclined(0.6);
    let n = 24;
    let sc = SemiclassicalScale::new(-0.5, n)?;
    let grid = MomentumState::new(frame, sc).to_position_grid(&GridSpec::default())?;
    println!(
        "shape {:?}, spacing {:.4}, ‖ψ‖² = {:.10}",
        grid.shape,
        grid.spacing[0],
        grid.norm_squared()
    );
    println!("mass in the outer 5% shell of the box: {:.2e}", grid.edge_mass(0.05));

    let orbit = KeplerOrbit::new(frame, sc);
    let mean = grid.mean_position();
    for k in 0..3 {
        let avg = orbit_average(&SymbolSpec::position_coordinate(k), &orbit)?;
        println!(
            "⟨x{}⟩ quantum {:+.5}  classical time average {:+.5}",
            k + 1,
            mean[k],
            avg
        );
    }

    let path = std::env::temp_dir().join("psi.grid");
    let header = grid.write(&path)?;
    println!("wrote {} and {}", path.display(), header.display());
    Ok(())
}
