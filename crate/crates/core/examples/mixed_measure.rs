//! Superposing coherent states on two orbits realises the convex combination
//! of the two orbit measures.

use hydrogen_semiclassics::experiments::{mixed_measure_study, GeodesicMeasure};
use hydrogen_semiclassics::{AlphaFrame, QuantizeOptions, SemiclassicalScale, SymbolSpec};

fn main() -> hydrogen_semiclassics::Result<()> {
    let f1 = AlphaFrame::basis(1, 2)?;
    let f2 = AlphaFrame::inclined(1.0);
    let sc = SemiclassicalScale::new(-0.5, 1)?;
    // a bump that sees the two orbits differently
    let a = SymbolSpec::momentum_ball_bump(hydrogen_semiclassics::Vec3::new(0.0, 1.0, 0.0), 0.6, 1.0 / 3.0);
    for w in [0.5, 0.9] {
        let m = GeodesicMeasure::new(vec![(w, f1), (1.0 - w, f2)])?;
        let rec = mixed_measure_study(&m, -0.5, &a, &[16, 32, 64], &QuantizeOptions::default())?;
        println!("weights ({w}, {:.1}): predicted {:.6}", 1.0 - w, m.predicted(&a, &sc)?);
        for k in 0..rec.len() {
            println!(
                "  N={:>2} {:.6} error {:.2e}",
                rec.n_values[k], rec.values[k], rec.errors[k]
            );
        }
    }
    Ok(())
}
