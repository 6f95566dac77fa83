//! Cross terms between coherent states on different orbits die off faster
//! than any power of N.

use hydrogen_semiclassics::experiments::cross_decay_study;
use hydrogen_semiclassics::{AlphaFrame, QuantizeOptions, SymbolSpec};

fn main() -> hydrogen_semiclassics::Result<()> {
    let a = SymbolSpec::default_radial_bump(1.0);
    let alpha = AlphaFrame::basis(1, 2)?;
    for (name, beta) in [
        ("e1+ie3", AlphaFrame::basis(1, 3)?),
        ("conjugate", alpha.conj()),
        ("theta0:0.5", AlphaFrame::inclined(0.5)),
    ] {
        let rec = cross_decay_study(&alpha, &beta, -0.5, &a, &[8, 16, 32], &QuantizeOptions::default())?;
        println!(
            "{name:>10}: |m| = {:?}",
            rec.values.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        );
        println!(
            "{:>10}  ratios {:?}, superpolynomial: {:?}",
            "",
            rec.ratios.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>(),
            rec.superpolynomial
        );
    }
    // rotating the phase of α does not give a new orbit
    assert!(cross_decay_study(
        &alpha,
        &alpha.phase_rotated(0.3),
        -0.5,
        &a,
        &[8],
        &QuantizeOptions::default()
    )
    .is_err());
    Ok(())
}
