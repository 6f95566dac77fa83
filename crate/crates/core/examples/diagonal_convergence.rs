//! Diagonal matrix elements of a momentum bump approach its orbit average at
//! rate 1/N. Writes `converge.csv` to the temp directory.

use hydrogen_semiclassics::experiments::{theorem1_study, write_csv};
use hydrogen_semiclassics::{AlphaFrame, QuantizeOptions, SymbolSpec};

fn main() -> hydrogen_semiclassics::Result<()> {
    let a = SymbolSpec::default_radial_bump(1.0);
    let rec = theorem1_study(
        &AlphaFrame::basis(1, 2)?,
        -0.5,
        &a,
        &[8, 16, 32, 64],
        &QuantizeOptions::default(),
    )?;
    println!("orbit average {:.10}", rec.predicted);
    for k in 0..rec.len() {
        println!(
            "N={:>2}  {:.10}  error {:.3e}  N·error {:.4}",
            rec.n_values[k],
            rec.values[k],
            rec.errors[k],
            rec.n_values[k] as f64 * rec.errors[k]
        );
    }
    println!("fitted rate {:.3}", rec.rate.unwrap_or(f64::NAN));
    let path = std::env::temp_dir().join("converge.csv");
    write_csv(&path, &rec)?;
    println!("wrote {}", path.display());
    Ok(())
}
