//! The critical set of the complex phase is the orbit; its Hessian has a
//! closed-form determinant that cancels against the amplitude.

use hydrogen_semiclassics::stationary::{
    check_stationarity, critical_point, hessian_det_closed, hessian_numeric, leading_order_identity,
    tubular_jacobian_closed, tubular_jacobian_numeric,
};
use hydrogen_semiclassics::AlphaFrame;

fn main() -> hydrogen_semiclassics::Result<()> {
    let theta0 = 0.785;
    println!(
        "{:>7} {:>10} {:>14} {:>14} {:>10}",
        "β", "|∇P|", "closed", "numeric", "J"
    );
    for k in 0..8 {
        let beta = -3.0 + 0.75 * k as f64;
        let cp = critical_point(beta, theta0)?;
        let st = check_stationarity(&cp, &AlphaFrame::inclined(theta0))?;
        let h = hessian_numeric(beta, theta0)?;
        println!(
            "{beta:>7.3} {:>10.1e} {:>14.10} {:>14.10} {:>10.6}",
            st.max_gradient(),
            hessian_det_closed(beta, theta0),
            h.sqrt_abs_det,
            tubular_jacobian_numeric(beta, theta0, 0.0)? / tubular_jacobian_closed(beta, theta0),
        );
        let (lhs, rhs) = leading_order_identity(beta, theta0)?;
        assert!((lhs - rhs).abs() < 1e-12);
    }
    // collision orbit: a different chart, same cancellation
    let h = hessian_numeric(0.4, std::f64::consts::FRAC_PI_2)?;
    println!(
        "collision chart {:?}: {:.10} vs {:.10}",
        h.chart,
        h.sqrt_abs_det,
        hessian_det_closed(0.4, std::f64::consts::FRAC_PI_2)
    );
    Ok(())
}
