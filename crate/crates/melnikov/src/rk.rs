//! Minimal embedded Runge–Kutta stepping for planar fields.
//!
//! Dormand–Prince 5(4) with standard step control; enough for tracing level
//! curves and integrating the perturbed flow at tolerances around 1e−12.

/// One adaptive step attempt. Returns `(y_new, err_estimate)` for step `h`.
pub(crate) fn dopri5_step<F>(rhs: &F, y: [f64; 2], h: f64) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // 4th-order weights for the embedded error estimate.
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let ax = |a: [f64; 2], c: f64, b: [f64; 2]| [a[0] + c * b[0], a[1] + c * b[1]];

    let k1 = rhs(y);
    let k2 = rhs(ax(y, h * A21, k1));
    let k3 = rhs(ax(ax(y, h * A31, k1), h * A32, k2));
    let k4 = rhs(ax(ax(ax(y, h * A41, k1), h * A42, k2), h * A43, k3));
    let k5 = rhs(ax(ax(ax(ax(y, h * A51, k1), h * A52, k2), h * A53, k3), h * A54, k4));
    let k6 = rhs(ax(
        ax(ax(ax(ax(y, h * A61, k1), h * A62, k2), h * A63, k3), h * A64, k4),
        h * A65,
        k5,
    ));
    let mut y5 = y;
    for i in 0..2 {
        y5[i] += h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = rhs(y5);
    let mut err = 0.0f64;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        err = err.max(e.abs());
    }
    (y5, err)
}

/// Classical fixed-step RK4, used for resampling once the period is known.
pub(crate) fn rk4_step<F>(rhs: &F, y: [f64; 2], h: f64) -> [f64; 2]
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let k1 = rhs(y);
    let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Adaptive integrator driving [`dopri5_step`]; calls `observe` after every
/// accepted step with `(time, state)` and stops when it returns `false` or
/// the time budget runs out. Returns the time reached.
pub(crate) fn integrate_adaptive<F, O>(
    rhs: &F,
    y0: [f64; 2],
    t_max: f64,
    tol: f64,
    h_max: f64,
    observe: &mut O,
) -> f64
where
    F: Fn([f64; 2]) -> [f64; 2],
    O: FnMut(f64, [f64; 2], f64) -> bool,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (h_max * 0.1).min(t_max);
    while t < t_max {
        h = h.min(t_max - t).min(h_max);
        let (y_new, err) = dopri5_step(rhs, y, h);
        let scale = tol.max(1e-300);
        if err <= scale {
            t += h;
            y = y_new;
            let keep_going = observe(t, y, h);
            let factor = if err > 0.0 { 0.9 * (scale / err).powf(0.2) } else { 5.0 };
            h *= factor.clamp(0.2, 5.0);
            if !keep_going {
                return t;
            }
        } else {
            let factor = 0.9 * (scale / err).powf(0.2);
            h *= factor.clamp(0.1, 0.9);
            if h < 1e-15 {
                return t;
            }
        }
    }
    t
}
