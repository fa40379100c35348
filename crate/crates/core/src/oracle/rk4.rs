use super::OracleError;

/// Fixed-step classical Runge-Kutta trajectory, including the start point.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub r: Vec<f64>,
    pub y: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.r.last().unwrap(), *self.y.last().unwrap())
    }
}

/// Integrate `dy/dr = rhs(r, y)` from `r0` to `r1` in `steps` equal steps.
/// `r1 < r0` integrates backward.
pub fn rk4_solve<const N: usize, F>(
    mut rhs: F,
    r0: f64,
    y0: [f64; N],
    r1: f64,
    steps: usize,
) -> Result<Trajectory<N>, OracleError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if steps == 0 {
        return Err(OracleError::Steps);
    }
    let h = (r1 - r0) / steps as f64;
    let mut r_out = Vec::with_capacity(steps + 1);
    let mut y_out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    r_out.push(r0);
    y_out.push(y);
    for i in 0..steps {
        let r = r0 + h * i as f64;
        y = rk4_step(&mut rhs, r, &y, h);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite(r + h));
        }
        let r_next = if i + 1 == steps { r1 } else { r0 + h * (i + 1) as f64 };
        r_out.push(r_next);
        y_out.push(y);
    }
    Ok(Trajectory { r: r_out, y: y_out })
}

/// End state only, without storing the trajectory.
pub fn rk4_endpoint<const N: usize, F>(
    mut rhs: F,
    r0: f64,
    y0: [f64; N],
    r1: f64,
    steps: usize,
) -> Result<[f64; N], OracleError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if steps == 0 {
        return Err(OracleError::Steps);
    }
    let h = (r1 - r0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        y = rk4_step(&mut rhs, r0 + h * i as f64, &y, h);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::NonFinite(r1));
    }
    Ok(y)
}

fn rk4_step<const N: usize, F>(rhs: &mut F, r: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for j in 0..N {
            out[j] += s * k[j];
        }
        out
    };
    let k1 = rhs(r, y);
    let k2 = rhs(r + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = rhs(r + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = rhs(r + h, &axpy(y, &k3, h));
    let mut out = *y;
    for j in 0..N {
        out[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let t = rk4_solve(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, 1000).unwrap();
        let (r, y) = t.last();
        assert_eq!(r, 1.0);
        assert!((y[0] - std::f64::consts::E).abs() < 1e-10);
        assert_eq!(t.r.len(), 1001);
    }

    #[test]
    fn constant() {
        let t = rk4_solve(|_, _: &[f64; 2]| [0.0, 0.0], 2.0, [3.0, -1.0], 0.5, 10).unwrap();
        assert!(t.y.iter().all(|y| *y == [3.0, -1.0]));
        assert_eq!(t.r.last(), Some(&0.5));
    }

    #[test]
    fn backward_integration() {
        // dy/dr = 2r from r = 1 (y = 1) down to r = 0: y = r²
        let y = rk4_endpoint(|r, _: &[f64; 1]| [2.0 * r], 1.0, [1.0], 0.0, 7).unwrap();
        assert!(y[0].abs() < 1e-14);
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(rk4_solve(|_, y: &[f64; 1]| *y, 0.0, [1.0], 1.0, 0).is_err());
    }

    #[test]
    fn blowup_is_reported() {
        let r = rk4_solve(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, 100);
        assert!(matches!(r, Err(OracleError::NonFinite(_))));
    }
}
