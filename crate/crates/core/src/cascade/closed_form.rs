use crate::cascade::generator::EffectiveGenerator;
use crate::error::{Error, Result};
use crate::operator::{c, Operator};

pub const MAX_CLOSED_FORM_ORDER: usize = 3;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Component of the state reached after exactly `order` energy-lowering jumps,
/// from the nested-integral representation
///
/// `rho_j(t) = int_0^t ds U(t - s) J(rho_{j-1}(s)) U(t - s)^dagger`,
/// `rho_0(t) = U(t) rho_top U(t)^dagger`,
///
/// with `U(t) = exp(-iBt)` and each simplex integral done by Gauss-Legendre
/// quadrature with `quad_order` nodes. For a start inside one sector of a
/// ladder this is the block `order` sectors below the start.
pub fn closed_form_block(
    rho_top: &Operator,
    generator: &EffectiveGenerator,
    order: usize,
    t: f64,
    quad_order: usize,
) -> Result<Operator> {
    if order > MAX_CLOSED_FORM_ORDER {
        return Err(Error::ClosedFormTooDeep {
            order,
            cost: (quad_order.max(1) as f64).powi(order as i32),
            max: MAX_CLOSED_FORM_ORDER,
        });
    }
    if quad_order == 0 || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(
            "closed form needs quad_order >= 1 and finite t >= 0".into(),
        ));
    }
    if rho_top.nrows() != generator.dim() || rho_top.ncols() != generator.dim() {
        return Err(Error::Dimension("state does not match the generator".into()));
    }
    let (x, w) = gauss_legendre(quad_order);
    nested(rho_top, generator, order, t, &x, &w)
}

fn nested(
    rho_top: &Operator,
    generator: &EffectiveGenerator,
    order: usize,
    t: f64,
    x: &[f64],
    w: &[f64],
) -> Result<Operator> {
    if order == 0 {
        return generator.deterministic(rho_top, t);
    }
    let half = 0.5 * t;
    let mut acc = Operator::zeros(rho_top.nrows(), rho_top.ncols());
    if t == 0.0 {
        return Ok(acc);
    }
    for (xi, wi) in x.iter().zip(w) {
        let s = half * (xi + 1.0);
        let inner = nested(rho_top, generator, order - 1, s, x, w)?;
        let fed = generator.jump(&inner);
        acc += generator.deterministic(&fed, t - s)? * c(half * wi, 0.0);
    }
    Ok(acc)
}
