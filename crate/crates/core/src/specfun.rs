//! Polynomial special functions at complex arguments.
//!
//! Everything here is an exact finite polynomial (physicists' Hermite,
//! terminating Gauss hypergeometric), so values and derivatives are entire
//! functions of the argument and no branch choices are ever needed. The
//! Pöschl–Teller normalization constants are the one numerically determined
//! quantity and are cached per `(n, l)`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use thiserror::Error;

/// Largest Hermite order accepted by [`hermite_phys`].
pub const HERMITE_MAX_ORDER: usize = 200;

/// Largest Pöschl–Teller eigenstate index accepted by [`pt_norm_constant`].
pub const PT_MAX_ORDER: usize = 60;

const QUADRATURE_REL_TOL: f64 = 1e-12;
const QUADRATURE_START_NODES: usize = 32;
const QUADRATURE_MAX_NODES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("polynomial order {n} exceeds the supported maximum {max}")]
    OrderTooLarge { n: usize, max: usize },
    #[error("lower parameter c = {c} is a nonpositive integer")]
    NonpositiveIntegerC { c: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "normalization quadrature for n = {n}, l = {l} did not converge \
         (relative change {change:e} at {nodes} nodes)"
    )]
    QuadratureNotConverged {
        n: usize,
        l: f64,
        nodes: usize,
        change: f64,
    },
}

/// A polynomial value together with its derivative with respect to the
/// argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialEval {
    pub value: Complex64,
    pub derivative: Complex64,
}

/// Physicists' Hermite polynomial `H_n(z)` by upward recurrence, with
/// `H_n'(z) = 2n H_{n-1}(z)`.
pub fn hermite_phys(n: usize, z: Complex64) -> Result<PolynomialEval, SpecFunError> {
    if n > HERMITE_MAX_ORDER {
        return Err(SpecFunError::OrderTooLarge {
            n,
            max: HERMITE_MAX_ORDER,
        });
    }
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(PolynomialEval {
        value: cur,
        derivative: 2.0 * n as f64 * prev,
    })
}

/// `₂F₁(-n, b; c; z)`, which terminates after `n + 1` terms.
///
/// The series is summed through the term ratio
/// `t_{k+1} / t_k = (k - n)(b + k) z / ((c + k)(k + 1))`, so no Pochhammer
/// symbol is ever formed on its own. The derivative uses
/// `d/dz ₂F₁(-n, b; c; z) = (-n b / c) ₂F₁(-n + 1, b + 1; c + 1; z)`.
pub fn gauss_2f1_terminating(
    n: usize,
    b: f64,
    c: f64,
    z: Complex64,
) -> Result<PolynomialEval, SpecFunError> {
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(SpecFunError::NonpositiveIntegerC { c });
    }
    let value = terminating_sum(n, b, c, z);
    let derivative = if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        (-(n as f64) * b / c) * terminating_sum(n - 1, b + 1.0, c + 1.0, z)
    };
    Ok(PolynomialEval { value, derivative })
}

fn terminating_sum(n: usize, b: f64, c: f64, z: Complex64) -> Complex64 {
    let nf = n as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..n {
        let kf = k as f64;
        term *= z * ((kf - nf) * (b + kf) / ((c + kf) * (kf + 1.0)));
        sum += term;
    }
    sum
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                dp = legendre_with_derivative(order, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if order == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn norm_cache() -> &'static RwLock<HashMap<(usize, u64), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Normalization constant
/// `c_n(l) = ∫₀^{π/2} [cosˡx sinˡx ₂F₁(-n, n+2l; l+½; sin²x)]² dx`
/// of the symmetric Pöschl–Teller eigenfunctions.
///
/// Gauss–Legendre quadrature with the node count doubled until successive
/// estimates agree to 1e-12 relative. Results are cached per `(n, l)`.
pub fn pt_norm_constant(n: usize, l: f64) -> Result<f64, SpecFunError> {
    if n > PT_MAX_ORDER {
        return Err(SpecFunError::OrderTooLarge {
            n,
            max: PT_MAX_ORDER,
        });
    }
    if !(l > 0.5 && l.is_finite()) {
        return Err(SpecFunError::InvalidParameter(format!(
            "Pöschl–Teller l must exceed 1/2, got {l}"
        )));
    }
    let key = (n, l.to_bits());
    if let Some(&c) = norm_cache().read().expect("cache poisoned").get(&key) {
        return Ok(c);
    }

    let mut write = norm_cache().write().expect("cache poisoned");
    if let Some(&c) = write.get(&key) {
        return Ok(c);
    }
    let c = pt_norm_quadrature(n, l)?;
    write.insert(key, c);
    Ok(c)
}

fn pt_norm_quadrature(n: usize, l: f64) -> Result<f64, SpecFunError> {
    let integrand = |x: f64| {
        let f = pt_polynomial_real(n, l, (2.0 * x).cos());
        let g = (0.5 * (2.0 * x).sin()).powf(l) * f;
        g * g
    };
    let integrate = |order: usize| {
        let (nodes, weights) = gauss_legendre(order);
        let half = 0.5 * FRAC_PI_2;
        nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * integrand(half * (t + 1.0)))
            .sum::<f64>()
            * half
    };

    let mut order = QUADRATURE_START_NODES;
    let mut previous = integrate(order);
    loop {
        order *= 2;
        let current = integrate(order);
        let change = ((current - previous) / current).abs();
        if change < QUADRATURE_REL_TOL {
            return Ok(current);
        }
        if order >= QUADRATURE_MAX_NODES {
            return Err(SpecFunError::QuadratureNotConverged {
                n,
                l,
                nodes: order,
                change,
            });
        }
        previous = current;
    }
}

/// `₂F₁(-n, n+2l; l+½; sin²x)` as a function of `z = cos 2x`, by the
/// Gegenbauer three-term recurrence rescaled so that `G₀ = 1`, `G₁ = z`.
/// Stable on the real interval, unlike the alternating power series.
fn pt_polynomial_real(n: usize, l: f64, z: f64) -> f64 {
    let (mut g0, mut g1) = (1.0, z);
    if n == 0 {
        return g0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let g2 = (2.0 * (kf + l - 1.0) * z * g1 - (kf - 1.0) * g0) / (kf + 2.0 * l - 1.0);
        g0 = g1;
        g1 = g2;
    }
    g1
}
