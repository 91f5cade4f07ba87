//! Quadrature kernels: globally adaptive Gauss–Kronrod (21-point) for complex
//! integrands, and Gauss–Legendre rules for the fixed-order shell integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae and weights of the 21-point rule; the odd-indexed
// abscissae are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_632_924_047_765,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Absolute/relative stopping tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
            max_panels: 4000,
        }
    }
}

impl QuadTolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = f_center.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = (f_center - mean).norm() * WGK[10];
    for j in 0..10 {
        res_asc += ((fv1[j] - mean).norm() + (fv2[j] - mean).norm()) * WGK[j];
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;

    let mut error = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Panel {
        a,
        b,
        value: kronrod * half,
        error,
    }
}

/// Globally adaptive 21-point Gauss–Kronrod integration of a complex-valued
/// integrand over `[breaks[0], breaks[last]]`. Interior break points are
/// always panel boundaries, which keeps integrable endpoint singularities and
/// kinks off the quadrature nodes.
pub fn integrate<F>(f: F, breaks: &[f64], tol: QuadTolerance) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut points: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    points.sort_by(|x, y| x.total_cmp(y));
    points.dedup();
    if points.len() < 2 {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let span = points[points.len() - 1] - points[0];
    let min_width = span * 1e-15;

    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] - w[0] > 0.0 {
            heap.push(gk21(&f, w[0], w[1]));
            evaluations += 21;
        }
    }

    let totals = |heap: &BinaryHeap<Panel>, finished: &[Panel]| {
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in heap.iter().chain(finished.iter()) {
            value += p.value;
            error += p.error;
        }
        (value, error)
    };

    loop {
        let (value, error) = totals(&heap, &finished);
        if error <= tol.abs.max(tol.rel * value.norm()) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() + finished.len() >= tol.max_panels {
            return Err(Error::QuadratureNotConverged { error, evaluations });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Err(Error::QuadratureNotConverged { error, evaluations }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a < min_width || mid <= worst.a || mid >= worst.b {
            // Panel is at roundoff resolution; keep its estimate as is.
            finished.push(worst);
            continue;
        }
        heap.push(gk21(&f, worst.a, mid));
        heap.push(gk21(&f, mid, worst.b));
        evaluations += 42;
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre nodes/weights on `[a, b]` with `panels` panels of
/// `order` points each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        let f = |x: f64| Complex64::new(x.powi(30) + 3.0 * x.powi(7), x.powi(12));
        let p = gk21(&f, -1.0, 1.0);
        assert_relative_eq!(p.value.re, 2.0 / 31.0, epsilon = 1e-14);
        assert_relative_eq!(p.value.im, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate(
            |x| Complex64::new(x.sqrt(), 0.0),
            &[0.0, 1.0],
            QuadTolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value.re, 2.0 / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn adaptive_resolves_narrow_lorentzian_at_break() {
        let eta = 1e-6;
        let r = integrate(
            |x| Complex64::new(eta / (x * x + eta * eta), 0.0),
            &[-1.0, 0.0, 1.0],
            QuadTolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value.re, 2.0 * (1.0 / eta).atan(), epsilon = 1e-10);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = QuadTolerance {
            abs: 1e-15,
            rel: 0.0,
            max_panels: 3,
        };
        let r = integrate(|x| Complex64::new((1.0 / x).sin(), 0.0), &[1e-3, 1.0], tol);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn gauss_legendre_weights_and_moments() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(m, 2.0 / (deg as f64 + 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn composite_rule_integrates_cosine() {
        let nodes = composite_gauss_legendre(0.0, std::f64::consts::PI, 8, 8);
        let s: f64 = nodes.iter().map(|(x, w)| w * (5.0 * x).cos().powi(2)).sum();
        assert_relative_eq!(s, std::f64::consts::FRAC_PI_2, epsilon = 1e-13);
    }
}
