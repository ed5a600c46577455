//! Oracles shared by the integration tests.
#![allow(dead_code)]

use aoi_core::SourceParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    while let Some((lo, hi, eps)) = stack.pop() {
        let (value, err) = gk15(&mut f, lo, hi);
        if err <= eps || hi - lo < 1e-9 * (b - a) {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, eps / 2.0));
            stack.push((mid, hi, eps / 2.0));
        }
    }
    total
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rates drawn uniformly from `[0.2, 3]`.
pub fn random_params(rng: &mut ChaCha8Rng, n: usize) -> SourceParams {
    let mut draw = || (0..n).map(|_| rng.random_range(0.2..3.0)).collect::<Vec<f64>>();
    let lambdas = draw();
    let mus = draw();
    SourceParams::new(lambdas, mus).unwrap()
}

/// `λ = (1,2,3,2)`, `μ = (3,1,2,4)`.
pub fn four_source_scenario() -> SourceParams {
    SourceParams::new(vec![1.0, 2.0, 3.0, 2.0], vec![3.0, 1.0, 2.0, 4.0]).unwrap()
}

/// `α(−W)⁻¹β` by a left solve `y W = α`, independent of the column solve the
/// engine uses.
pub fn normalizer_by_left_solve(d: &aoi_core::AoiDistribution) -> f64 {
    let lu = aoi_core::linalg::Factorization::new(d.w()).unwrap();
    let y = lu.solve_left(d.alpha()).unwrap();
    -y.iter().zip(d.beta()).map(|(a, b)| a * b).sum::<f64>()
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
