//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use hessbound::bench::random_boxes;
use hessbound::codelist::Codelist;
use hessbound::corpus::{random_function, GenOptions};
use hessbound::expr;
use hessbound::interval::IntervalBox;
use hessbound::reference::{point_hessian, sym_eigenvalues};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A seeded random function of dimension `n` with a random sub-box of
/// `[-1, 1]^n`.
pub struct Case {
    pub source: String,
    pub cl: Codelist,
    pub bbox: IntervalBox,
}

pub fn random_case(rng: &mut ChaCha8Rng, n: usize, depth: u32, require_mul: bool) -> Case {
    let opts = GenOptions { depth, require_mul };
    loop {
        let e = random_function(rng, n, &opts);
        let Ok(ne) = expr::normalize(&e) else { continue };
        if ne.size() > 60 {
            continue;
        }
        let cl = expr::lower(&ne, n).expect("normalized expressions lower");
        let domain = IntervalBox::from_bounds(&vec![(-1.0, 1.0); n]).unwrap();
        let bbox = random_boxes(&domain, 1, rng.gen()).remove(0);
        return Case {
            source: e.to_string(),
            cl,
            bbox,
        };
    }
}

/// The `k^n` points of the uniform grid on `b` including its faces.
pub fn grid(b: &IntervalBox, k: usize) -> Vec<Vec<f64>> {
    let n = b.len();
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            b.iter()
                .map(|d| {
                    let j = idx % k;
                    idx /= k;
                    let t = j as f64 / (k - 1) as f64;
                    (d.lo() + t * (d.hi() - d.lo())).clamp(d.lo(), d.hi())
                })
                .collect()
        })
        .collect()
}

/// Uniform random point of `b`.
pub fn sample_point(rng: &mut ChaCha8Rng, b: &IntervalBox) -> Vec<f64> {
    b.iter().map(|d| rng.gen_range(d.lo()..=d.hi())).collect()
}

/// Eigenvalues of the Hessian of `cl` at `x`.
pub fn hessian_eigs(cl: &Codelist, x: &[f64]) -> Vec<f64> {
    let h = point_hessian(cl, x).expect("point inside the domain");
    sym_eigenvalues(cl.n(), &h).expect("symmetric Hessian")
}
