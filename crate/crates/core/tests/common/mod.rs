#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::Rng;

pub fn random_complex(rng: &mut StdRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A random unitary from the QR factorization of a Gaussian-ish matrix.
pub fn random_unitary(rng: &mut StdRng, d: usize) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |_, _| random_complex(rng));
    m.qr().q()
}

/// First `k` columns of a random `d × d` unitary.
pub fn random_frame(rng: &mut StdRng, d: usize, k: usize) -> Vec<DVector<C64>> {
    let u = random_unitary(rng, d);
    (0..k).map(|j| u.column(j).into_owned()).collect()
}

/// All strings over `0..d` of length `mu`, last position varying fastest.
pub fn odometer(d: usize, mu: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut s = vec![0usize; mu];
    loop {
        out.push(s.clone());
        let mut k = mu;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            s[k] += 1;
            if s[k] < d {
                break;
            }
            s[k] = 0;
        }
    }
}

/// `Σ_s Π_k v_k[s_k] e_s`, by explicit enumeration of strings.
pub fn theta_oracle(vs: &[DVector<C64>]) -> DVector<C64> {
    let d = vs[0].len();
    let strings = odometer(d, vs.len());
    DVector::from_iterator(
        strings.len(),
        strings.iter().map(|s| {
            s.iter()
                .enumerate()
                .map(|(k, &c)| vs[k][c])
                .product::<C64>()
        }),
    )
}

/// `e^{i 2π r}` for a real `r`.
pub fn phase(r: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
