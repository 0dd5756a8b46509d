use num_complex::Complex64;
use rand::Rng;

use super::{Topology, TriDiagSystem};

fn unit<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random strictly diagonally dominant complex system of size `n`.
pub fn random_dominant_system<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    topology: Topology,
) -> TriDiagSystem {
    let off = match topology {
        Topology::Open => n - 1,
        Topology::Cyclic => n,
    };
    let sub: Vec<Complex64> = (0..off).map(|_| unit(rng)).collect();
    let sup: Vec<Complex64> = (0..off).map(|_| unit(rng)).collect();
    let main = (0..n)
        .map(|i| {
            // row i touches sub[i-1] (sub[n-1] on row 0 when cyclic) and sup[i]
            let left = if i > 0 {
                sub[i - 1].norm()
            } else if topology == Topology::Cyclic {
                sub[n - 1].norm()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                sup[i].norm()
            } else if topology == Topology::Cyclic {
                sup[n - 1].norm()
            } else {
                0.0
            };
            let margin = rng.gen_range(0.5..2.0);
            Complex64::from_polar(left + right + margin, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let rhs = (0..n).map(|_| unit(rng) * 10.0).collect();
    TriDiagSystem {
        sub,
        main,
        sup,
        rhs,
        topology,
    }
}
