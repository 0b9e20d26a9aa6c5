//! Seeded problem instances for the benchmarks.

use dephtomo::channel::{BasisDecomposition, DampingModel, ExpTerm, ScalarSignal};
use dephtomo::operator::{c64, hermitian_basis, ones};
use dephtomo::{Complex64, ComplexMatrix, DensityMatrix, Observable, PureDecoherenceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_matrices(seed: u64, rows: usize, cols: usize, count: usize) -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_complex(&mut rng, rows, cols)).collect()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = random_complex(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_state(seed: u64, n: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_complex(&mut rng, n, n);
    let m = &g * g.adjoint();
    let m = m.unscale(m.trace().re);
    DensityMatrix::new((&m + m.adjoint()).scale(0.5)).expect("G G† / Tr is a density matrix")
}

/// Generalized Gell-Mann matrices as an observable dictionary.
pub fn gell_mann_observables(n: usize) -> Vec<Observable> {
    hermitian_basis(n)
        .expect("n >= 2")
        .operators()
        .iter()
        .enumerate()
        .map(|(i, g)| Observable::new(format!("G{i}"), g.clone()).expect("Gell-Mann matrices are Hermitian"))
        .collect()
}

/// Valid channel with `mu` basis elements: `J` mixed with damped rank-one
/// phase patterns `u u†`, `|u_i| = 1`.
pub fn random_channel(seed: u64, n: usize, mu: usize) -> DampingModel {
    assert!(mu >= 2 && mu <= n * n - n + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 0.45 / (mu - 1) as f64;
    let mut a0 = ones(n);
    let mut basis = Vec::with_capacity(mu);
    let mut signals = vec![ScalarSignal::constant(c64(1.0, 0.0))];
    for k in 0..mu - 1 {
        let u: Vec<Complex64> =
            (0..n).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let uu = ComplexMatrix::from_fn(n, n, |a, b| u[a] * u[b].conj());
        a0 += (&uu - ones(n)).scale(w);
        basis.push((ones(n) - uu).scale(w));
        let rate = rng.random_range(0.05..0.3);
        let omega = 0.4 * (k + 1) as f64;
        signals.push(
            ScalarSignal::exponential_sum(vec![
                ExpTerm::new(c64(0.5, 0.0), c64(-rate, omega)),
                ExpTerm::new(c64(0.5, 0.0), c64(-rate, -omega)),
            ])
            .expect("finite terms"),
        );
    }
    basis.insert(0, a0);
    DampingModel::decomposed(BasisDecomposition::new(basis, signals).expect("independent basis"))
}

pub fn random_decoherence_model(seed: u64, n: usize, env_dim: usize) -> PureDecoherenceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let energies = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let h = random_hermitian(&mut rng, env_dim);
    let couplings = (0..n).map(|_| random_hermitian(&mut rng, env_dim)).collect();
    let env_state = random_state(seed.wrapping_add(1), env_dim);
    PureDecoherenceModel::new(energies, h, couplings, env_state).expect("valid model")
}
