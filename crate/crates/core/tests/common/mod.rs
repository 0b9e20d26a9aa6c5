//! Random instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use dephtomo::channel::{BasisDecomposition, DampingModel, ExpTerm, ScalarSignal};
use dephtomo::operator::{c64, identity, ones, pauli_x, pauli_y, pauli_z};
use dephtomo::{Complex64, ComplexMatrix, DensityMatrix, Observable, PureDecoherenceModel};
use rand::Rng;

pub fn example_state() -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::from_row_slice(
        2,
        2,
        &[c64(0.6, 0.0), c64(0.1, -0.2), c64(0.1, 0.2), c64(0.4, 0.0)],
    ))
    .unwrap()
}

pub fn example_observables() -> Vec<Observable> {
    vec![
        Observable::new("Q1", pauli_x()).unwrap(),
        Observable::new("Q2", pauli_y() + pauli_z()).unwrap(),
    ]
}

pub fn example_dictionary() -> Vec<Observable> {
    vec![
        Observable::new("s1", pauli_x()).unwrap(),
        Observable::new("s2+s3", pauli_y() + pauli_z()).unwrap(),
        Observable::new("s2", pauli_y()).unwrap(),
        Observable::new("s3", pauli_z()).unwrap(),
    ]
}

/// `A₁ = I`, `A₂ = σ₁`, `λ₁ = 1`, `λ₂ = e^{-γt}`.
pub fn dephasing_decomposition(gamma: f64) -> BasisDecomposition {
    BasisDecomposition::new(
        vec![identity(2), pauli_x()],
        vec![ScalarSignal::constant(c64(1.0, 0.0)), ScalarSignal::decay(gamma)],
    )
    .unwrap()
}

pub fn random_complex<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_complex(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// `G G† / Tr(G G†)` for a random complex `G`.
pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = random_complex(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m.unscale(tr);
    DensityMatrix::new((&m + m.adjoint()).scale(0.5)).unwrap()
}

/// Random valid channel with `mu` basis elements (`2 ≤ mu ≤ n² - n + 1`).
///
/// `D(t) = J + Σ_k w_k (1 - λ_k(t)) (U_k - J)` with `U_k = u_k u_k†`,
/// `|u_k,i| = 1`, `λ_k(t) = e^{-r_k t} cos(ω_k t)` and `Σ w_k = 0.45`. It is a
/// convex mixture of the PSD unit-diagonal matrices `J` and `U_k`, with
/// weight on `J` at least `1 - 2 Σ w_k > 0`, so every `D(t)` is a valid
/// phase-damping matrix and `D(0) = J`.
pub fn random_channel<R: Rng>(rng: &mut R, n: usize, mu: usize) -> DampingModel {
    assert!(mu >= 2 && mu <= n * n - n + 1);
    let k = mu - 1;
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| 0.45 * w / total).collect();
    let mut a0 = ones(n);
    let mut basis = Vec::with_capacity(mu);
    let mut signals = Vec::with_capacity(mu);
    for (i, &w) in weights.iter().enumerate() {
        let u: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let uu = ComplexMatrix::from_fn(n, n, |a, b| u[a] * u[b].conj());
        a0 += (&uu - ones(n)).scale(w);
        basis.push((ones(n) - uu).scale(w));
        let rate = rng.random_range(0.05..0.3);
        let omega = 0.4 * (i + 1) as f64 + rng.random_range(0.0..0.2);
        signals.push(
            ScalarSignal::exponential_sum(vec![
                ExpTerm::new(c64(0.5, 0.0), c64(-rate, omega)),
                ExpTerm::new(c64(0.5, 0.0), c64(-rate, -omega)),
            ])
            .unwrap(),
        );
    }
    basis.insert(0, a0);
    signals.insert(0, ScalarSignal::constant(c64(1.0, 0.0)));
    DampingModel::decomposed(BasisDecomposition::new(basis, signals).unwrap())
}

pub fn random_decoherence_model<R: Rng>(rng: &mut R, n: usize, env_dim: usize) -> PureDecoherenceModel {
    let energies = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let h_env = random_hermitian(rng, env_dim);
    let couplings = (0..n).map(|_| random_hermitian(rng, env_dim)).collect();
    let env_state = random_density(rng, env_dim);
    PureDecoherenceModel::new(energies, h_env, couplings, env_state).unwrap()
}

/// Rank by Gaussian elimination with partial pivoting on the flattened
/// matrices, relative tolerance on the pivot magnitude.
pub fn elimination_rank(mats: &[ComplexMatrix], tol: f64) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let mut rows: Vec<Vec<Complex64>> = mats.iter().map(|m| m.iter().cloned().collect()).collect();
    let scale = rows.iter().flatten().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows.len()).max_by(|&a, &b| rows[a][col].norm().total_cmp(&rows[b][col].norm()));
        let Some(p) = pivot else { break };
        if rows[p][col].norm() <= tol * scale {
            continue;
        }
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[col] / pivot_row[col];
            for c in col..cols {
                row[c] -= factor * pivot_row[c];
            }
        }
        rank += 1;
    }
    rank
}

/// `Σ_ij A_ij B_ij C_ij`, the common entrywise value of both transport sides.
pub fn transport_oracle(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Complex64 {
    a.iter().zip(b.iter()).zip(c.iter()).map(|((x, y), z)| x * y * z).sum()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[m - 1] + values[m])
    } else {
        values[m]
    }
}
