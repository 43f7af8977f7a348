mod common;

use binquant::rank1::{channel_mean_rank1, energy_profile, rank1_binary, PowerOptions};
use binquant::tensor::generate_matrix;
use binquant::FloatMatrix;
use common::{singular_energies, BATTERY};
use proptest::prelude::*;

fn matrix(max_dim: usize) -> impl Strategy<Value = FloatMatrix> {
    (1..=max_dim, 1..=max_dim, 0..BATTERY.len(), any::<u64>())
        .prop_map(|(r, c, d, seed)| generate_matrix(&BATTERY[d], r, c, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factorization_invariants(x in matrix(12)) {
        let f = rank1_binary(&x, PowerOptions::default()).unwrap();
        for (k, &v) in x.as_slice().iter().enumerate() {
            prop_assert_eq!(f.signs[k], if v >= 0.0 { 1 } else { -1 });
        }
        let nu: f64 = f.u.iter().map(|a| a * a).sum();
        let nv: f64 = f.v.iter().map(|a| a * a).sum();
        prop_assert!((nu - 1.0).abs() < 1e-10 && (nv - 1.0).abs() < 1e-10);
        prop_assert!(f.u.iter().chain(&f.v).all(|&a| a >= 0.0));

        let total = x.frobenius_sq();
        let res = f.residual_sq(&x).unwrap();
        prop_assert!((res - (total - f.sigma * f.sigma)).abs() <= 1e-6 * total.max(f64::MIN_POSITIVE));
        let baseline = channel_mean_rank1(&x).residual_sq(&x).unwrap();
        prop_assert!(baseline >= res - 1e-9 * total);
    }

    #[test]
    fn full_profile_conserves_energy(x in matrix(12)) {
        let r = x.rows().min(x.cols());
        let p = energy_profile(&x, r, PowerOptions::default()).unwrap();
        let sum: f64 = p.singular_energies.iter().sum();
        prop_assert!((sum - p.total).abs() <= 1e-8 * p.total);
        prop_assert!((0.0..=1.0).contains(&p.ratio_1));
        prop_assert!(p.singular_energies.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-9)));

        let abs: Vec<f64> = x.as_slice().iter().map(|v| v.abs()).collect();
        let oracle = singular_energies(&abs, x.rows(), x.cols());
        for (got, want) in p.singular_energies.iter().zip(&oracle).take(2) {
            // Energies below rounding level of the total carry no relative precision.
            if *want > 1e-9 * p.total {
                prop_assert!((got / want - 1.0).abs() < 1e-6, "{} vs {}", got, want);
            }
        }
    }
}
