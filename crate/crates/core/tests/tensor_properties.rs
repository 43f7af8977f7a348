mod common;

use binquant::tensor::{
    decode_fqt, encode_fqt, format_csv, generate, parse_csv, Distribution, EmpiricalStats, SyntheticSpec,
};
use binquant::{FloatMatrix, FloatVector, Tensor};
use common::strategies::any_vector;
use common::BATTERY;
use proptest::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<f32>().prop_filter("finite", |v| v.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fqt_vector_round_trip_is_bit_exact(values in prop::collection::vec(finite_f32(), 1..200)) {
        let t = Tensor::Vector(FloatVector::new(values.iter().map(|&v| f64::from(v)).collect()).unwrap());
        let bytes = encode_fqt(&t);
        let back = decode_fqt(&bytes).unwrap();
        let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&t));
        prop_assert_eq!(encode_fqt(&back), bytes);
    }

    #[test]
    fn fqt_matrix_round_trip_is_bit_exact(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let data: Vec<f64> = (0..rows * cols)
            .map(|i| f64::from(f32::from_bits((seed.rotate_left(i as u32) as u32) & 0x7f7f_ffff)))
            .collect();
        let t = Tensor::Matrix(FloatMatrix::new(rows, cols, data).unwrap());
        prop_assert_eq!(decode_fqt(&encode_fqt(&t)).unwrap(), t);
    }

    #[test]
    fn fqt_decoder_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..128)) {
        let _ = decode_fqt(&bytes);
        let mut framed = b"FQT1".to_vec();
        framed.extend_from_slice(&bytes);
        let _ = decode_fqt(&framed);
    }

    #[test]
    fn csv_round_trip_is_exact(x in any_vector(100)) {
        let v = FloatVector::new(x).unwrap();
        prop_assert_eq!(parse_csv(&format_csv(&v)).unwrap(), v);
    }

    #[test]
    fn csv_parser_never_panics(text in ".{0,80}") {
        let _ = parse_csv(&text);
    }

    #[test]
    fn generation_is_pure(d in 0..BATTERY.len(), n in 1usize..500, seed in any::<u64>()) {
        let spec = SyntheticSpec::new(BATTERY[d], n, seed);
        let a = generate(&spec).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert_eq!(generate(&spec).unwrap(), a);
    }

    #[test]
    fn stats_merge_law(a in any_vector(80), b in any_vector(80)) {
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let whole = EmpiricalStats::of(&joined);
        let merged = EmpiricalStats::of(&a).merge(&EmpiricalStats::of(&b));
        prop_assert_eq!(merged.count, whole.count);
        let scale = joined.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!((merged.mean - whole.mean).abs() <= 1e-12 * scale);
        prop_assert!((merged.mean_abs - whole.mean_abs).abs() <= 1e-12 * scale);
        prop_assert!((merged.energy - whole.energy).abs() <= 1e-12 * whole.energy.max(1.0));
    }
}

#[test]
fn distribution_labels_round_trip() {
    for d in BATTERY.iter().chain([&Distribution::Laplace { scale: 0.25 }]) {
        let text = d.to_string();
        assert_eq!(&text.parse::<Distribution>().unwrap(), d, "{text}");
    }
}
