//! Property tests for the serialization formats.

use proptest::prelude::*;

use milmap::data::{format_dataset, parse_dataset, Bag, Label, MilDataset};
use milmap::linalg::Matrix;
use milmap::synth::{GenKind, GenParams, GenSpec};

fn arb_dataset() -> impl Strategy<Value = MilDataset> {
    let dim = 1usize..4;
    dim.prop_flat_map(|d| {
        let bag = (
            1usize..4,
            prop::collection::vec(-1.0e12f64..1.0e12, d * 3),
        );
        prop::collection::vec(bag, 2..7).prop_map(move |raw| {
            let bags: Vec<Bag> = raw
                .into_iter()
                .enumerate()
                .map(|(i, (rows, values))| {
                    let data: Vec<f64> = values.into_iter().cycle().take(rows * d).collect();
                    let label = if i % 2 == 0 {
                        Label::Positive
                    } else {
                        Label::Negative
                    };
                    Bag::new(format!("bag{i}"), Matrix::from_vec(rows, d, data), label)
                })
                .collect();
            MilDataset::new("prop", bags).expect("constructed valid")
        })
    })
}

proptest! {
    #[test]
    fn dataset_csv_roundtrip_is_exact(ds in arb_dataset()) {
        let text = format_dataset(&ds);
        let back = parse_dataset(&text, "prop").unwrap();
        prop_assert_eq!(ds, back);
    }

    #[test]
    fn genspec_sidecar_roundtrip(
        kind_idx in 0usize..6,
        n_pos in 1usize..6,
        n_neg in 1usize..6,
        lo in 1usize..4,
        extra in 0usize..4,
        seed in any::<u64>(),
        rotation in -90.0f64..90.0,
        widen in 0.5f64..4.0,
    ) {
        let spec = GenSpec {
            kind: GenKind::ALL[kind_idx],
            n_pos,
            n_neg,
            bag_size_min: lo,
            bag_size_max: lo + extra,
            seed,
            params: GenParams { rotation_deg: rotation, widen_factor: widen, ..GenParams::default() },
        };
        let back = GenSpec::from_kv(&spec.to_kv()).unwrap();
        prop_assert_eq!(spec, back);
    }

    #[test]
    fn generated_datasets_always_valid(
        kind_idx in 0usize..6,
        n_pos in 1usize..5,
        n_neg in 1usize..5,
        lo in 1usize..4,
        extra in 0usize..3,
        seed in any::<u64>(),
    ) {
        let spec = GenSpec {
            kind: GenKind::ALL[kind_idx],
            n_pos,
            n_neg,
            bag_size_min: lo,
            bag_size_max: lo + extra,
            seed,
            params: GenParams::default(),
        };
        let ds = spec.generate().unwrap();
        prop_assert_eq!(ds.bags().len(), n_pos + n_neg);
        prop_assert_eq!(ds.feature_dim(), 2);
        for bag in ds.bags() {
            prop_assert!(bag.size() >= lo && bag.size() <= lo + extra);
        }
    }
}
