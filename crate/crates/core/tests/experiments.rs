use galloping::experiments::{self, Descriptor, FitOptions, Repetition, SweepSpec, Table};
use galloping::sampling::{SamplingKind, SamplingStrategy};
use galloping::synth::{self, SynthConfig};
use galloping::{FeatureMask, Label, SplitSpec};

fn source(n: usize, seed: u64) -> galloping::Dataset {
    synth::generate(&SynthConfig::new(n, seed)).unwrap()
}

#[test]
fn feature_search_covers_every_mask_once() {
    let ds = source(300, 1);
    let rows = experiments::feature_search(&ds, &FitOptions::default(), &SplitSpec::with_seed(1), None).unwrap();
    assert_eq!(rows.len(), 127);
    let mut bits: Vec<u8> = rows
        .iter()
        .map(|r| match r.descriptor {
            Descriptor::Mask(m) => m.bits(),
            _ => panic!("unexpected descriptor"),
        })
        .collect();
    bits.sort_unstable();
    assert_eq!(bits, (1..=127).collect::<Vec<u8>>());
    let f1: Vec<f64> = rows.iter().map(|r| r.f1().unwrap_or(f64::NEG_INFINITY)).collect();
    assert!(f1.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn feature_search_subsampling_caps_training_size() {
    let ds = source(400, 2);
    let rows = experiments::feature_search(&ds, &FitOptions::default(), &SplitSpec::with_seed(2), Some(100)).unwrap();
    assert_eq!(rows.len(), 127);
    assert!(rows.iter().all(|r| r.report().is_none_or(|m| m.total() == 100)));
}

#[test]
fn sweep_and_grid_row_counts() {
    let ds = source(1_200, 3);
    let spec = SweepSpec {
        fixed_minority: 100,
        majority_counts: vec![50, 100, 200],
        repetitions: 2,
        seed: 3,
    };
    let rows = experiments::balance_sweep(&ds, &spec, &FitOptions::default(), &SplitSpec::with_seed(3), FeatureMask::trio()).unwrap();
    // two runs plus a mean row per count
    assert_eq!(rows.len(), 9);
    assert_eq!(rows.iter().filter(|r| r.repetition == Repetition::Mean).count(), 3);

    let grid = experiments::volume_grid(&ds, &[100, 300], &[0.1, 0.5], &FitOptions::default(), &SplitSpec::with_seed(3), FeatureMask::trio()).unwrap();
    assert_eq!(grid.len(), 4);
    assert!(grid.iter().all(|r| r.outcome.is_ok()));
}

#[test]
fn strategies_share_one_test_set() {
    let ds = synth::generate(&SynthConfig {
        galloping_fraction: 0.2,
        ..SynthConfig::new(800, 4)
    })
    .unwrap();
    let strategies: Vec<SamplingStrategy> = SamplingKind::ALL.iter().map(|&k| SamplingStrategy::new(k, 4)).collect();
    let rows = experiments::sampling_comparison(&ds, &strategies, &FitOptions::default(), &SplitSpec::with_seed(4), FeatureMask::trio(), 3).unwrap();
    assert_eq!(rows.len(), 12);
    // per repetition, every strategy is scored on the same test split:
    // same size and same number of true galloping samples
    for rep in 0..3 {
        let sizes: Vec<(usize, usize)> = rows
            .iter()
            .filter(|r| r.repetition == Repetition::Run(rep))
            .map(|r| {
                let m = r.report().unwrap();
                (m.total(), m.tp + m.fn_)
            })
            .collect();
        assert_eq!(sizes.len(), 3);
        assert!(sizes.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(sizes[0].0, 200);
    }
    let test_pos = rows[0].report().map(|m| m.tp + m.fn_).unwrap();
    assert!(test_pos < 200 && ds.class_count(Label::Galloping) > test_pos);
}

#[test]
fn tables_are_reproducible() {
    let ds = source(600, 5);
    let run = || {
        let strategies: Vec<SamplingStrategy> = SamplingKind::ALL.iter().map(|&k| SamplingStrategy::new(k, 9)).collect();
        let rows = experiments::sampling_comparison(&ds, &strategies, &FitOptions::default(), &SplitSpec::with_seed(9), FeatureMask::trio(), 2).unwrap();
        experiments::to_csv(Table::SamplingComparison, &rows, false)
    };
    assert_eq!(run(), run());
}
