use shiftbc::applications::replicate_seed;
use shiftbc::bc::{
    expected_intersection_sum, expected_sum_shift, intersection_vs_product_gap, run_shift,
    verify_nesting, CylinderSchedule, NestingMode, RunOptions,
};
use shiftbc::index::IndexFamily;
use shiftbc::processes::{ProcessModel, RngSeed};
use shiftbc::symbolic::{Cylinder, Interval, Sidedness};

fn markov() -> ProcessModel {
    ProcessModel::markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
}

fn zero() -> Cylinder {
    Cylinder::new(Interval::new(0, 0).unwrap(), vec![0]).unwrap()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_unbiased(model: &ProcessModel, family: &IndexFamily, cyl: Cylinder, base: u64) {
    let n_max = 10_000;
    let schedule = CylinderSchedule::fixed_shared(cyl, family.ell()).unwrap();
    let exact = expected_intersection_sum(model, &schedule, family, n_max).unwrap();
    let sums: Vec<f64> = (0..200)
        .map(|rep| {
            let r = run_shift(
                model,
                Sidedness::TwoSided,
                &schedule,
                family,
                n_max,
                replicate_seed(base, rep, 0),
                RunOptions::default(),
            )
            .unwrap();
            r.last().s as f64
        })
        .collect();
    let (mean, se) = mean_and_se(&sums);
    assert!(
        (mean - exact).abs() <= 4.0 * se,
        "mean {mean} vs exact {exact}, se {se}"
    );
}

#[test]
fn sums_are_unbiased_for_markov_pairs() {
    let family = IndexFamily::new(&[vec![0, 1], vec![0, 2]]).unwrap();
    check_unbiased(&markov(), &family, zero(), 41);
}

#[test]
fn sums_are_unbiased_for_iid_squares() {
    let coin = ProcessModel::iid_finite(vec![0.5, 0.5]).unwrap();
    let family = IndexFamily::new(&[vec![0, 0, 1]]).unwrap();
    let cyl = Cylinder::new(Interval::new(0, 2).unwrap(), vec![1, 0, 1]).unwrap();
    check_unbiased(&coin, &family, cyl, 42);
}

#[test]
fn product_and_intersection_sums_stay_close() {
    let m = markov();
    let family = IndexFamily::new(&[vec![0, 1], vec![0, 2]]).unwrap();
    let schedule = CylinderSchedule::fixed_shared(zero(), 2).unwrap();
    let gap = intersection_vs_product_gap(&m, &schedule, &family, 2000).unwrap();
    assert!((gap[1999] - gap[999]).abs() <= 1e-6);
    assert!(gap.windows(2).all(|w| w[1] >= w[0]));

    let coin = ProcessModel::iid_finite(vec![0.5, 0.5]).unwrap();
    let gap = intersection_vs_product_gap(&coin, &schedule, &family, 500).unwrap();
    assert!(gap[499].abs() < 1e-15);
    let e = expected_sum_shift(&coin, &schedule, 1000).unwrap();
    assert_eq!(e, 250.0);
}

#[test]
fn runs_are_reproducible() {
    let m = markov();
    let family = IndexFamily::new(&[vec![0, 1], vec![0, 2]]).unwrap();
    let schedule = CylinderSchedule::fixed_shared(zero(), 2).unwrap();
    let run = |seed| {
        run_shift(
            &m,
            Sidedness::TwoSided,
            &schedule,
            &family,
            5000,
            seed,
            RunOptions::default(),
        )
        .unwrap()
    };
    assert_eq!(run(RngSeed::new(3, 0)), run(RngSeed::new(3, 0)));
    assert_ne!(run(RngSeed::new(3, 0)), run(RngSeed::new(3, 1)));
}

#[test]
fn radius_schedules_are_nested() {
    let m = markov();
    let s = CylinderSchedule::sampled_radius(
        &m,
        Sidedness::TwoSided,
        1.3,
        1,
        100_000,
        RngSeed::new(1, 1),
    )
    .unwrap();
    for mode in [NestingMode::RightNested, NestingMode::Nested] {
        let v = verify_nesting(&s, mode, 1, 100_000).unwrap();
        assert!(v.holds, "{v:?}");
    }
}
