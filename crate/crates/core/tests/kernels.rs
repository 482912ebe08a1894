use shiftbc::applications::{entropy_exact, entropy_smb, partition_entropy};
use shiftbc::processes::{
    gauss_entropy, mixing_oracle_bruteforce, phi_exact, psi_exact, MixingKind, ProcessModel,
};
use shiftbc::symbolic::{Cylinder, Interval, Sidedness};

const P01: f64 = 0.1;
const P10: f64 = 0.2;

fn markov() -> ProcessModel {
    ProcessModel::markov(&[vec![1.0 - P01, P01], vec![P10, 1.0 - P10]]).unwrap()
}

fn biased() -> ProcessModel {
    ProcessModel::iid_finite(vec![0.3, 0.7]).unwrap()
}

/// Stationary law of a two-state chain, from detailed balance.
fn pi2() -> [f64; 2] {
    [P10 / (P01 + P10), P01 / (P01 + P10)]
}

fn step(a: u64, b: u64) -> f64 {
    [[1.0 - P01, P01], [P10, 1.0 - P10]][a as usize][b as usize]
}

fn path_markov(word: &[u64]) -> f64 {
    let mut p = pi2()[word[0] as usize];
    for w in word.windows(2) {
        p *= step(w[0], w[1]);
    }
    p
}

fn path_biased(word: &[u64]) -> f64 {
    word.iter().map(|&a| [0.3, 0.7][a as usize]).product()
}

fn bits(x: u32, len: usize) -> Vec<u64> {
    (0..len).map(|i| ((x >> i) & 1) as u64).collect()
}

/// Probability of the constraints by summing path weights over every
/// binary word on the spanned block.
fn brute_joint(path: fn(&[u64]) -> f64, constraints: &[(i64, u64)]) -> f64 {
    let lo = constraints.iter().map(|c| c.0).min().unwrap();
    let hi = constraints.iter().map(|c| c.0).max().unwrap();
    let len = (hi - lo + 1) as usize;
    let mut total = 0.0;
    for x in 0..1u32 << len {
        let w = bits(x, len);
        if constraints.iter().all(|&(c, a)| w[(c - lo) as usize] == a) {
            total += path(&w);
        }
    }
    total
}

#[test]
fn cylinder_probabilities_match_enumeration() {
    for (model, path) in [
        (biased(), path_biased as fn(&[u64]) -> f64),
        (markov(), path_markov),
    ] {
        let mut worst: f64 = 0.0;
        for len in 1..=10usize {
            for x in 0..1u32 << len {
                let w = bits(x, len);
                let cyl = Cylinder::new(Interval::new(-3, -3 + len as i64 - 1).unwrap(), w.clone())
                    .unwrap();
                let got = model.cylinder_probability(&cyl).unwrap();
                worst = worst.max((got - path(&w)).abs());
            }
        }
        assert!(worst <= 1e-12, "{} worst error {worst}", model.name());
    }
}

#[test]
fn cylinder_probabilities_sum_to_one() {
    let m = markov();
    for len in 1..=8usize {
        let total: f64 = (0..1u32 << len)
            .map(|x| {
                let cyl =
                    Cylinder::new(Interval::new(5, 4 + len as i64).unwrap(), bits(x, len)).unwrap();
                m.cylinder_probability(&cyl).unwrap()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn joint_probabilities_match_enumeration() {
    let patterns: Vec<Vec<i64>> = vec![
        vec![0],
        vec![0, 2],
        vec![-4, 0, 5],
        vec![1, 2, 3, 9],
        vec![0, 11],
        vec![3, 3],
    ];
    for (model, path) in [
        (biased(), path_biased as fn(&[u64]) -> f64),
        (markov(), path_markov),
    ] {
        for coords in &patterns {
            for x in 0..1u32 << coords.len() {
                let cons: Vec<(i64, u64)> = coords
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (c, ((x >> i) & 1) as u64))
                    .collect();
                let got = model.joint_cylinder_probability(&cons).unwrap();
                let want = brute_joint(path, &cons);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "{} {cons:?}: {got} vs {want}",
                    model.name()
                );
            }
        }
    }
}

#[test]
fn mixing_coefficients_match_oracle() {
    let m = markov();
    for k in 1..=5 {
        let phi = phi_exact(&m, k).unwrap();
        let psi = psi_exact(&m, k).unwrap();
        let phi_o = mixing_oracle_bruteforce(&m, MixingKind::Phi, k, 3).unwrap();
        let psi_o = mixing_oracle_bruteforce(&m, MixingKind::Psi, k, 3).unwrap();
        assert!((phi - phi_o).abs() <= 1e-10, "φ({k}) {phi} vs {phi_o}");
        assert!((psi - psi_o).abs() <= 1e-10, "ψ({k}) {psi} vs {psi_o}");
    }
    let iid = biased();
    for k in 1..=5 {
        assert_eq!(phi_exact(&iid, k).unwrap(), 0.0);
        assert_eq!(psi_exact(&iid, k).unwrap(), 0.0);
        assert!(mixing_oracle_bruteforce(&iid, MixingKind::Psi, k, 3).unwrap() < 1e-12);
    }
}

#[test]
fn psi_at_gap_one() {
    let m = markov();
    assert!((psi_exact(&m, 1).unwrap() - 1.4).abs() < 1e-12);
}

/// `−Σ_a π_a Σ_b P_ab ln P_ab`.
fn markov_entropy_by_hand() -> f64 {
    let pi = pi2();
    let mut h = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let p = step(a, b);
            h -= pi[a as usize] * p * p.ln();
        }
    }
    h
}

#[test]
fn exact_entropies() {
    let coin = ProcessModel::iid_finite(vec![0.5, 0.5]).unwrap();
    assert_eq!(entropy_exact(&coin).unwrap(), std::f64::consts::LN_2);
    let h = entropy_exact(&markov()).unwrap();
    assert!((h - markov_entropy_by_hand()).abs() <= 1e-10);
    assert!(
        (partition_entropy(&biased()).unwrap() - entropy_exact(&biased()).unwrap()).abs() < 1e-15
    );
}

/// Entropy of the Gauss map by composite Simpson quadrature of
/// `∫_0^1 −2 ln x / ((1 + x) ln 2) dx`, after substituting `x = e^{−t}`.
fn gauss_entropy_quadrature() -> f64 {
    let f = |t: f64| 2.0 * t * (-t).exp() / (1.0 + (-t).exp()) / std::f64::consts::LN_2;
    let (a, b, n) = (0.0, 60.0, 60_000);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn gauss_entropy_matches_quadrature() {
    let q = gauss_entropy_quadrature();
    assert!((q - 2.3731).abs() < 1e-4, "quadrature gave {q}");
    assert!((gauss_entropy() - q).abs() < 1e-9);
}

#[test]
fn smb_converges_for_markov() {
    let m = markov();
    let h = entropy_exact(&m).unwrap();
    let rep = entropy_smb(&m, Sidedness::TwoSided, 200, 100, 8).unwrap();
    assert!((rep.mean() - h).abs() < 0.01, "mean {}", rep.mean());
}

#[test]
fn smb_error_shrinks_with_radius() {
    let m = markov();
    let h = entropy_exact(&m).unwrap();
    let batches = 20;
    let mut better = 0;
    for b in 0..batches {
        let small = entropy_smb(&m, Sidedness::TwoSided, 10, 200, 1000 + b).unwrap();
        let large = entropy_smb(&m, Sidedness::TwoSided, 40, 200, 1000 + b).unwrap();
        if (large.mean() - h).abs() < (small.mean() - h).abs() {
            better += 1;
        }
    }
    assert!(
        better * 10 >= batches * 8,
        "{better} of {batches} batches improved"
    );
}

#[test]
fn gauss_smb_one_sided() {
    let g = ProcessModel::gauss_digits();
    let rep = entropy_smb(&g, Sidedness::OneSided, 200, 50, 8).unwrap();
    assert!(
        (rep.mean() - gauss_entropy_quadrature()).abs() < 0.05,
        "mean {}",
        rep.mean()
    );
    assert!(entropy_smb(&g, Sidedness::TwoSided, 10, 2, 8).is_err());
}
