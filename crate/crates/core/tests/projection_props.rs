mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use simsearch_core::projection::{ProjKind, Projection};
use simsearch_core::{create_space, DataSet, DistType, Space};

/// Zero-mean Gaussian points whose j-th coordinate has standard deviation `decay^j`.
fn gaussian(space: &dyn Space, n: usize, dim: usize, decay: f64, seed: u64) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataSet::from_records(
        space.name(),
        (0..n).map(|i| {
            let v: Vec<f64> = (0..dim).map(|j| decay.powi(j as i32) * rng.sample::<f64, _>(StandardNormal)).collect();
            space.from_dense(i as u32, 0, &v).unwrap()
        }),
    )
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    cov / (vx * vy).sqrt()
}

/// Original and projected distances over random pairs.
fn distance_pairs(data: &DataSet, proj_dim: usize, squared: bool) -> (Vec<f64>, Vec<f64>) {
    let space = create_space("l2", DistType::Float).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let proj = Projection::new(ProjKind::Rand, &*space, data, proj_dim, 0, &mut rng).unwrap();
    let projected: Vec<Vec<f64>> = data.iter().map(|r| proj.project(&*space, r.view()).unwrap()).collect();
    let (mut orig, mut low) = (Vec::new(), Vec::new());
    while orig.len() < 10_000 {
        let (i, j) = (rng.random_range(0..data.len()), rng.random_range(0..data.len()));
        if i == j {
            continue;
        }
        let (d, p) = (space.distance(data.view(i), data.view(j)), l2(&projected[i], &projected[j]));
        orig.push(if squared { d * d } else { d });
        low.push(if squared { p * p } else { p });
    }
    (orig, low)
}

#[test]
fn random_projection_preserves_distances_of_anisotropic_data() {
    let space = create_space("l2", DistType::Float).unwrap();
    let data = gaussian(&*space, 2000, 64, 0.8, 5);
    let (orig, low) = distance_pairs(&data, 16, false);
    let r = pearson(&orig, &low);
    assert!(r >= 0.9, "distance correlation {r}");
}

// Without structure, 16 of 64 iid coordinates share exactly a quarter of the squared norm's
// variance, so the squared-distance correlation is sqrt(16/64) whatever the directions are.
#[test]
fn random_projection_of_isotropic_data_hits_the_chi_square_bound() {
    let space = create_space("l2", DistType::Float).unwrap();
    let data = gaussian(&*space, 2000, 64, 1.0, 5);
    let (orig, low) = distance_pairs(&data, 16, true);
    let r = pearson(&orig, &low);
    assert!((r - 0.5).abs() < 0.05, "squared distance correlation {r}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projections_are_deterministic(seed in 0u64..1000, dim in 1usize..6) {
        let space = create_space("l2", DistType::Float).unwrap();
        let data = common::uniform(&*space, 60, 8, seed);
        for kind in [ProjKind::Rand, ProjKind::FastMap, ProjKind::RandRefPt, ProjKind::Perm] {
            let a = Projection::new(kind, &*space, &data, dim, 0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = Projection::new(kind, &*space, &data, dim, 0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for r in data.iter() {
                let pa = a.project(&*space, r.view()).unwrap();
                prop_assert_eq!(pa.len(), dim);
                prop_assert_eq!(pa, b.project(&*space, r.view()).unwrap());
            }
        }
    }
}
