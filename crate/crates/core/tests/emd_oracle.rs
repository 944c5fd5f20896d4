mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use webcolor::color::Lab;
use webcolor::fixed::{emd, transport_cost, ColorHistogram};

use support::lp::{simplex_min, transport_lp};

fn random_hist(rng: &mut ChaCha8Rng, centers: &[Lab]) -> ColorHistogram {
    let mass: Vec<f64> = centers
        .iter()
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let mass = if mass.iter().sum::<f64>() == 0.0 {
        vec![1.0; centers.len()]
    } else {
        mass
    };
    ColorHistogram::new(mass, centers.to_vec())
}

#[test]
fn simplex_solves_a_textbook_problem() {
    // min x + 2y  s.t. x + y = 3, x - y + s = 1
    let v = simplex_min(
        &[vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 1.0]],
        &[3.0, 1.0],
        &[1.0, 2.0, 0.0],
    )
    .unwrap();
    assert!((v - 4.0).abs() < 1e-9, "{v}");
}

#[test]
fn emd_matches_lp_on_random_histograms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(1..=10);
        let centers: Vec<Lab> = (0..n)
            .map(|_| {
                [
                    rng.gen_range(0.0..100.0),
                    rng.gen_range(-80.0..80.0),
                    rng.gen_range(-80.0..80.0),
                ]
            })
            .collect();
        let (a, b) = (
            random_hist(&mut rng, &centers),
            random_hist(&mut rng, &centers),
        );
        let cost: Vec<Vec<f64>> = centers
            .iter()
            .map(|x| {
                centers
                    .iter()
                    .map(|y| webcolor::color::lab_distance(x, y))
                    .collect()
            })
            .collect();
        let want = transport_lp(&a.bins, &b.bins, &cost);
        let got = emd(&a, &b).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn rectangular_transport_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (ns, nd) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let mut p: Vec<f64> = (0..ns).map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut q: Vec<f64> = (0..nd).map(|_| rng.gen_range(0.1..1.0)).collect();
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        p.iter_mut().for_each(|v| *v /= sp);
        q.iter_mut().for_each(|v| *v /= sq);
        let cost: Vec<Vec<f64>> = (0..ns)
            .map(|_| (0..nd).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let got = transport_cost(&p, &q, &cost);
        let want = transport_lp(&p, &q, &cost);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}
