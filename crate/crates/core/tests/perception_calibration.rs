use std::time::Instant;

use nesy_core::generate::{generate_scene, GenConfig};
use nesy_core::perception::{hungarian_match, simulate_slots_traced, NoiseProfile, PRESENCE_THRESHOLD};
use nesy_core::scene::SchemaId;
use nesy_core::seed::SeedKey;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

#[test]
fn every_profile_hits_its_targets() {
    let cfg = GenConfig::new(SchemaId::ClevrAttr, 3);
    for name in NoiseProfile::builtin_names() {
        let profile = NoiseProfile::builtin(&name).unwrap();
        let mut rng = SeedKey::new(11).with_str(&name).rng();
        let mut objects = 0u64;
        let mut correct = [0u64; 4];
        let mut presence_right = 0u64;
        let mut slots = 0u64;
        let (mut abs_err, mut comps) = (0.0, 0u64);
        let mut i = 0;
        while objects < 10_000 {
            let scene = generate_scene(&cfg, i).unwrap();
            i += 1;
            let trace = simulate_slots_traced(&scene, &profile, 10, &mut rng).unwrap();
            for (slot, obj) in trace.slots.iter().zip(&trace.object_of_slot) {
                slots += 1;
                let kept = slot.presence_prob >= PRESENCE_THRESHOLD;
                match obj {
                    Some(o) => {
                        let o = &scene.objects()[*o];
                        objects += 1;
                        presence_right += kept as u64;
                        for c in 0..4 {
                            correct[c] += (argmax(&slot.concept_scores[c]) == o.attributes[c] as usize) as u64;
                        }
                        for (a, b) in slot.coords.iter().zip(&o.position) {
                            abs_err += (a - b).abs();
                            comps += 1;
                        }
                    }
                    None => presence_right += (!kept) as u64,
                }
            }
        }
        for (c, concept) in ["shape", "color", "size", "material"].iter().enumerate() {
            let got = correct[c] as f64 / objects as f64;
            let want = profile.concept_accuracy[*concept];
            assert!((got - want).abs() <= 0.02, "{name} {concept}: {got} vs {want}");
        }
        let presence = presence_right as f64 / slots as f64;
        assert!((presence - profile.presence_accuracy).abs() <= 0.02, "{name} presence {presence}");
        let mae = abs_err / comps as f64;
        assert!((mae - profile.coord_mae).abs() <= 0.05 * profile.coord_mae + 1e-12, "{name} mae {mae}");
    }
}

#[test]
fn half_normal_sigma_reproduces_mae() {
    // E|N(0, s)| = s * sqrt(2/pi); check the inversion by Monte Carlo
    let profile = NoiseProfile::builtin("sup15").unwrap();
    let normal = Normal::new(0.0, profile.coord_sigma()).unwrap();
    let mut rng = SeedKey::new(99).rng();
    let n = 1_000_000;
    let mean = (0..n).map(|_| normal.sample(&mut rng).abs()).sum::<f64>() / n as f64;
    assert!((mean - 0.0989).abs() / 0.0989 < 0.005, "{mean}");
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(cost: &[Vec<f64>], perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn five_by_five_matches_exhaustive_search() {
    let perms = permutations(5);
    assert_eq!(perms.len(), 120);
    let mut rng = SeedKey::new(7).rng();
    let matrices: Vec<Vec<Vec<f64>>> =
        (0..1000).map(|_| (0..5).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect()).collect();
    let start = Instant::now();
    let results: Vec<_> = matrices.iter().map(|m| hungarian_match(m).unwrap()).collect();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
    for (m, a) in matrices.iter().zip(&results) {
        assert!((a.cost - brute_force(m, &perms)).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn assignment_is_an_optimal_permutation(
        n in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = SeedKey::new(seed).rng();
        // small integer costs make ties common
        let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0..4) as f64).collect()).collect();
        let a = hungarian_match(&cost).unwrap();
        let mut seen = a.columns.clone();
        seen.sort();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let perms = permutations(n);
        let best = brute_force(&cost, &perms);
        prop_assert!((a.cost - best).abs() < 1e-9);
        // lexicographically smallest among optima
        let first = perms
            .iter()
            .filter(|p| (p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>() - best).abs() < 1e-9)
            .min()
            .unwrap();
        prop_assert_eq!(&a.columns, first);
    }
}
