use nested_search::csp::{generate, Constraint, CspInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct 2^n scan; returns (M_A, M_B, M_AB, M_A^S, M_B^S).
fn brute_force(inst: &CspInstance) -> (u64, u64, u64, u64, u64) {
    let n = inst.n();
    let a_mask: u64 = inst.partition_a().iter().map(|&v| 1u64 << v).sum();
    let b_mask = ((1u64 << n) - 1) & !a_mask;
    let within = |mask: u64| -> Vec<&Constraint> {
        inst.constraints()
            .iter()
            .filter(|c| c.variables().iter().all(|&v| mask >> v & 1 == 1))
            .collect()
    };
    let (ca, cb) = (within(a_mask), within(b_mask));
    let mut m_a = 0;
    let mut m_b = 0;
    let mut m_ab = 0;
    let mut proj_a = std::collections::BTreeSet::new();
    let mut proj_b = std::collections::BTreeSet::new();
    for z in 0..1u64 << n {
        if z & !a_mask == 0 && ca.iter().all(|c| c.allows(z)) {
            m_a += 1;
        }
        if z & !b_mask == 0 && cb.iter().all(|c| c.allows(z)) {
            m_b += 1;
        }
        if inst.constraints().iter().all(|c| c.allows(z)) {
            m_ab += 1;
            proj_a.insert(z & a_mask);
            proj_b.insert(z & b_mask);
        }
    }
    (m_a, m_b, m_ab, proj_a.len() as u64, proj_b.len() as u64)
}

#[test]
fn census_matches_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let n = rng.random_range(4..=14u32);
        let k = rng.random_range(2..=3u32.min(n));
        let alpha = rng.random_range(0.0..1.6);
        let x = rng.random_range(0.2..0.8);
        let inst = generate(n, k, alpha, x, i).unwrap();
        let c = inst.census().unwrap();
        let (m_a, m_b, m_ab, m_a_s, m_b_s) = brute_force(&inst);
        assert_eq!(
            (c.m_a, c.m_b, c.m_ab, c.m_a_s, c.m_b_s),
            (m_a, m_b, m_ab, m_a_s, m_b_s),
            "instance {i}"
        );
        assert_eq!(c.m_a_ns, c.m_a - c.m_a_s);
        assert_eq!(c.m_b_ns, c.m_b - c.m_b_s);
        assert!(c.m_ab <= c.m_a_s * c.m_b_s && c.m_a_s * c.m_b_s <= c.m_a * c.m_b);
        assert_eq!(c.rectangular, c.m_a_s * c.m_b_s == c.m_ab);
    }
}

#[test]
fn unconstrained_census_is_full() {
    let inst = generate(10, 2, 0.0, 0.3, 5).unwrap();
    let c = inst.census().unwrap();
    assert_eq!((c.m_a, c.m_b, c.m_ab), (8, 128, 1024));
    assert!(c.rectangular);
}

#[test]
fn census_refuses_large_instances() {
    let inst = generate(31, 2, 1.0, 0.5, 1).unwrap();
    assert!(matches!(
        inst.census(),
        Err(nested_search::Error::TooLarge { .. })
    ));
}

#[test]
fn instance_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("nested-search-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for seed in 0..20 {
        let inst = generate(12, 3, 1.1, 0.4, seed).unwrap();
        let path = dir.join(format!("{seed}.json"));
        inst.write(&path).unwrap();
        let back = CspInstance::read(&path).unwrap();
        assert_eq!(back, inst);
        assert_eq!(
            back.to_json().unwrap(),
            std::fs::read_to_string(&path).unwrap()
        );
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
