//! Reference values computed independently at 60-digit precision.

use num_bigint::BigInt;
use num_rational::BigRational;

use expcert::exact::{
    approx, containment_probability, default_delta, extreme_lemma_check, union_bound_exhaustive, LemmaCase, RegionSpec,
};
use expcert::interval::Interval;
use expcert::profiles::builtin_profile;
use expcert::verifier::{q_eval, verify_claim};

fn rat(n: i64, m: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(m))
}

fn close(x: f64, want: f64, rel: f64) -> bool {
    ((x - want) / want).abs() <= rel
}

#[test]
fn containment_example() {
    // C(10,5) / C(30,5)
    assert_eq!(containment_probability(1, 2, 6, 5).unwrap(), rat(252, 142_506));
    assert_eq!(containment_probability(1, 1, 2, 2).unwrap(), rat(1, 6));
}

#[test]
fn q_reference_points() {
    let q = |d, a, b| q_eval(d, &Interval::point(a), &Interval::point(b)).unwrap();
    assert!(q(6, 0.5, 0.75).contains(0.961_667_039_652_796_8));
    assert!(q(8, 0.1, 0.3).contains(0.871_898_284_774_438));
    assert!(q(6, 0.5, 0.5).contains(0.0625));
}

#[test]
fn certified_sup_dominates_true_boundary_maximum() {
    let maxima = [
        (5, 0.999_805_212),
        (6, 0.999_765_249),
        (7, 0.999_725_359),
        (8, 0.999_619_360),
    ];
    for (d, truth) in maxima {
        let t = verify_claim(d).unwrap();
        assert!(t.verified(), "d={d}: {}", t.summary());
        let sup = t.max_certified_sup().unwrap();
        assert!(sup >= truth && sup < 0.9999, "d={d}: {sup}");
    }
}

#[test]
fn exhaustive_union_bound_values() {
    let table = [
        (8, 10, 0.021_734),
        (8, 20, 0.003_577),
        (8, 50, 5.09e-5),
        (8, 100, 8.32e-8),
        (8, 200, 1.96e-10),
        (5, 20, 0.012_028),
        (5, 100, 1.01e-4),
        (5, 200, 8.35e-7),
    ];
    for (d, v, want) in table {
        let spec = RegionSpec::new(v, builtin_profile(d).unwrap());
        let got = approx(&union_bound_exhaustive(&spec).unwrap());
        assert!(close(got, want, 5e-3), "d={d} v={v}: {got} vs {want}");
    }
    let spec = RegionSpec::new(10, builtin_profile(5).unwrap());
    let got = approx(&union_bound_exhaustive(&spec).unwrap());
    assert!(close(got, 0.007_437_112_795_366_4, 1e-12));
}

#[test]
fn lemma_step_ratio_beats_hand_estimate() {
    let delta = default_delta();
    let estimate = approx(&LemmaCase::new(2, 5).unwrap().ratio_estimate(&delta));
    assert!(close(estimate, 9_763_183.59, 1e-8), "{estimate}");
    for case in LemmaCase::ALL {
        for v in [100_000, 300_000, 1_000_000] {
            let r = extreme_lemma_check(case, v, &delta).unwrap();
            assert!(r.passed(), "{case} v={v}");
            assert!(r.estimate_dominated(), "{case} v={v}");
        }
    }
    let r = extreme_lemma_check(LemmaCase::new(2, 5).unwrap(), 100_000, &delta).unwrap();
    assert!(close(approx(&r.rows[0].scaled_p), 1.935e-9, 1e-3));
}
