//! Test suite materialization: predefined cases first, then `random.n`
//! generated cases, serialized to `data.csv`.

pub mod csv;
pub mod rng;

use crate::config::{FunctionSpec, GeneratorExpr, TestPlan};
use crate::value::Value;

pub use self::csv::{parse_suite_csv, write_suite_csv, CsvError};
pub use rng::{fnv1a64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Predefined(usize),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub index: usize,
    pub args: Vec<Value>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSuite {
    pub cases: Vec<TestCase>,
    pub seed: u64,
}

impl TestSuite {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Seed for a grading run: the override when given, otherwise FNV-1a 64 of
/// `task_id ‖ 0x1F ‖ submission_id`.
pub fn derive_seed(task_id: &str, submission_id: &str, override_seed: Option<u64>) -> u64 {
    if let Some(seed) = override_seed {
        return seed;
    }
    let mut bytes = Vec::with_capacity(task_id.len() + submission_id.len() + 1);
    bytes.extend_from_slice(task_id.as_bytes());
    bytes.push(0x1f);
    bytes.extend_from_slice(submission_id.as_bytes());
    fnv1a64(&bytes)
}

/// Draw one value. Strings draw their length first, then one draw per char.
pub fn sample(g: &GeneratorExpr, rng: &mut SplitMix64) -> Value {
    match *g {
        GeneratorExpr::IntRange { lo, hi } => Value::Int(rng.int_in(lo, hi)),
        GeneratorExpr::FloatRange { lo, hi } => Value::Float(rng.float_in(lo, hi)),
        GeneratorExpr::Bool => Value::Bool(rng.coin()),
        GeneratorExpr::StrLen { min_len, max_len } => {
            let len = rng.int_in(min_len as i64, max_len as i64) as usize;
            let s = (0..len)
                .map(|_| char::from(b'a' + rng.int_in(0, 25) as u8))
                .collect();
            Value::Str(s)
        }
    }
}

pub fn generate_suite(plan: &TestPlan, spec: &FunctionSpec, seed: u64) -> TestSuite {
    debug_assert!(plan
        .predefined
        .iter()
        .all(|p| p.args.len() == spec.args.len()));

    let mut cases: Vec<TestCase> = plan
        .predefined
        .iter()
        .enumerate()
        .map(|(i, p)| TestCase {
            index: i,
            args: p.args.clone(),
            origin: Origin::Predefined(i),
        })
        .collect();

    if let Some(random) = &plan.random {
        let mut rng = SplitMix64::new(seed);
        for _ in 0..random.n {
            let args = random.args.iter().map(|g| sample(g, &mut rng)).collect();
            cases.push(TestCase {
                index: cases.len(),
                args,
                origin: Origin::Random,
            });
        }
    }

    TestSuite { cases, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_task_config, RandomSpec};
    use proptest::prelude::*;

    /// Independent FNV-1a: byte-at-a-time over u128 arithmetic reduced mod 2^64.
    fn fnv_oracle(s: &[u8]) -> u64 {
        let mut h: u128 = 14695981039346656037;
        for b in s {
            h ^= *b as u128;
            h = (h * 1099511628211) % (1u128 << 64);
        }
        h as u64
    }

    fn sub_config() -> crate::config::TaskConfig {
        parse_task_config(crate::config::tests::SUB_CONFIG).unwrap()
    }

    #[test]
    fn seed_derivation() {
        let expected = fnv_oracle(b"sub\x1fs001");
        assert_eq!(derive_seed("sub", "s001", None), expected);
        assert_eq!(expected, 0xca15_b956_9aea_65ba);
        assert_eq!(derive_seed("sub", "s001", None), derive_seed("sub", "s001", None));
        assert_eq!(derive_seed("sub", "s001", Some(42)), 42);
        assert_ne!(derive_seed("su", "bs001", None), derive_seed("sub", "s001", None));
    }

    #[test]
    fn degenerate_int_range() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            assert_eq!(sample(&GeneratorExpr::IntRange { lo: 5, hi: 5 }, &mut rng), Value::Int(5));
        }
    }

    #[test]
    fn int_bounds_are_hit() {
        // P(bound missed in 10^4 draws) = (40/41)^10000 ~ 1e-107 per bound.
        let g = GeneratorExpr::IntRange { lo: -20, hi: 20 };
        let mut rng = SplitMix64::new(2024);
        let draws: Vec<i64> = (0..10_000)
            .map(|_| match sample(&g, &mut rng) {
                Value::Int(v) => v,
                other => panic!("{other:?}"),
            })
            .collect();
        assert_eq!(draws.iter().min(), Some(&-20));
        assert_eq!(draws.iter().max(), Some(&20));
    }

    #[test]
    fn strings_are_lowercase_within_length() {
        let g = GeneratorExpr::StrLen { min_len: 2, max_len: 4 };
        let mut rng = SplitMix64::new(9);
        for _ in 0..500 {
            let Value::Str(s) = sample(&g, &mut rng) else { panic!() };
            assert!((2..=4).contains(&s.len()));
            assert!(s.bytes().all(|b| b.is_ascii_lowercase()));
        }
    }

    #[test]
    fn subtraction_suite_layout() {
        let cfg = sub_config();
        let suite = generate_suite(&cfg.test, &cfg.spec, 7);
        assert_eq!(suite.len(), 14);
        let pre: Vec<Vec<Value>> = suite.cases[..4].iter().map(|c| c.args.clone()).collect();
        assert_eq!(
            pre,
            vec![
                vec![Value::Int(10), Value::Int(5)],
                vec![Value::Int(7), Value::Int(15)],
                vec![Value::Int(-1), Value::Int(2)],
                vec![Value::Int(12), Value::Int(0)],
            ]
        );
        for (i, c) in suite.cases.iter().enumerate() {
            assert_eq!(c.index, i);
            if i < 4 {
                assert_eq!(c.origin, Origin::Predefined(i));
            } else {
                assert_eq!(c.origin, Origin::Random);
                for a in &c.args {
                    let Value::Int(v) = a else { panic!() };
                    assert!((-20..=20).contains(v));
                }
            }
        }
        assert_eq!(generate_suite(&cfg.test, &cfg.spec, 7), suite);
        assert_ne!(generate_suite(&cfg.test, &cfg.spec, 8), suite);
    }

    #[test]
    fn no_random_cases() {
        let mut cfg = sub_config();
        cfg.test.random.as_mut().unwrap().n = 0;
        let suite = generate_suite(&cfg.test, &cfg.spec, 1);
        assert_eq!(suite.len(), 4);
        cfg.test.random = None;
        assert_eq!(generate_suite(&cfg.test, &cfg.spec, 1).len(), 4);
    }

    proptest! {
        #[test]
        fn ints_respect_bounds(a in any::<i64>(), b in any::<i64>(), seed in any::<u64>()) {
            let (lo, hi) = (a.min(b), a.max(b));
            let mut rng = SplitMix64::new(seed);
            for _ in 0..16 {
                let Value::Int(v) = sample(&GeneratorExpr::IntRange { lo, hi }, &mut rng) else { unreachable!() };
                prop_assert!(lo <= v && v <= hi);
            }
        }

        #[test]
        fn suite_size_matches_plan(n in 0usize..50, seed in any::<u64>()) {
            let mut cfg = sub_config();
            cfg.test.random = Some(RandomSpec { n, args: vec![GeneratorExpr::IntRange { lo: 0, hi: 3 }; 2], seed: None });
            let suite = generate_suite(&cfg.test, &cfg.spec, seed);
            prop_assert_eq!(suite.len(), 4 + n);
            prop_assert_eq!(suite.seed, seed);
        }
    }
}
