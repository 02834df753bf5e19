mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use varlift::pcf::{parse_program, typecheck_program, Datum, EvalError, Interp, Type};
use varlift::vvalue::{apply, lifted_case, Var, VarError};

use common::{partitions_configurations, random_model, random_var, random_vsrc, stream, UNARY};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn apply_commutes_with_indexing(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = random_model(&mut rng, 6);
        let fs = rng.gen_range(1..=UNARY.len());
        let vf = random_var(&mut rng, &model, &UNARY[..fs]);
        let vx = random_var(&mut rng, &model, &[0u64, 1, 5, 12, 40]);
        let out: Var<u64> = apply(&vf, &vx);
        prop_assert!(out.check_invariants().is_ok());
        prop_assert!(partitions_configurations(&out));
        for cfg in model.valid_configs() {
            let f = vf.index(cfg).unwrap();
            let x = vx.index(cfg).unwrap();
            prop_assert_eq!(*out.index(cfg).unwrap(), f(x));
        }
        prop_assert!(out.len() <= vf.len() * vx.len());
    }

    #[test]
    fn lifted_case_commutes_with_indexing(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = random_model(&mut rng, 5);
        let scrutinee = random_var(&mut rng, &model, &[0u64, 1, 3, 8, 20]);
        // case x of 0 -> 100 | n <= 3 -> n * 10 | n -> n + 1
        let split = |x: &u64| -> Result<usize, VarError> { Ok(if *x == 0 { 0 } else if *x <= 3 { 1 } else { 2 }) };
        let plain = |x: u64| match x { 0 => 100, n if n <= 3 => n * 10, n => n + 1 };
        let mut contexts = Vec::new();
        let out = lifted_case(
            &scrutinee,
            3,
            split,
            |x, _| Ok(vec![*x]),
            |k, ctx, binds| {
                contexts.push(ctx.clone());
                let x = &binds[0];
                Ok(match k {
                    0 => x.map(|_| 100),
                    1 => x.map(|n| n * 10),
                    _ => x.map(|n| n + 1),
                })
            },
        )
        .unwrap();
        prop_assert!(out.check_invariants().is_ok());
        for cfg in model.valid_configs() {
            prop_assert_eq!(*out.index(cfg).unwrap(), plain(*scrutinee.index(cfg).unwrap()));
        }
        for (i, a) in contexts.iter().enumerate() {
            prop_assert!(a.is_sat_quiet());
            for b in &contexts[i + 1..] {
                prop_assert!(!a.and(b).is_sat_quiet());
            }
        }
    }

    #[test]
    fn token_streams_derive_every_product(seed in 0u64..10_000) {
        let file = random_vsrc(seed, 6, 200);
        let s = stream(&file);
        let cells = s.to_var_list();
        for c in &cells {
            prop_assert!(c.check_invariants().is_ok());
        }
        for cfg in file.model.valid_configs() {
            let product: Vec<u64> = cells
                .iter()
                .map(|c| *c.index(cfg).unwrap())
                .filter(|&code| code != 0)
                .collect();
            prop_assert_eq!(&product, &s.derive_product(cfg));
        }
    }

    #[test]
    fn effective_combinations_partition_configurations(seed in 0u64..10_000) {
        let file = random_vsrc(seed, 6, 200);
        let s = stream(&file);
        let classes = s.effective_combinations();
        let pcs = Var::fragment(&file.model, classes.iter().map(|(pc, cfg)| (*cfg, pc.clone())).collect());
        prop_assert!(pcs.check_invariants().is_ok());
        let products: Vec<Vec<u64>> = classes.iter().map(|(_, cfg)| s.derive_product(*cfg)).collect();
        for (i, p) in products.iter().enumerate() {
            prop_assert!(!products[i + 1..].contains(p), "two classes share a product");
        }
        for cfg in file.model.valid_configs() {
            let rep = pcs.index(cfg).unwrap();
            prop_assert_eq!(s.derive_product(cfg), s.derive_product(*rep));
        }
    }

    #[test]
    fn evaluation_preserves_types_and_is_deterministic(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let want = [Ty::Nat, Ty::Bool, Ty::List, Ty::Pair][rng.gen_range(0..4)];
        let mut gen = TermGen { rng, fresh: 0 };
        let term = gen.term(want, 4, &mut Vec::new());
        let src = format!("(main {term})");
        let p = parse_program(&src).unwrap();
        let types = typecheck_program(&p).unwrap();
        prop_assert_eq!(types.main.clone(), Some(want.ty()), "{}", src);

        let run = || {
            let mut i = Interp::new();
            i.set_fuel(1_000_000);
            let r = i.run(&p).and_then(|v| i.to_datum(&v.unwrap()));
            (r, i.counters().clone())
        };
        let (first, c1) = run();
        let (second, c2) = run();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(c1, c2);
        match first {
            Ok(d) => prop_assert!(want.holds(&d), "{} gave {}", src, d),
            Err(e) => prop_assert!(
                matches!(e, EvalError::DivisionByZero | EvalError::EmptyList(_)),
                "{} failed with {}", src, e
            ),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Ty {
    Nat,
    Bool,
    List,
    Pair,
}

impl Ty {
    fn ty(self) -> Type {
        match self {
            Ty::Nat => Type::Nat,
            Ty::Bool => Type::Bool,
            Ty::List => Type::list(Type::Nat),
            Ty::Pair => Type::pair(Type::Nat, Type::Bool),
        }
    }

    fn holds(self, d: &Datum) -> bool {
        match (self, d) {
            (Ty::Nat, Datum::Nat(_)) | (Ty::Bool, Datum::Bool(_)) => true,
            (Ty::List, Datum::List(items)) => items.iter().all(|i| Ty::Nat.holds(i)),
            (Ty::Pair, Datum::Pair(a, b)) => Ty::Nat.holds(a) && Ty::Bool.holds(b),
            _ => false,
        }
    }
}

/// Random well-typed closed terms over nats, bools, nat lists and
/// (nat, bool) pairs.
struct TermGen {
    rng: StdRng,
    fresh: usize,
}

impl TermGen {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn term(&mut self, ty: Ty, depth: u32, scope: &mut Vec<String>) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.25);
        match ty {
            Ty::Nat if leaf => {
                if !scope.is_empty() && self.rng.gen_bool(0.5) {
                    scope[self.rng.gen_range(0..scope.len())].clone()
                } else {
                    self.rng.gen_range(0..6).to_string()
                }
            }
            Ty::Nat => match self.rng.gen_range(0..8) {
                0..=2 => {
                    let op = ["+", "-", "*", "/"][self.rng.gen_range(0..4)];
                    format!("({op} {} {})", self.term(Ty::Nat, depth - 1, scope), self.term(Ty::Nat, depth - 1, scope))
                }
                3 => format!(
                    "(if {} {} {})",
                    self.term(Ty::Bool, depth - 1, scope),
                    self.term(Ty::Nat, depth - 1, scope),
                    self.term(Ty::Nat, depth - 1, scope)
                ),
                4 => format!("(fst {})", self.term(Ty::Pair, depth - 1, scope)),
                5 => format!("(head {})", self.term(Ty::List, depth - 1, scope)),
                6 => {
                    let v = self.var();
                    let arg = self.term(Ty::Nat, depth - 1, scope);
                    scope.push(v.clone());
                    let body = self.term(Ty::Nat, depth - 1, scope);
                    scope.pop();
                    format!("((lambda ({v} nat) {body}) {arg})")
                }
                _ => {
                    let (h, t) = (self.var(), self.var());
                    let list = self.term(Ty::List, depth - 1, scope);
                    let empty = self.term(Ty::Nat, depth - 1, scope);
                    scope.push(h.clone());
                    let body = self.term(Ty::Nat, depth - 1, scope);
                    scope.pop();
                    format!("(case {list} (nil {empty}) ((cons {h} {t}) {body}))")
                }
            },
            Ty::Bool if leaf => ["true", "false"][self.rng.gen_range(0..2)].to_string(),
            Ty::Bool => match self.rng.gen_range(0..4) {
                0 => format!("(iszero {})", self.term(Ty::Nat, depth - 1, scope)),
                1 => format!("(isnil {})", self.term(Ty::List, depth - 1, scope)),
                2 => format!("(snd {})", self.term(Ty::Pair, depth - 1, scope)),
                _ => format!(
                    "(if {} {} {})",
                    self.term(Ty::Bool, depth - 1, scope),
                    self.term(Ty::Bool, depth - 1, scope),
                    self.term(Ty::Bool, depth - 1, scope)
                ),
            },
            Ty::List if leaf => "(nil nat)".to_string(),
            Ty::List => match self.rng.gen_range(0..3) {
                0 => format!("(tail {})", self.term(Ty::List, depth - 1, scope)),
                _ => format!("(cons {} {})", self.term(Ty::Nat, depth - 1, scope), self.term(Ty::List, depth - 1, scope)),
            },
            Ty::Pair => format!(
                "(pair {} {})",
                self.term(Ty::Nat, depth.saturating_sub(1), scope),
                self.term(Ty::Bool, depth.saturating_sub(1), scope)
            ),
        }
    }
}
