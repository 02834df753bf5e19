//! Variational values: building, indexing and lifted application.

use varlift::presence::FeatureModel;
use varlift::vvalue::{apply, apply2, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = FeatureModel::new(["A", "B"])?;
    let pc = |s: &str| fm.parse_pc(s);
    let x = Var::from_pairs(&fm, vec![(1u64, pc("A")?), (2, pc("!A && B")?), (0, pc("!A && !B")?)])?;
    let y = Var::from_pairs(&fm, vec![(5u64, pc("A && !B")?), (4, pc("B")?), (3, pc("!A && !B")?)])?;
    println!("x = {x}");
    println!("y = {y}");
    println!("x in {{A}} = {}", x.index(fm.config(&["A"])?)?);

    let iszero = Var::mk_var_t(&fm, |n: &u64| *n == 0);
    let z: Var<bool> = apply(&iszero, &x);
    println!("iszero x = {}", z.compact());

    let plus = Var::mk_var_t(&fm, |a: &u64, b: &u64| a + b);
    let sum: Var<u64> = apply2(&plus, &x, &y);
    println!("x + y = {sum}");
    sum.check_invariants()?;

    // Every configuration sees the plain sum of its own x and y.
    for cfg in fm.valid_configs() {
        assert_eq!(sum.index(cfg)?, &(x.index(cfg)? + y.index(cfg)?));
    }
    Ok(())
}
