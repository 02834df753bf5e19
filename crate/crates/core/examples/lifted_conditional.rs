//! A deep-lifted conditional restricts each branch to its own
//! configurations before evaluating it, so `z / x` never sees `x = 0`.

use std::rc::Rc;

use varlift::lifting::{deep_rewrite, LiftPlan};
use varlift::pcf::{parse_program, Interp, Value};
use varlift::presence::FeatureModel;
use varlift::vvalue::Var;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = FeatureModel::new(["A", "B"])?;
    let src = "(define safe (lambda (x nat) (lambda (z nat) (if (iszero x) (+ x z) (/ z x)))))";
    let out = deep_rewrite(&parse_program(src)?, &LiftPlan::deep(["safe"]))?;
    println!("{}", out.program.def("safe__L").unwrap());

    let pcs = |s: &str| fm.parse_pc(s).unwrap();
    let x = Var::from_pairs(
        &fm,
        vec![(Value::nat(1), pcs("A")), (Value::nat(2), pcs("!A && B")), (Value::nat(0), pcs("!A && !B"))],
    )?;
    let z = Var::mk_var_t(&fm, Value::nat(19));

    let mut interp = Interp::with_model(&fm);
    interp.load(&out.program);
    let v = interp.call_global("safe__L", &[Value::Var(Rc::new(x)), Value::Var(Rc::new(z))])?;
    println!("result {}", interp.lower_datum(&v)?);
    println!("divisions performed: {}", interp.counters().calls_to("/"));
    Ok(())
}
