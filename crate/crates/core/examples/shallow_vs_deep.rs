//! Shallow and deep lifting of the same function, compared by counters.

use std::rc::Rc;

use varlift::lifting::{deep_rewrite, lifted_name, shallow_program, LiftPlan};
use varlift::pcf::{parse_program, typecheck_program, Interp, Program, Value};
use varlift::presence::FeatureModel;
use varlift::vvalue::Var;

const SRC: &str = "
(define bar (lambda (x nat) (lambda (y nat) (* x y))))
(define baz (lambda (z nat) (+ z 1)))
(define foo (lambda (x nat) (lambda (y nat) (lambda (z nat) (+ (bar x y) (baz z))))))
";

fn var(fm: &FeatureModel, pairs: &[(u64, &str)]) -> Value {
    let pairs = pairs
        .iter()
        .map(|&(n, p)| (Value::nat(n), fm.parse_pc(p).unwrap()))
        .collect();
    Value::Var(Rc::new(Var::from_pairs(fm, pairs).unwrap()))
}

fn call(program: &Program, fm: &FeatureModel, args: &[Value]) -> Result<(), Box<dyn std::error::Error>> {
    let mut interp = Interp::with_model(fm);
    interp.load(program);
    let v = interp.call_global(&lifted_name("foo"), args)?;
    let c = interp.counters().clone();
    println!("  result {}", interp.lower_datum(&v)?.compact());
    println!("  foo x{}, bar x{}, baz x{}", c.calls_to("foo"), c.calls_to("bar"), c.calls_to("baz"));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = FeatureModel::new(["A", "B"])?;
    let args = [
        var(&fm, &[(7, "A"), (3, "!A")]),
        var(&fm, &[(1, "A && B"), (8, "A && !B"), (4, "!A && B"), (10, "!A && !B")]),
        var(&fm, &[(5, "true")]),
    ];
    let program = parse_program(SRC)?;

    let shallow = shallow_program(&program, ["foo"])?;
    println!("shallow: {}", shallow.program.def("foo__L").unwrap());
    call(&shallow.program, &fm, &args)?;

    let deep = deep_rewrite(&program, &LiftPlan::deep(["foo"]))?;
    typecheck_program(&deep.program)?;
    println!("deep: {}", deep.program.def("foo__L").unwrap());
    call(&deep.program, &fm, &args)?;
    println!("rewriter visited {} of {} nodes", deep.visits, deep.node_count);
    Ok(())
}
