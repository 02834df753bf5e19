use super::*;
use crate::pcf::{parse_program, parse_term, typecheck_program};

const FOO: &str = "
(define bar (lambda (x nat) (lambda (y nat) (* x y))))
(define baz (lambda (z nat) (+ z 1)))
(define foo (lambda (x nat) (lambda (y nat) (lambda (z nat) (+ (bar x y) (baz z))))))
";

const TOKEN_COUNT: &str = "
(define tokenCount
  (fix (lambda (self (-> (list nat) nat))
    (lambda (l (list nat))
      (case l
        (nil 0)
        ((cons h t) (if (iszero h) (self t) (+ 1 (self t)))))))))
";

fn ab() -> FeatureModel {
    FeatureModel::new(["A", "B"]).unwrap()
}

fn nat_var(m: &FeatureModel, pairs: &[(u64, &str)]) -> Value {
    let pairs = pairs
        .iter()
        .map(|&(n, p)| (Value::nat(n), m.parse_pc(p).unwrap()))
        .collect();
    Value::Var(Rc::new(Var::fragment(m, pairs)))
}

fn datum_var(m: &FeatureModel, pairs: &[(u64, &str)]) -> Var<Datum> {
    let pairs = pairs
        .iter()
        .map(|&(n, p)| (Datum::nat(n), m.parse_pc(p).unwrap()))
        .collect();
    Var::fragment(m, pairs)
}

/// Sample arguments; `x = -7` is not a natural, so 7 stands in for it.
fn foo_args(m: &FeatureModel) -> [Value; 3] {
    [
        nat_var(m, &[(7, "A"), (3, "!A")]),
        nat_var(m, &[(1, "A && B"), (8, "A && !B"), (4, "!A && B"), (10, "!A && !B")]),
        nat_var(m, &[(5, "true")]),
    ]
}

fn call_lifted(out: &Program, m: &FeatureModel, f: &str, args: &[Value]) -> (Var<Datum>, crate::pcf::Counters) {
    let mut i = Interp::with_model(m);
    i.load(out);
    let v = i.call_global(&lifted_name(f), args).unwrap();
    let c = i.counters().clone();
    (i.lower_datum(&v).unwrap().compact(), c)
}

#[test]
fn lifted_types() {
    assert_eq!(lift_type(&Type::list(Type::Nat)), Type::list(Type::lifted(Type::Nat)));
    assert_eq!(
        lift_type(&Type::pair(Type::Nat, Type::Bool)),
        Type::pair(Type::lifted(Type::Nat), Type::lifted(Type::Bool))
    );
    assert_eq!(
        lift_type(&Type::func(Type::Nat, Type::Nat)),
        Type::func(Type::lifted(Type::Nat), Type::lifted(Type::Nat))
    );
}

#[test]
fn shallow_foo_calls_foo_once_per_satisfiable_vector() {
    let m = ab();
    let p = parse_program(FOO).unwrap();
    let out = shallow_program(&p, ["foo"]).unwrap();
    typecheck_program(&out.program).unwrap();
    let (r, c) = call_lifted(&out.program, &m, "foo", &foo_args(&m));
    assert_eq!(c.calls_to("foo"), 4);
    assert_eq!(c.calls_to("baz"), 4);
    let expected = datum_var(&m, &[(13, "A && B"), (62, "A && !B"), (18, "!A && B"), (36, "!A && !B")]);
    assert_eq!(r, expected.compact());
}

#[test]
fn deep_foo_shares_the_baz_call() {
    let m = ab();
    let p = parse_program(FOO).unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["foo"])).unwrap();
    let lifted = out.program.def("foo__L").unwrap();
    assert_eq!(
        lifted.to_string(),
        "(lambda (x (lifted nat)) (lambda (y (lifted nat)) (lambda (z (lifted nat)) \
         (apply (liftT +) (apply (liftT bar) x y) (apply (liftT baz) z)))))"
    );
    typecheck_program(&out.program).unwrap();
    let (r, c) = call_lifted(&out.program, &m, "foo", &foo_args(&m));
    assert_eq!(c.calls_to("baz"), 1);
    assert_eq!(c.calls_to("bar"), 4);
    let expected = datum_var(&m, &[(13, "A && B"), (62, "A && !B"), (18, "!A && B"), (36, "!A && !B")]);
    assert_eq!(r, expected.compact());
}

#[test]
fn shallow_arity_is_bounded() {
    let ty = Type::arrows(vec![Type::Nat; 5], Type::Nat);
    assert!(matches!(shallow_lift("f", &ty, 5), Err(LiftError::Arity { .. })));
    assert!(matches!(shallow_lift("f", &ty, 0), Err(LiftError::Arity { .. })));
    let t = shallow_lift("f", &ty, 2).unwrap();
    assert_eq!(t.to_string(), "(lambda (a__0 (lifted nat)) (lambda (a__1 (lifted nat)) (apply (liftT f) a__0 a__1)))");
}

#[test]
fn literals_are_lifted() {
    let p = parse_program("(define seven (lambda (x nat) 7))").unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["seven"])).unwrap();
    assert_eq!(
        out.program.def("seven__L").unwrap().to_string(),
        "(lambda (x (lifted nat)) (liftT 7))"
    );
}

#[test]
fn restricted_continuations() {
    let vars: BTreeSet<Name> = ["x".into(), "z".into()].into();
    let t = parse_term("x", &["x"]).unwrap();
    assert_eq!(restrict_rewrite(&t, &vars, "c").to_string(), "(lambda (c pc) (restrict c x))");
    let t = parse_term("(apply (liftT +) x z)", &["x", "z"]).unwrap();
    assert_eq!(
        restrict_rewrite(&t, &vars, "c").to_string(),
        "(lambda (c pc) (apply (liftT +) (restrict c x) (restrict c z)))"
    );
    let t = parse_term("(lambda (x (lifted nat)) x)", &[]).unwrap();
    assert_eq!(
        restrict_rewrite(&t, &vars, "c").to_string(),
        "(lambda (c pc) (lambda (x (lifted nat)) x))"
    );
}

#[test]
fn deep_conditional_never_divides_by_zero() {
    let m = ab();
    let src = "(define ex (lambda (x nat) (lambda (z nat) (if (iszero x) (+ x z) (/ z x)))))";
    let p = parse_program(src).unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["ex"])).unwrap();
    assert_eq!(
        out.program.def("ex__L").unwrap().to_string(),
        "(lambda (x (lifted nat)) (lambda (z (lifted nat)) (lifted-if (apply (liftT iszero) x) \
         (lambda (ctx__1 pc) (apply (liftT +) (restrict ctx__1 x) (restrict ctx__1 z))) \
         (lambda (ctx__1 pc) (apply (liftT /) (restrict ctx__1 z) (restrict ctx__1 x))))))"
    );
    typecheck_program(&out.program).unwrap();
    let x = nat_var(&m, &[(1, "A"), (2, "!A && B"), (0, "!A && !B")]);
    let z = nat_var(&m, &[(19, "true")]);
    let mut i = Interp::with_model(&m);
    i.load(&out.program);
    let v = i.call_global("ex__L", &[x, z]).unwrap();
    assert_eq!(
        i.lower_datum(&v).unwrap(),
        datum_var(&m, &[(19, "!A && !B"), (19, "A"), (9, "!A && B")])
    );
    assert_eq!(i.counters().calls_to("/"), 2);
}

#[test]
fn deep_token_count_matches_brute_force() {
    let m = ab();
    let p = parse_program(TOKEN_COUNT).unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["tokenCount"])).unwrap();
    typecheck_program(&out.program).unwrap();
    assert_eq!(out.visits, out.node_count);
    assert_eq!(out.visits, p.def("tokenCount").unwrap().node_count());
    let text = out.program.def("tokenCount__L").unwrap().to_string();
    assert!(text.contains("(lifted-case l (nil (lambda (ctx__1 pc) (liftT 0)))"), "{text}");
    assert!(text.contains("(self (restrict ctx__2 t))"), "{text}");

    // A deep list: cells vary independently.
    let cells = [
        nat_var(&m, &[(5, "true")]),
        nat_var(&m, &[(6, "A"), (0, "!A")]),
        nat_var(&m, &[(0, "A && B"), (7, "!(A && B)")]),
        nat_var(&m, &[(8, "true")]),
    ];
    let input = Value::list(cells.iter().cloned());
    let (deep, _) = run_lifted(&out.program, "tokenCount", &m, input.clone()).unwrap();
    let classes = input_classes(&m, &input).unwrap();
    let (brute, _) = brute_force_lift(&p, "tokenCount", &m, &classes).unwrap();
    assert_eq!(deep.compact(), brute.compact());
    let cfg = |names: &[&str]| m.config(names).unwrap();
    assert_eq!(deep.index(cfg(&["A", "B"])).unwrap(), &Datum::nat(3));
    assert_eq!(deep.index(cfg(&["A"])).unwrap(), &Datum::nat(4));
    assert_eq!(deep.index(cfg(&[])).unwrap(), &Datum::nat(3));

    let shallow = shallow_program(&p, ["tokenCount"]).unwrap();
    let (sh, c) = run_lifted(&shallow.program, "tokenCount", &m, input).unwrap();
    assert_eq!(sh.compact(), brute.compact());
    assert_eq!(c.calls_to("tokenCount"), 3 * 5);
}

#[test]
fn single_configuration_matches_plain_eval() {
    let m = FeatureModel::parse("features: A\nconstraint: A").unwrap();
    let p = parse_program(TOKEN_COUNT).unwrap();
    let input = Value::nat_list(&[5, 0, 7]);
    let classes = input_classes(&m, &input).unwrap();
    assert_eq!(classes.len(), 1);
    let (r, _) = brute_force_lift(&p, "tokenCount", &m, &classes).unwrap();
    assert_eq!(r.pairs().len(), 1);
    assert_eq!(r.pairs()[0].0, Datum::nat(2));
}

#[test]
fn product_errors_name_the_configuration() {
    let m = ab();
    let p = parse_program("(define inv (lambda (n nat) (/ 10 n)))").unwrap();
    let classes = vec![
        (m.parse_pc("A").unwrap(), Value::nat(2)),
        (m.parse_pc("!A").unwrap(), Value::nat(0)),
    ];
    let e = brute_force_lift(&p, "inv", &m, &classes).unwrap_err();
    assert_eq!(e.to_string(), "in configuration {}: division by zero");
}

#[test]
fn plans_are_validated() {
    let p = parse_program(FOO).unwrap();
    assert_eq!(
        deep_rewrite(&p, &LiftPlan::deep(["nope"])).unwrap_err(),
        LiftError::Undefined("nope".into())
    );
    let mut plan = LiftPlan::deep(["foo"]);
    plan.shallow.insert("foo".into());
    assert_eq!(deep_rewrite(&p, &plan).unwrap_err(), LiftError::Conflict("foo".into()));
    let clash = parse_program("(define f (lambda (x nat) x)) (define f__L 3)").unwrap();
    assert_eq!(
        deep_rewrite(&clash, &LiftPlan::deep(["f"])).unwrap_err(),
        LiftError::Collision("f__L".into())
    );
    let local = parse_program("(define f (lambda (a__0 nat) a__0))").unwrap();
    assert!(matches!(
        deep_rewrite(&local, &LiftPlan::deep(["f"])),
        Err(LiftError::Collision(_))
    ));
    let resolved = LiftPlan::deep(["foo"]).resolve(&p).unwrap();
    assert!(resolved.shallow.contains("bar"));
    assert_eq!(
        resolved.signatures["foo"],
        Type::arrows(vec![Type::lifted(Type::Nat); 3], Type::lifted(Type::Nat))
    );
}

#[test]
fn deep_callees_are_called_directly() {
    let src = "
(define double (lambda (n nat) (+ n n)))
(define quad (lambda (n nat) (double (double n))))
(define mapd (fix (lambda (self (-> (list nat) (list nat))) (lambda (l (list nat))
  (case l (nil (nil nat)) ((cons h t) (cons (double h) (self t))))))))";
    let p = parse_program(src).unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["double", "quad", "mapd"])).unwrap();
    typecheck_program(&out.program).unwrap();
    assert_eq!(
        out.program.def("quad__L").unwrap().to_string(),
        "(lambda (n (lifted nat)) (double__L (double__L n)))"
    );
    let m = ab();
    let input = Value::list([nat_var(&m, &[(1, "A"), (2, "!A")]), nat_var(&m, &[(3, "true")])]);
    let (r, _) = run_lifted(&out.program, "mapd", &m, input.clone()).unwrap();
    let classes = input_classes(&m, &input).unwrap();
    let (b, _) = brute_force_lift(&p, "mapd", &m, &classes).unwrap();
    assert_eq!(r.compact(), b.compact());
}

#[test]
fn partial_and_first_class_black_boxes() {
    let src = "
(define add (lambda (a nat) (lambda (b nat) (+ a b))))
(define inc (lambda (a nat) (+ a 1)))
(define twice (lambda (f (-> nat nat)) (lambda (n nat) (f (f n)))))
(define both (lambda (f (-> nat nat nat)) (lambda (n nat) (f n n))))
(define g (lambda (n nat) (twice (add 3) n)))
(define k (lambda (n nat) (+ (both + n) (twice inc n))))";
    let p = parse_program(src).unwrap();
    let out = deep_rewrite(&p, &LiftPlan::deep(["twice", "both", "g", "k"])).unwrap();
    typecheck_program(&out.program).unwrap();
    assert!(!out.diagnostics.is_empty());
    let m = ab();
    let x = nat_var(&m, &[(1, "A"), (2, "!A")]);
    let classes = input_classes(&m, &x).unwrap();
    for f in ["g", "k"] {
        let (r, _) = run_lifted(&out.program, f, &m, x.clone()).unwrap();
        let (b, _) = brute_force_lift(&p, f, &m, &classes).unwrap();
        assert_eq!(r.compact(), b.compact(), "{f}");
    }
}
