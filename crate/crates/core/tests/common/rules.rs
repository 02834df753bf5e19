//! One table row per typing or evaluation rule of PCF+.

use varlift::pcf::{parse_program, parse_term, parse_type, typecheck, typecheck_program, Ctx, Interp, Type};

pub struct TypingCase {
    pub rule: &'static str,
    pub accept: &'static str,
    pub ty: &'static str,
    pub reject: &'static str,
    pub rejected_by: &'static str,
}

/// Terms may use `x : nat` and `l : (list nat)`; rejected terms may also
/// mention the unbound `unbound`.
pub const TYPING: &[TypingCase] = &[
    TypingCase { rule: "T-var", accept: "x", ty: "nat", reject: "unbound", rejected_by: "T-var" },
    TypingCase { rule: "T-abs", accept: "(lambda (y bool) (if y x 0))", ty: "(-> bool nat)", reject: "(lambda (y bool) (+ y 1))", rejected_by: "T-binop" },
    TypingCase { rule: "T-app", accept: "((lambda (y nat) (iszero y)) 3)", ty: "bool", reject: "((lambda (y nat) y) true)", rejected_by: "T-app" },
    TypingCase { rule: "T-app", accept: "(((lambda (a nat) (lambda (b bool) b)) 1) true)", ty: "bool", reject: "(x 1)", rejected_by: "T-app" },
    TypingCase { rule: "T-fix", accept: "(fix (lambda (f (-> nat nat)) (lambda (n nat) n)))", ty: "(-> nat nat)", reject: "(fix (lambda (y nat) true))", rejected_by: "T-fix" },
    TypingCase { rule: "T-fix", accept: "(fix (lambda (y nat) 5))", ty: "nat", reject: "(fix 3)", rejected_by: "T-fix" },
    TypingCase { rule: "T-numeral", accept: "42", ty: "nat", reject: "(if 42 1 2)", rejected_by: "T-cond" },
    TypingCase { rule: "T-true", accept: "true", ty: "bool", reject: "(+ true 1)", rejected_by: "T-binop" },
    TypingCase { rule: "T-false", accept: "false", ty: "bool", reject: "(iszero false)", rejected_by: "T-iszero" },
    TypingCase { rule: "T-binop", accept: "(+ x 2)", ty: "nat", reject: "(* 1 false)", rejected_by: "T-binop" },
    TypingCase { rule: "T-binop", accept: "(/ (- x 1) (* 2 3))", ty: "nat", reject: "(- (nil nat) 1)", rejected_by: "T-binop" },
    TypingCase { rule: "T-iszero", accept: "(iszero x)", ty: "bool", reject: "(iszero (nil nat))", rejected_by: "T-iszero" },
    TypingCase { rule: "T-cond", accept: "(if (iszero x) (nil nat) l)", ty: "(list nat)", reject: "(if true 1 false)", rejected_by: "T-cond" },
    TypingCase { rule: "T-cond", accept: "(if true false true)", ty: "bool", reject: "(if 1 2 3)", rejected_by: "T-cond" },
    TypingCase { rule: "T-case", accept: "(case l (nil 0) ((cons h t) h))", ty: "nat", reject: "(case x (true 1) (n 2))", rejected_by: "T-case" },
    TypingCase { rule: "T-case", accept: "(case (pair x true) ((pair 0 b) b) ((pair n b) false))", ty: "bool", reject: "(case x (0 1) (n false))", rejected_by: "T-case" },
    TypingCase { rule: "T-pair", accept: "(pair x (nil bool))", ty: "(pair nat (list bool))", reject: "(iszero (pair 1 2))", rejected_by: "T-iszero" },
    TypingCase { rule: "T-fst", accept: "(fst (pair x true))", ty: "nat", reject: "(fst x)", rejected_by: "T-fst" },
    TypingCase { rule: "T-snd", accept: "(snd (pair x true))", ty: "bool", reject: "(snd l)", rejected_by: "T-snd" },
    TypingCase { rule: "T-nil", accept: "(nil (pair nat bool))", ty: "(list (pair nat bool))", reject: "(cons true (nil nat))", rejected_by: "T-cons" },
    TypingCase { rule: "T-cons", accept: "(cons x l)", ty: "(list nat)", reject: "(cons 1 2)", rejected_by: "T-cons" },
    TypingCase { rule: "T-isnil", accept: "(isnil l)", ty: "bool", reject: "(isnil 3)", rejected_by: "T-isnil" },
    TypingCase { rule: "T-head", accept: "(head l)", ty: "nat", reject: "(head x)", rejected_by: "T-head" },
    TypingCase { rule: "T-tail", accept: "(tail l)", ty: "(list nat)", reject: "(tail true)", rejected_by: "T-tail" },
];

pub struct EvalCase {
    pub rule: &'static str,
    pub term: &'static str,
    /// The rendered result, or the error message.
    pub expect: Result<&'static str, &'static str>,
}

const FACT: &str = "((fix (lambda (f (-> nat nat)) (lambda (n nat) (if (iszero n) 1 (* n (f (- n 1))))))) 6)";

pub const EVAL: &[EvalCase] = &[
    EvalCase { rule: "E-numeral", term: "7", expect: Ok("7") },
    EvalCase { rule: "E-binop", term: "(+ 3 4)", expect: Ok("7") },
    EvalCase { rule: "E-binop", term: "(* 3 4)", expect: Ok("12") },
    EvalCase { rule: "E-binop", term: "(- 9 4)", expect: Ok("5") },
    EvalCase { rule: "E-binop", term: "(- 4 9)", expect: Ok("0") },
    EvalCase { rule: "E-binop", term: "(/ 9 4)", expect: Ok("2") },
    EvalCase { rule: "E-binop", term: "(/ 1 0)", expect: Err("division by zero") },
    EvalCase { rule: "E-app", term: "((lambda (y nat) (+ y 1)) 4)", expect: Ok("5") },
    EvalCase { rule: "E-app", term: "(((lambda (a nat) (lambda (b nat) (- a b))) 10) 3)", expect: Ok("7") },
    EvalCase { rule: "E-app", term: "((lambda (y nat) 3) (/ 1 0))", expect: Ok("3") },
    EvalCase { rule: "E-fix", term: "((fix ((lambda (k nat) (lambda (f (-> nat nat)) (lambda (n nat) k))) 6)) 1)", expect: Ok("6") },
    EvalCase { rule: "E-fixBeta", term: "(fix (lambda (y nat) 5))", expect: Ok("5") },
    EvalCase { rule: "E-fixBeta", term: FACT, expect: Ok("720") },
    EvalCase { rule: "E-iszero1", term: "(iszero (- 3 3))", expect: Ok("true") },
    EvalCase { rule: "E-iszero2", term: "(iszero 3)", expect: Ok("false") },
    EvalCase { rule: "E-cond1", term: "(if (iszero 0) 1 (/ 1 0))", expect: Ok("1") },
    EvalCase { rule: "E-cond2", term: "(if (iszero 1) (/ 1 0) 2)", expect: Ok("2") },
    EvalCase { rule: "E-case", term: "(case 5 (n 1) (5 2))", expect: Ok("1") },
    EvalCase { rule: "E-case", term: "(case 5 (5 2) (n 1))", expect: Ok("2") },
    EvalCase { rule: "E-case", term: "(case (pair 5 2) ((pair x 2) x) ((pair 5 y) 0))", expect: Ok("5") },
    EvalCase { rule: "E-case", term: "(case (cons 1 (cons 2 (nil nat))) (nil 0) ((cons a (cons b t)) (+ a b)) ((cons a t) a))", expect: Ok("3") },
    EvalCase { rule: "E-case", term: "(case true (false 0) (true 1))", expect: Ok("1") },
    EvalCase { rule: "E-case", term: "(case (pair 1 (/ 1 0)) ((pair a b) a))", expect: Ok("1") },
    EvalCase { rule: "E-case", term: "(case 3 (0 1))", expect: Err("no case alternative matches") },
    EvalCase { rule: "E-isnil1", term: "(isnil (nil nat))", expect: Ok("true") },
    EvalCase { rule: "E-isnil2", term: "(isnil (cons (/ 1 0) (nil nat)))", expect: Ok("false") },
    EvalCase { rule: "E-fst", term: "(fst (pair 4 (/ 1 0)))", expect: Ok("4") },
    EvalCase { rule: "E-snd", term: "(snd (pair (/ 1 0) 6))", expect: Ok("6") },
    EvalCase { rule: "E-head", term: "(head (cons 9 (cons (/ 1 0) (nil nat))))", expect: Ok("9") },
    EvalCase { rule: "E-head", term: "(head (nil nat))", expect: Err("head of an empty list") },
    EvalCase { rule: "E-tail1", term: "(tail (nil nat))", expect: Ok("[]") },
    EvalCase { rule: "E-tail1", term: "(isnil (tail (nil nat)))", expect: Ok("true") },
    EvalCase { rule: "E-tail2", term: "(tail (cons (/ 1 0) (cons 2 (nil nat))))", expect: Ok("[2]") },
];

fn ctx() -> Ctx {
    let mut c = Ctx::new();
    c.push("x".into(), Type::Nat);
    c.push("l".into(), Type::list(Type::Nat));
    c
}

pub fn check_typing(case: &TypingCase) -> Result<(), String> {
    let accept = parse_term(case.accept, &["x", "l"]).map_err(|e| e.to_string())?;
    let want = parse_type(case.ty).map_err(|e| e.to_string())?.normalize();
    match typecheck(&mut ctx(), &accept) {
        Ok(t) if t == want => {}
        Ok(t) => return Err(format!("{}: {} has type {t}, expected {want}", case.rule, case.accept)),
        Err(e) => return Err(format!("{}: {} rejected: {e}", case.rule, case.accept)),
    }
    let reject = parse_term(case.reject, &["x", "l", "unbound"]).map_err(|e| e.to_string())?;
    match typecheck(&mut ctx(), &reject) {
        Ok(t) => Err(format!("{}: {} accepted as {t}", case.rule, case.reject)),
        Err(e) if e.rule == case.rejected_by => Ok(()),
        Err(e) => Err(format!("{}: {} rejected by the wrong rule: {e}", case.rule, case.reject)),
    }
}

pub fn check_eval(case: &EvalCase) -> Result<(), String> {
    let p = parse_program(&format!("(main {})", case.term)).map_err(|e| e.to_string())?;
    typecheck_program(&p).map_err(|e| format!("{}: {e}", case.term))?;
    let mut i = Interp::new();
    let got = i
        .run(&p)
        .and_then(|v| i.to_datum(&v.expect("main")))
        .map(|d| d.to_string())
        .map_err(|e| e.to_string());
    let want = case.expect.map(str::to_string).map_err(str::to_string);
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: {} gave {got:?}, expected {want:?}", case.rule, case.term))
    }
}

/// Runs every row for `rule`, which must have at least one.
pub fn check_rule(rule: &str) -> Result<(), String> {
    let typing: Vec<_> = TYPING.iter().filter(|c| c.rule == rule).collect();
    let eval: Vec<_> = EVAL.iter().filter(|c| c.rule == rule).collect();
    if typing.is_empty() && eval.is_empty() {
        return Err(format!("no cases for {rule}"));
    }
    typing.into_iter().try_for_each(check_typing)?;
    eval.into_iter().try_for_each(check_eval)
}
