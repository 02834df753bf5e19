use super::*;

const RUNNING: &str = include_str!("../../corpus/running_example.vsrc");
const CONJUNCTION: &str = include_str!("../../corpus/conjunction.vsrc");

fn model(features: &[&str]) -> FeatureModel {
    FeatureModel::new(features.iter().copied()).unwrap()
}

fn cfg(fm: &FeatureModel, on: &[&str]) -> Configuration {
    fm.config(on).unwrap()
}

#[test]
fn nested_directives_conjoin() {
    let fm = model(&["A", "B"]);
    let s = preprocess(RUNNING, &fm).unwrap();
    let ab = fm.parse_pc("A && B").unwrap();
    let a_nb = fm.parse_pc("A && !B").unwrap();
    let line6: Vec<_> = s.tokens.iter().filter(|t| t.line == 6).collect();
    assert_eq!(line6.len(), 5);
    assert!(line6.iter().all(|t| t.pc == ab));
    assert!(s.tokens.iter().filter(|t| t.line == 8).all(|t| t.pc == a_nb));
    assert!(s.tokens.iter().all(|t| t.code != 0));
}

#[test]
fn products_of_the_running_example() {
    let fm = model(&["A", "B"]);
    let s = preprocess(RUNNING, &fm).unwrap();
    assert_eq!(
        s.derive_text(cfg(&fm, &["A", "B"])).join(" "),
        "int foo ( int a ) { return a * 2 ; }"
    );
    let counts: Vec<usize> = [&["A", "B"][..], &["A"], &["B"], &[]]
        .iter()
        .map(|on| s.derive_product(cfg(&fm, on)).len())
        .collect();
    assert_eq!(counts, [13, 15, 18, 20]);
    assert_eq!(
        s.derive_text(cfg(&fm, &[])).join(" "),
        "int foo ( int a , int b ) { return ( a * 2 + b ) ; }"
    );
}

#[test]
fn effective_combination_counts() {
    let fm = model(&["A", "B"]);
    let s = preprocess(RUNNING, &fm).unwrap();
    assert_eq!(s.effective_combinations().len(), 4);

    let fm3 = model(&["A", "B", "C"]);
    let s2 = preprocess(CONJUNCTION, &fm3).unwrap();
    let classes = s2.effective_combinations();
    assert_eq!(classes.len(), 2);
    let abc = fm3.parse_pc("A && B && C").unwrap();
    assert!(classes.iter().any(|(pc, _)| pc.equiv(&abc)));
    assert!(classes.iter().any(|(pc, _)| pc.equiv(&abc.not())));
    assert_eq!(s2.distinct_pcs().len(), 3);
}

#[test]
fn unannotated_source() {
    let fm = model(&["A", "B"]);
    let s = preprocess("int main() { return 0; }", &fm).unwrap();
    assert!(s.tokens.iter().all(|t| t.pc.is_true()));
    let classes = s.effective_combinations();
    assert_eq!(classes.len(), 1);
    assert!(classes[0].0.equiv(&fm.constraint()));
    let p = s.derive_product(cfg(&fm, &[]));
    for c in fm.valid_configs() {
        assert_eq!(s.derive_product(c), p);
    }
    assert!(s.to_var_list().iter().all(|cell| cell.len() == 1 && cell.pairs()[0].1.is_true()));
}

#[test]
fn identical_alternatives_share_a_class() {
    let fm = model(&["A"]);
    let s = preprocess("x\n#ifdef A\ny\n#else\ny\n#endif\n", &fm).unwrap();
    assert_eq!(s.effective_combinations().len(), 1);
}

#[test]
fn padding_cells() {
    let fm = model(&["A", "B"]);
    let s = preprocess(RUNNING, &fm).unwrap();
    let ab = fm.parse_pc("A && B").unwrap();
    let cells = s.to_var_list();
    assert_eq!(cells.len(), s.len());
    let i = s
        .tokens
        .iter()
        .position(|t| t.lexeme == "2" && t.line == 6)
        .unwrap();
    let code = s.tokens[i].code;
    let want = Var::from_pairs(&fm, vec![(code, ab.clone()), (0, ab.not())]).unwrap();
    assert_eq!(cells[i], want);
    for c in fm.valid_configs() {
        let indexed: Vec<u64> = cells
            .iter()
            .map(|cell| *cell.index(c).unwrap())
            .filter(|&x| x != 0)
            .collect();
        assert_eq!(indexed, s.derive_product(c));
    }
}

#[test]
fn constrained_blocks_are_dropped() {
    let fm = FeatureModel::parse("features: A, B\nconstraint: !A || B").unwrap();
    let s = preprocess("#ifdef A\n#ifndef B\ndead\n#endif\nlive\n#endif\n", &fm).unwrap();
    assert_eq!(s.tokens.len(), 1);
    assert_eq!(s.tokens[0].lexeme, "live");
}

#[test]
fn directive_errors() {
    let fm = model(&["A"]);
    let err = |src: &str| preprocess(src, &fm).unwrap_err();
    assert!(matches!(err("#ifdef A\nx\n"), SplError::Unterminated { line: 1 }));
    assert!(matches!(err("x\n#endif\n"), SplError::Unmatched { line: 2, .. }));
    assert!(matches!(err("#else\n"), SplError::Unmatched { .. }));
    assert!(matches!(err("#ifdef A\n#else\n#else\n#endif"), SplError::DuplicateElse { line: 3 }));
    assert!(matches!(err("#ifdef A\n#elif A\n#endif"), SplError::Elif { line: 2 }));
    assert!(matches!(err("#ifdef Z\n#endif"), SplError::Condition { line: 1, .. }));
    assert!(matches!(err("#ifdef\n#endif"), SplError::MissingCondition { .. }));
    assert!(matches!(err("/* x\n"), SplError::Lex { .. }));
}

#[test]
fn ifndef_and_if_expressions() {
    let fm = model(&["A", "B"]);
    let s = preprocess("#ifndef A\nx\n#endif\n#if A || !B\ny\n#else\nz\n#endif", &fm).unwrap();
    let pcs: Vec<String> = s.tokens.iter().map(|t| t.pc.to_expr().to_string()).collect();
    assert!(s.tokens[0].pc.equiv(&fm.parse_pc("!A").unwrap()));
    assert!(s.tokens[1].pc.equiv(&fm.parse_pc("A || !B").unwrap()));
    assert!(s.tokens[2].pc.equiv(&fm.parse_pc("!A && B").unwrap()), "{pcs:?}");
}

#[test]
fn runtime_list_shapes() {
    let fm = model(&["A", "B"]);
    let s = preprocess(RUNNING, &fm).unwrap();
    let mut v = s.to_value();
    let mut n = 0;
    while let Value::Cons(h, t) = v {
        assert!(matches!(h.peek(), Some(Value::Var(_))));
        v = t.peek().unwrap();
        n += 1;
    }
    assert_eq!(n, s.len());
}
