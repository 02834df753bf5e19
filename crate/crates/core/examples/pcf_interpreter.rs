//! Parsing, typechecking and running a PCF+ program.

use varlift::pcf::{parse_program, typecheck_program, Interp};

const SRC: &str = "
;; sum of a list, and a factorial
(define sum
  (fix (lambda (self (-> (list nat) nat))
    (lambda (l (list nat))
      (case l
        (nil 0)
        ((cons h t) (+ h (self t))))))))

(define fact
  (fix (lambda (f (-> nat nat))
    (lambda (n nat) (if (iszero n) 1 (* n (f (- n 1))))))))

(main (pair (sum (cons 1 (cons 2 (cons 3 (nil nat))))) (fact 10)))
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(SRC)?;
    let types = typecheck_program(&program)?;
    for (name, ty) in &types.defs {
        println!("{name} : {ty}");
    }

    let mut interp = Interp::new();
    let v = interp.run(&program)?.expect("program has a main");
    println!("main = {}", interp.render(&v)?);
    let c = interp.counters();
    println!(
        "underlying calls {}, sum entered {} times, fact {} times",
        c.underlying_calls,
        c.calls_to("sum"),
        c.calls_to("fact")
    );

    // Arguments are passed unevaluated: the division never happens.
    let lazy = parse_program("(main ((lambda (x nat) 7) (/ 1 0)))")?;
    let v = Interp::new().run(&lazy)?.unwrap();
    println!("lazy argument: {}", Interp::new().render(&v)?);
    Ok(())
}
