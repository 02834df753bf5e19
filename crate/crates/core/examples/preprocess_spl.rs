//! Turning an `#ifdef`-annotated file into a variational token stream.

use varlift::presence::FeatureModel;
use varlift::spl::preprocess;

const SRC: &str = "int foo
#ifdef A
  (int a) {
#ifdef B
    return a * 2;
#else
    return a * 3 + 1;
#endif
#else
  (int a, int b) {
    return (a
#ifdef B
    +
#else
    * 2 +
#endif
    b);
#endif
}
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = FeatureModel::new(["A", "B"])?;
    let stream = preprocess(SRC, &fm)?;
    println!("{} tokens, {} distinct presence conditions", stream.len(), stream.distinct_pcs().len());
    print!("{}", stream.dump());

    for (pc, cfg) in stream.effective_combinations() {
        let text = stream.derive_text(cfg);
        println!("[{pc}] {} tokens: {}", text.len(), text.join(" "));
    }

    // The lifted list pads absent tokens with the empty code 0.
    let cells = stream.to_var_list();
    println!("first variational cell: {}", cells.iter().find(|c| c.len() > 1).unwrap());
    Ok(())
}
