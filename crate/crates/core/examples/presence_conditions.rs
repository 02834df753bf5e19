//! Feature models, presence conditions and configurations.

use varlift::presence::FeatureModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fm = FeatureModel::parse("features: EPOLL, KQUEUE, TIMEOUTS\nconstraint: !(EPOLL && KQUEUE)")?;
    println!("{} valid configurations:", fm.valid_configs().len());
    for cfg in fm.valid_configs() {
        println!("  {}", fm.render_config(cfg));
    }

    let both = fm.parse_pc("EPOLL && KQUEUE")?;
    let either = fm.parse_pc("EPOLL || KQUEUE")?;
    println!("EPOLL && KQUEUE satisfiable: {}", both.is_sat());
    println!("EPOLL || KQUEUE is a tautology: {}", either.is_taut());

    // Canonical form: equivalent conditions compare equal.
    let a = fm.parse_pc("!(EPOLL || TIMEOUTS)")?;
    let b = fm.parse_pc("!EPOLL && !TIMEOUTS")?;
    println!("{a}  ==  {b}: {}", a.equiv(&b));

    let cfg = fm.config(&["KQUEUE", "TIMEOUTS"])?;
    println!("{} satisfies {either}: {}", fm.render_config(cfg), either.satisfied_by(cfg));
    println!("satisfiability checks so far: {}", fm.sat_checks());
    Ok(())
}
