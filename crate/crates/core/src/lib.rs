//! Variability-aware execution of plain functional programs.
//!
//! A software product line is a family of programs selected by boolean
//! features. Rather than analysing every product separately, `varlift`
//! runs one analysis over all of them at once:
//!
//! - [`presence`]: feature models and presence conditions (BDD backed).
//! - [`vvalue`]: variational values, lifted application and lifted case.
//! - [`pcf`]: a small call-by-need functional language with lifted types.
//! - [`lifting`]: shallow and deep rewriting of programs to lifted form.
//! - [`spl`]: `#ifdef` preprocessing into variational token streams.
//! - [`analyses`]: bundled analyses, run brute force, shallow or deep.
//! - [`bench`](mod@bench): corpus loading, synthetic files and counter reports.

pub mod analyses;
pub mod bench;
pub mod lifting;
pub mod pcf;
pub mod presence;
pub mod spl;
pub mod vvalue;
