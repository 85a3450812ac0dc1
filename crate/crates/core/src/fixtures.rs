//! Small rewrite systems used by the tests, benches and documentation.
//!
//! Each function parses the matching file under `fixtures/`. Labels are
//! 0-based in file order.

use crate::rewriting::Trs;
use crate::tpdb::parse_trs;

macro_rules! fixture {
    ($(#[$doc:meta])* $name:ident, $file:literal) => {
        $(#[$doc])*
        pub fn $name() -> Trs {
            parse_trs(include_str!(concat!("../fixtures/", $file)))
                .expect(concat!("fixture ", $file))
                .trs
        }
    };
}

fixture!(
    /// `nat`, `hd`, `tl`, `inc` over streams; one critical pair, linear.
    streams,
    "streams.trs"
);
fixture!(
    /// [`streams`] plus the duplicating rule `d(x:y) -> x:(x:d(y))`.
    streams_with_d,
    "streams_d.trs"
);
fixture!(
    /// Left-linear but not right-linear; not confluent.
    f_aa,
    "f_aa.trs"
);
fixture!(
    /// Non-terminating and confluent.
    fgh,
    "fgh.trs"
);
fixture!(
    /// Non-left-linear, no critical pairs, not confluent.
    nonlinear_fx,
    "nonlinear_fx.trs"
);
fixture!(orthogonal_dup, "orthogonal_dup.trs");
fixture!(
    /// `f(a) -> c, f(b) -> d, a -> b, b -> a`; not confluent.
    cps_prime,
    "cps_prime.trs"
);
fixture!(two_constants, "two_constants.trs");
fixture!(development_counter, "development_counter.trs");
fixture!(diamond, "diamond.trs");

/// Raw text of a fixture file, for CLI-level tests.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "streams" => include_str!("../fixtures/streams.trs"),
        "streams_d" => include_str!("../fixtures/streams_d.trs"),
        "f_aa" => include_str!("../fixtures/f_aa.trs"),
        "fgh" => include_str!("../fixtures/fgh.trs"),
        "nonlinear_fx" => include_str!("../fixtures/nonlinear_fx.trs"),
        "orthogonal_dup" => include_str!("../fixtures/orthogonal_dup.trs"),
        "cps_prime" => include_str!("../fixtures/cps_prime.trs"),
        "two_constants" => include_str!("../fixtures/two_constants.trs"),
        "development_counter" => include_str!("../fixtures/development_counter.trs"),
        "diamond" => include_str!("../fixtures/diamond.trs"),
        _ => return None,
    })
}

/// Every fixture with its short name.
pub fn all() -> Vec<(&'static str, Trs)> {
    vec![
        ("streams", streams()),
        ("streams_d", streams_with_d()),
        ("f_aa", f_aa()),
        ("fgh", fgh()),
        ("nonlinear_fx", nonlinear_fx()),
        ("orthogonal_dup", orthogonal_dup()),
        ("cps_prime", cps_prime()),
        ("two_constants", two_constants()),
        ("development_counter", development_counter()),
        ("diamond", diamond()),
    ]
}
