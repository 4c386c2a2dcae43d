//! The checked-in fixture directory matches the library fixtures. Set
//! `FEXPLAIN_WRITE_FIXTURES=1` to regenerate it.

use std::path::PathBuf;

use fexplain::bench::{load_fixture, write_fixture};
use fexplain::fixtures::{self, Fixture};

fn fixture_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn expected() -> Vec<Fixture> {
    let mut out = vec![fixtures::two_letter(), fixtures::shop_double_remove()];
    for seed in [1, 2] {
        out.push(fixtures::random_fixture(seed, 2, 5));
    }
    out
}

#[test]
fn checked_in_fixtures_match_library() {
    let root = fixture_root();
    if std::env::var_os("FEXPLAIN_WRITE_FIXTURES").is_some() {
        for f in expected() {
            write_fixture(&root.join(&f.name), &f).unwrap();
        }
    }
    for f in expected() {
        let loaded = load_fixture(&root.join(&f.name)).unwrap();
        assert_eq!(loaded.s.equivalent(&f.s).unwrap(), None, "{}", f.name);
        assert_eq!(loaded.b.equivalent(&f.b).unwrap(), None, "{}", f.name);
        assert_eq!(loaded.cex, f.cex, "{}", f.name);
    }
}
