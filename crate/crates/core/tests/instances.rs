//! The shipped instance files are the generator output, byte for byte.
//! Regenerate with `LPOPT_BLESS=1 cargo test --test instances`.

use std::path::PathBuf;

use lpopt::problem::scenarios::{scenario, SCENARIOS};
use lpopt::problem::ProblemInstance;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("instances")
        .join(format!("{name}.toml"))
}

#[test]
fn shipped_files_match_generator() {
    let bless = std::env::var_os("LPOPT_BLESS").is_some();
    for name in SCENARIOS {
        let text = scenario(name).unwrap().to_toml_string().unwrap();
        if bless {
            std::fs::write(path(name), &text).unwrap();
        }
        let shipped = std::fs::read_to_string(path(name)).unwrap();
        assert_eq!(shipped, text, "{name}.toml is stale");
    }
}

#[test]
fn shipped_files_load_to_the_generated_instance() {
    for name in SCENARIOS {
        let loaded = ProblemInstance::load(path(name)).unwrap();
        let built = scenario(name).unwrap();
        assert_eq!(loaded.name, built.name);
        assert_eq!(loaded.catalog, built.catalog);
        assert_eq!(loaded.burned, built.burned);
        assert_eq!(loaded.tactics, built.tactics);
        assert_eq!(loaded.constraints, built.constraints);
        assert_eq!(loaded.coefficients, built.coefficients);
        assert_eq!(loaded.slot_choices(), built.slot_choices());
        assert_eq!(loaded.layout.ascii(), built.layout.ascii());
    }
}
