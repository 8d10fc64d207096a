//! Key rate from raw detection counts, as read by `qkd analyze`.
//!
//! Usage: `cargo run --example analyze_measured [counts.csv]`

use std::path::Path;

use pdc_qkd::commands::analyze_counts;
use pdc_qkd::protocol::Protocol;
use pdc_qkd::scenario::load_config;

fn main() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let cfg = load_config(&configs.join("measured.json")).expect("bundled config");
    let data = std::env::args()
        .nth(1)
        .map_or_else(|| configs.join("measured_counts.csv"), Into::into);
    let text = std::fs::read_to_string(&data).expect("counts file");
    for protocol in [Protocol::NonDecoy, Protocol::Ayki, Protocol::Passive] {
        match analyze_counts(&cfg, protocol, &text) {
            Ok(a) => println!("{}", a.text_report()),
            Err(e) => println!("{protocol}: {e}\n"),
        }
    }
}
