//! Fluctuation-aware key rates for 6e9 pump pulses: 0 dB rates, cutoff
//! losses and the loss where AYKI overtakes the weak decoy.
//!
//! Usage: `cargo run --release --example finite_size [u_alpha]`

use pdc_qkd::estimators::{KeyGroups, WeakDecoyConfig};
use pdc_qkd::finite::{cutoff_loss, fluctuation_sweep, FluctuationParams};
use pdc_qkd::protocol::{Protocol, Setup};
use pdc_qkd::search::lin_grid;

fn main() -> pdc_qkd::Result<()> {
    let u_alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10.0);
    let mut setup = Setup::baseline();
    setup.link.insertion_loss_db = 0.5;
    setup.weak = Some(WeakDecoyConfig {
        nu: 0.05,
        signal_fraction: 0.9,
        key_groups: KeyGroups::All,
    });
    let fl = FluctuationParams::new(6e9, u_alpha)?;
    let losses = lin_grid(0.0, 40.0, 81);
    let protocols = [Protocol::Infinite, Protocol::Weak, Protocol::Ayki];
    let rows = fluctuation_sweep(&setup, &protocols, &losses, &fl, (1e-6, 1.0))?;

    let curve = |p: Protocol| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r.protocol == p).map(|r| (r.loss_db, r.rate)).collect()
    };
    println!("u_alpha = {u_alpha}");
    for p in protocols {
        let c = curve(p);
        let at0 = rows.iter().find(|r| r.protocol == p && r.loss_db == 0.0).unwrap();
        println!(
            "{:<9} R(0 dB) = {:.3e}  mu* = {:.4}  nu* = {:.4}  fraction = {:.3}  first zero at {}",
            p.name(),
            at0.rate,
            at0.choice.mu,
            at0.choice.nu,
            at0.choice.signal_fraction,
            cutoff_loss(&c).map_or("none".into(), |l| format!("{l} dB"))
        );
    }
    let (weak, ayki) = (curve(Protocol::Weak), curve(Protocol::Ayki));
    let crossover = weak
        .iter()
        .zip(&ayki)
        .find(|((_, w), (_, a))| a > w)
        .map(|((l, _), _)| *l);
    match crossover {
        Some(l) => println!("AYKI above weak decoy from {l} dB"),
        None => println!("AYKI never above weak decoy"),
    }
    Ok(())
}
