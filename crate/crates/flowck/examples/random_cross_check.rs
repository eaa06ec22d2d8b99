//! Seeded random networks and formulas, every verdict checked along two
//! independent routes. This is the crate's core testing discipline in
//! miniature: the clever engines never get to be their own referee.

use flowck::checker::{check_with, verify_witness, CheckOptions};
use flowck::gen::{random_cbfl_formula, random_formula, random_network, FormulaConfig, NetworkConfig};
use flowck::oracle::{brute_check, Budget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ncfg = NetworkConfig { max_internal: 4, cycle_prob: 0.2, ..NetworkConfig::default() };
    let fcfg = FormulaConfig::default();
    let budget = Budget::default();
    let opts = CheckOptions::default();

    let mut agreed = 0;
    let mut witnesses = 0;
    let mut skipped = 0;
    let mut round = 0;
    while agreed < 150 {
        round += 1;
        let net = random_network(&mut rng, &ncfg);
        let f = if round % 2 == 0 {
            random_formula(&mut rng, &fcfg)
        } else {
            random_cbfl_formula(&mut rng, &fcfg)
        };
        // Enumeration refuses oversize instances; skipping them keeps the
        // comparison honest without special-casing the engines.
        let Ok(brute) = brute_check(&net, &f, &budget) else {
            skipped += 1;
            continue;
        };
        let verdict = match check_with(&net, &f, &opts) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        assert_eq!(verdict.satisfied, brute, "engines disagree on {f}");
        if let Some(w) = &verdict.witness {
            if verdict.satisfied {
                assert!(verify_witness(&net, &f, w).unwrap(), "witness fails to replay for {f}");
                witnesses += 1;
            }
        }
        agreed += 1;
    }
    println!("{agreed} verdicts agreed, {witnesses} witnesses replayed, {skipped} skipped");
}
