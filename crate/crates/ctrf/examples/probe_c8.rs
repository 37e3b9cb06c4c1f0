//! Scratch probe: distribution-shift ordering across reserves, 10 seeds.

use ctrf::auction::{
    fit_relevance_oracle, impressions_to_dataset, simulate_ranked_pages, AuctionConfig,
    OracleConfig,
};
use ctrf::dataset::Source;
use ctrf::metrics::distribution_shift_score;
use ctrf::seeding::derive_seed;

fn main() {
    let mut pass = 0;
    for seed in 0..10u64 {
        let oracle =
            fit_relevance_oracle(&OracleConfig { seed: derive_seed(seed, &[1]), ..Default::default() })
                .unwrap();
        let l_cfg = AuctionConfig {
            relevance_reserve: 0.5,
            n_auctions: 5000,
            seed: derive_seed(seed, &[3]),
            ..Default::default()
        };
        let hi_cfg = AuctionConfig {
            relevance_reserve: 0.9,
            n_auctions: 2000,
            seed: derive_seed(seed, &[4, 0]),
            ..Default::default()
        };
        let lo_cfg = AuctionConfig {
            relevance_reserve: 0.55,
            n_auctions: 2000,
            seed: derive_seed(seed, &[4, 1]),
            ..Default::default()
        };
        let l_ds = impressions_to_dataset(
            &simulate_ranked_pages(&oracle, &l_cfg).unwrap(),
            &oracle,
            Source::L,
        )
        .unwrap();
        let hi = impressions_to_dataset(
            &simulate_ranked_pages(&oracle, &hi_cfg).unwrap(),
            &oracle,
            Source::Test,
        )
        .unwrap();
        let lo = impressions_to_dataset(
            &simulate_ranked_pages(&oracle, &lo_cfg).unwrap(),
            &oracle,
            Source::Test,
        )
        .unwrap();
        let ds_hi = distribution_shift_score(&l_ds, &hi, 10).unwrap();
        let ds_lo = distribution_shift_score(&l_ds, &lo, 10).unwrap();
        let ok = ds_hi > ds_lo;
        if ok {
            pass += 1;
        }
        println!(
            "seed {seed}: DS(L@0.5, test@0.9) = {ds_hi:.4}  DS(L@0.5, test@0.55) = {ds_lo:.4}  {}",
            if ok { "OK" } else { "VIOLATED" }
        );
    }
    println!("{pass}/10 seeds ordered correctly");
}
