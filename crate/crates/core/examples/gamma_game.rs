//! An optimal strategy pair whose payoff stream swings far from t * v.

use trajlens::corpus;
use trajlens::shapley_finite;
use trajlens::stochastic::{best_reply_value, eval_profile};
use trajlens::trajectory::DeviationProfile;

fn main() {
    let entry = corpus::gamma_game(10).unwrap();
    let game = entry.game().unwrap();
    let root = corpus::GAMMA_ROOT;
    let table = shapley_finite(game, 21).unwrap();
    println!("v_n(s), n = 1..21: {:?}", (1..=21).map(|n| table.value(n, root)).collect::<Vec<_>>());

    let n = 5;
    let horizon = 2 * n + 1;
    let (sigma, tau) = corpus::gamma_cooperate_profiles(&entry, n, horizon).unwrap();
    let cum = eval_profile(game, &sigma, &tau, root, horizon).unwrap();
    println!("cooperate cumulative: {cum:?}");
    println!(
        "best replies: player 1 {:.3}, player 2 {:.3}",
        best_reply_value(game, &tau, root, horizon).unwrap(),
        best_reply_value(game, &sigma, root, horizon).unwrap()
    );
    let d = DeviationProfile::from_cumulative(cum, 0.0, &[]);
    println!("D(6/11) = {} (5/11 = {})", d.at(6.0 / 11.0), 5.0 / 11.0);
}
