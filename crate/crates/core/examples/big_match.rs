//! Big Match: value 1/2 at every horizon, and the expected stream against
//! the column player's even mix.

use rand::Rng;
use trajlens::corpus;
use trajlens::shapley_finite;
use trajlens::stochastic::{eval_profile, MarkovProfile, Player};

fn main() {
    let entry = corpus::big_match().unwrap();
    let game = entry.game().unwrap();
    let play = game.index_of("play").unwrap();
    let table = shapley_finite(game, 200).unwrap();
    println!("v_1 = {}, v_50 = {}, v_200 = {}", table.value(1, play), table.value(50, play), table.value(200, play));

    let horizon = 10;
    let tau = corpus::big_match_half_column(game, horizon);
    let mut rng = rand::thread_rng();
    let sigma = MarkovProfile::markov(game, Player::One, horizon, |_, _| {
        let p: f64 = rng.gen();
        vec![p, 1.0 - p]
    });
    let cum = eval_profile(game, &sigma, &tau, play, horizon).unwrap();
    println!("cumulative payoffs vs random player 1: {cum:.3?}");
}
