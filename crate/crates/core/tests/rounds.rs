use idge_core::engine::random_round;
use idge_core::variants::STANDARD;

#[test]
fn mean_states_per_round_is_moderate() {
    let mut total = 0usize;
    let mut rounds = 0usize;
    for b in STANDARD {
        let s = b.script();
        let mut per = 0usize;
        for seed in 0..200 {
            let r = random_round(&s, seed, 1000).unwrap();
            per += r.states.len();
        }
        println!("{}: {:.1}", b.id, per as f64 / 200.0);
        total += per;
        rounds += 200;
    }
    let mean = total as f64 / rounds as f64;
    println!("mean {mean:.1}");
    assert!((20.0..=60.0).contains(&mean), "{mean}");
}
